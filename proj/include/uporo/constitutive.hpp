#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace uporo {

/// van Genuchten fitting constants. m_vg is tied to n_vg by m = 1 - 1/n.
struct VanGenuchtenParams {
  double alpha_vg;  // inverse pressure scale, > 0
  double n_vg;      // shape exponent, > 1
  double m_vg;      // = 1 - 1/n_vg, in (0,1)

  static VanGenuchtenParams from_alpha_n(double alpha_vg, double n_vg);
  void validate() const;  // throws std::invalid_argument on violation
};

/// Scalar retention laws: saturation vs water pressure and relative
/// permeability vs saturation. Implementations must satisfy
/// rel_perm(saturation(p)) > 0 for all p so the pressure transform is
/// invertible.
class RetentionModel {
 public:
  virtual ~RetentionModel() = default;

  /// s_w(p_w), in (0,1]; equals 1 for p_w >= 0.
  virtual double saturation(double p_w) const = 0;

  /// d s_w / d p_w (one-sided at the kink p_w = 0, where both sides agree
  /// for the shipped laws).
  virtual double saturation_slope(double p_w) const = 0;

  /// kappa_rel(s), s in (0,1]. Throws std::domain_error outside.
  virtual double rel_perm(double s) const = 0;

  /// kappa_rel(s_w(p_w)). Implementations may override with a
  /// cancellation-free closed form; the default composes the two curves.
  virtual double rel_perm_at(double p_w) const {
    return rel_perm(saturation(p_w));
  }
};

/// van Genuchten-Mualem retention curves:
///   s_w(p)    = [1 + (-alpha p)^n]^{-m}   for p <= 0, 1 otherwise
///   kappa(s)  = sqrt(s) [1 - (1 - s^{1/m})^m]^2
class VanGenuchtenModel final : public RetentionModel {
 public:
  explicit VanGenuchtenModel(VanGenuchtenParams params);
  VanGenuchtenModel(double alpha_vg, double n_vg)
      : VanGenuchtenModel(VanGenuchtenParams::from_alpha_n(alpha_vg, n_vg)) {}

  const VanGenuchtenParams& params() const { return params_; }

  double saturation(double p_w) const override;
  double saturation_slope(double p_w) const override;
  double rel_perm(double s) const override;
  double rel_perm_at(double p_w) const override;

  /// Water pressure at a given saturation s in (0,1); inverse of the
  /// retention curve on the unsaturated branch.
  double pressure_at_saturation(double s) const;

 private:
  VanGenuchtenParams params_;
};

/// Bulk material constants. Pressures are in consistent but unspecified
/// units throughout the library; only ratios of the entries matter.
struct MaterialParams {
  double mu = 1.0;           // shear modulus, > 0
  double lambda = 0.0;       // first Lame parameter, >= 0
  double alpha_biot = 1.0;   // effective-stress coupling, in [0,1]
  double c_w = 0.0;          // fluid compressibility, >= 0
  double inv_n = 0.0;        // grain compressibility 1/N, >= 0
  double phi0 = 0.1;         // reference porosity, in (0,1)
  double kappa_abs = 1.0;    // reference absolute permeability, > 0
  double kappa_min = 0.0;    // declared lower bound for cell values (0 = use kappa_abs)
  double kappa_max = 0.0;    // declared upper bound (0 = use kappa_abs)

  /// Drained bulk modulus 2 mu / d + lambda.
  double bulk_modulus(int dim) const { return 2.0 * mu / dim + lambda; }

  double kappa_lower() const { return kappa_min > 0 ? kappa_min : kappa_abs; }
  double kappa_upper() const { return kappa_max > 0 ? kappa_max : kappa_abs; }

  void validate(int dim = 2) const;  // throws std::invalid_argument
};

struct RegularizationParams {
  double zeta = 0.0;  // visco-elastic term in the mechanics equation, >= 0
  double eta = 0.0;   // added grain compressibility in the storage law, >= 0

  void validate() const;
};

// ---------------------------------------------------------------------------
// Water-pressure domain transforms. All integrals use adaptive Gauss-Kronrod
// quadrature with absolute tolerance 1e-12, split at the p_w = 0 kink.
// ---------------------------------------------------------------------------

/// Equivalent pore pressure: integral of s_w from 0 to p_w.
double pore_pressure(const RetentionModel& ret, double p_w);

/// Transformed pressure: integral of kappa_rel(s_w) from 0 to p_w.
/// Strictly increasing; identity for p_w >= 0.
double kirchhoff(const RetentionModel& ret, double p_w);

/// Inverse of kirchhoff(). Monotone bisection with Newton polish; throws
/// std::runtime_error if the bracket expansion fails (chi below the finite
/// infimum of the transform signals pathological parameters).
double kirchhoff_inverse(const RetentionModel& ret, double chi);

/// Storage law
///   b(p) = phi0 s_w + c_w phi0 int_0^p s_w + (1/N + eta) int_0^p s_w^2,
/// non-decreasing in p_w; equals phi0 at p_w = 0.
double storage_b(const RetentionModel& ret, const MaterialParams& mat,
                 double p_w, double eta = 0.0);

/// Legendre transform B(z) = z b(z) - int_0^z b(s) ds >= 0 of a continuous
/// non-decreasing b with b(0) = 0 (the value is invariant under adding a
/// constant to b, so any normalization works).
double legendre_transform(const std::function<double(double)>& b, double z,
                          double abs_tol = 1e-12);

// ---------------------------------------------------------------------------
// Laws in the transformed pressure variable chi.
// ---------------------------------------------------------------------------

/// Optional acceleration table for KirchhoffLaws. Cumulative Gauss-Kronrod
/// integrals of the retention curves are stored on a log-spaced pressure grid;
/// evaluations integrate exactly from the nearest node, so the table changes
/// cost, not accuracy (~1e-14). Inversion does a node lookup plus safeguarded
/// Newton. Outside [p_w_min, 0] evaluation falls back to the exact path.
struct LawTableSpec {
  double p_w_min = -1e6;  // most negative tabulated pressure
  int segments = 2048;
};

/// All constitutive laws as functions of the transformed pressure, together
/// with analytic slopes and the Legendre energies used by the stability
/// monitors. Instances are immutable after construction and safe to share
/// across threads.
class KirchhoffLaws {
 public:
  KirchhoffLaws(const RetentionModel& ret, const MaterialParams& mat,
                double eta, std::optional<LawTableSpec> table = std::nullopt);

  const MaterialParams& material() const { return mat_; }
  double eta() const { return eta_; }
  const RetentionModel& retention() const { return ret_; }

  /// Infimum of the transform: chi values at or below this are outside the
  /// constitutive domain. Finite for van Genuchten curves.
  double chi_infimum() const { return chi_min_; }
  /// Smallest chi the solver may evaluate; slightly inside the range.
  double chi_floor() const { return chi_min_ * (1.0 - 1e-6); }

  /// Inverse transform p_w(chi); identity for chi >= 0.
  double p_w(double chi) const;
  /// Forward transform evaluated through the same table path (test hook).
  double forward(double p_w) const;

  double saturation(double chi) const;         // s_w(p_w(chi))
  double saturation_slope(double chi) const;   // d/dchi = s_w'(p_w)/kappa_rel
  double rel_perm(double chi) const;           // kappa_rel(s_w(p_w(chi)))
  double pore_pressure(double chi) const;      // identity for chi >= 0
  double pore_pressure_slope(double chi) const;  // = saturation/rel_perm >= 1

  double storage(double chi) const;            // b(p_w(chi)) with 1/N + eta
  double storage_slope(double chi) const;      // analytic, >= 0

  /// The ratio pore_pressure/saturation, its slope (>= 1), and its inverse.
  double pore_over_sat(double chi) const;
  double pore_over_sat_slope(double chi) const;
  double pore_over_sat_inverse(double y) const;

  /// Legendre energy of the storage law evaluated at chi.
  double legendre_storage(double chi) const;
  /// Legendre energy of storage composed with the inverse of
  /// pore_over_sat, evaluated at pore_over_sat(chi). Computed by
  /// substitution, no numerical inversion involved.
  double legendre_pore_over_sat(double chi) const;

  bool has_table() const { return !nodes_p_.empty(); }

 private:
  struct NodeData {
    double p;        // pressure node (<= 0)
    double chi;      // cumulative kappa_rel integral
    double pore;     // cumulative s_w integral
    double ss;       // cumulative s_w^2 integral
    double int_b;    // cumulative b dchi   (= int b kappa_rel dp)
    double int_br;   // cumulative b d(pore/sat)
  };

  double storage_at_p(double p, double pore, double ss) const;
  int locate(double p) const;                 // table segment containing p
  int locate_chi(double chi) const;           // segment by chi value
  double pore_from_p(double p) const;         // table-path pore pressure
  double ss_from_p(double p) const;           // table-path s_w^2 integral
  double storage_from_p(double p) const;
  double p_w_exact(double chi) const;

  const RetentionModel& ret_;
  MaterialParams mat_;
  double eta_;
  double chi_min_;
  std::vector<NodeData> nodes_;   // ascending in p (most negative first)
  std::vector<double> nodes_p_;   // node pressures for lookup
  std::vector<double> nodes_chi_;
};

}  // namespace uporo
