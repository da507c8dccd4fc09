#include "uporo/constitutive.hpp"

#include <algorithm>
#include <cmath>

#include "uporo/quadrature.hpp"

namespace uporo {

namespace {
constexpr double kQuadTol = 1e-12;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

VanGenuchtenParams VanGenuchtenParams::from_alpha_n(double alpha_vg, double n_vg) {
  VanGenuchtenParams p{alpha_vg, n_vg, 1.0 - 1.0 / n_vg};
  p.validate();
  return p;
}

void VanGenuchtenParams::validate() const {
  if (!(alpha_vg > 0.0))
    throw std::invalid_argument("van Genuchten: alpha_vg must be > 0");
  if (!(n_vg > 1.0))
    throw std::invalid_argument("van Genuchten: n_vg must be > 1");
  if (!(m_vg > 0.0 && m_vg < 1.0))
    throw std::invalid_argument("van Genuchten: m_vg must lie in (0,1)");
  if (std::abs(n_vg - 1.0 / (1.0 - m_vg)) > 1e-9 * n_vg)
    throw std::invalid_argument("van Genuchten: m_vg must equal 1 - 1/n_vg");
}

void MaterialParams::validate(int dim) const {
  if (!(mu > 0.0)) throw std::invalid_argument("material: mu must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("material: lambda must be >= 0");
  if (alpha_biot < 0.0 || alpha_biot > 1.0)
    throw std::invalid_argument("material: alpha_biot must lie in [0,1]");
  if (c_w < 0.0) throw std::invalid_argument("material: c_w must be >= 0");
  if (inv_n < 0.0) throw std::invalid_argument("material: 1/N must be >= 0");
  if (!(phi0 > 0.0 && phi0 < 1.0))
    throw std::invalid_argument("material: phi0 must lie in (0,1)");
  if (!(kappa_abs > 0.0))
    throw std::invalid_argument("material: kappa_abs must be > 0");
  if (!(bulk_modulus(dim) > 0.0))
    throw std::invalid_argument("material: drained bulk modulus must be > 0");
  if (kappa_min > 0.0 && kappa_max > 0.0 && kappa_min > kappa_max)
    throw std::invalid_argument("material: kappa bounds are inverted");
}

void RegularizationParams::validate() const {
  if (zeta < 0.0) throw std::invalid_argument("regularization: zeta must be >= 0");
  if (eta < 0.0) throw std::invalid_argument("regularization: eta must be >= 0");
}

// ---------------------------------------------------------------------------
// van Genuchten-Mualem curves
// ---------------------------------------------------------------------------

VanGenuchtenModel::VanGenuchtenModel(VanGenuchtenParams params)
    : params_(params) {
  params_.validate();
}

double VanGenuchtenModel::saturation(double p_w) const {
  if (p_w >= 0.0) return 1.0;
  const double y = -params_.alpha_vg * p_w;
  return std::pow(1.0 + std::pow(y, params_.n_vg), -params_.m_vg);
}

double VanGenuchtenModel::saturation_slope(double p_w) const {
  if (p_w >= 0.0) return 0.0;  // matches the one-sided limit since n_vg > 1
  const double a = params_.alpha_vg, n = params_.n_vg, m = params_.m_vg;
  const double y = -a * p_w;
  const double yn = std::pow(y, n);
  return m * n * a * std::pow(y, n - 1.0) * std::pow(1.0 + yn, -m - 1.0);
}

double VanGenuchtenModel::rel_perm(double s) const {
  if (!(s > 0.0) || s > 1.0)
    throw std::domain_error("rel_perm: saturation outside (0,1]");
  const double m = params_.m_vg;
  // 1 - s^{1/m} via expm1 to avoid cancellation near full saturation.
  const double u = -std::expm1(std::log(s) / m);
  const double bracket = 1.0 - std::pow(u, m);
  return std::sqrt(s) * bracket * bracket;
}

double VanGenuchtenModel::rel_perm_at(double p_w) const {
  if (p_w >= 0.0) return 1.0;
  const double a = params_.alpha_vg, n = params_.n_vg, m = params_.m_vg;
  const double yn = std::pow(-a * p_w, n);
  // 1 - s^{1/m} = y^n / (1 + y^n) exactly for these curves; evaluating it
  // directly keeps full precision near saturation where the composed form
  // cancels.
  const double u = yn / (1.0 + yn);
  const double bracket = 1.0 - std::pow(u, m);
  const double sqrt_s = std::exp(-0.5 * m * std::log1p(yn));
  return sqrt_s * bracket * bracket;
}

double VanGenuchtenModel::pressure_at_saturation(double s) const {
  if (!(s > 0.0) || !(s < 1.0))
    throw std::domain_error("pressure_at_saturation: s outside (0,1)");
  const double a = params_.alpha_vg, n = params_.n_vg, m = params_.m_vg;
  const double y = std::pow(std::expm1(-std::log(s) / m), 1.0 / n);
  return -y / a;
}

// ---------------------------------------------------------------------------
// Transforms in the water-pressure variable
// ---------------------------------------------------------------------------

double pore_pressure(const RetentionModel& ret, double p_w) {
  if (p_w >= 0.0) return p_w;  // s_w = 1 on [0, p_w]
  return integrate([&](double p) { return ret.saturation(p); }, 0.0, p_w,
                   kQuadTol);
}

double kirchhoff(const RetentionModel& ret, double p_w) {
  if (p_w >= 0.0) return p_w;  // kappa_rel(s_w) = 1 on the saturated branch
  return integrate([&](double p) { return ret.rel_perm_at(p); }, 0.0, p_w,
                   kQuadTol);
}

double kirchhoff_inverse(const RetentionModel& ret, double chi) {
  if (chi >= 0.0) return chi;
  // chi(p) > p for p < 0, so p = chi brackets from above. Expand the lower
  // end geometrically; failure to bracket means chi sits below the finite
  // infimum of the transform.
  double hi = chi;           // chi(hi) >= chi
  double lo = 2.0 * chi;
  int expand = 0;
  while (kirchhoff(ret, lo) > chi) {
    hi = lo;
    lo *= 2.0;
    if (++expand > 60)
      throw std::runtime_error(
          "kirchhoff_inverse: bracket expansion failed; target below the "
          "range of the transform");
  }
  // Bisection to a tight interval, then Newton polish with chi'(p) = kappa.
  for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, -lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kirchhoff(ret, mid) < chi)
      lo = mid;
    else
      hi = mid;
  }
  double p = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double slope = ret.rel_perm_at(p);
    if (!(slope > 0.0)) break;
    const double step = (kirchhoff(ret, p) - chi) / slope;
    const double next = p - step;
    if (next < lo || next > hi) break;
    p = next;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(p))) break;
  }
  return p;
}

double storage_b(const RetentionModel& ret, const MaterialParams& mat,
                 double p_w, double eta) {
  const double grain = mat.inv_n + eta;
  if (p_w >= 0.0)
    return mat.phi0 + (mat.c_w * mat.phi0 + grain) * p_w;
  double b = mat.phi0 * ret.saturation(p_w);
  if (mat.c_w > 0.0)
    b += mat.c_w * mat.phi0 * pore_pressure(ret, p_w);
  if (grain > 0.0)
    b += grain * integrate(
                     [&](double p) {
                       const double s = ret.saturation(p);
                       return s * s;  // s_w * p_pore' = s_w^2
                     },
                     0.0, p_w, kQuadTol);
  return b;
}

double legendre_transform(const std::function<double(double)>& b, double z,
                          double abs_tol) {
  if (z == 0.0) return 0.0;
  const double tail = integrate(b, 0.0, z, abs_tol);
  return z * b(z) - tail;
}

// ---------------------------------------------------------------------------
// KirchhoffLaws
// ---------------------------------------------------------------------------

KirchhoffLaws::KirchhoffLaws(const RetentionModel& ret,
                             const MaterialParams& mat, double eta,
                             std::optional<LawTableSpec> table)
    : ret_(ret), mat_(mat), eta_(eta) {
  mat_.validate();
  if (!(eta >= 0.0)) throw std::invalid_argument("KirchhoffLaws: eta must be >= 0");
  chi_min_ = kirchhoff(ret_, -1e30);
  if (!table) return;
  if (!(table->p_w_min < 0.0) || table->segments < 16)
    throw std::invalid_argument("KirchhoffLaws: bad table spec");

  // Log-spaced pressure nodes from p_w_min up to ~0, most negative first.
  const int n = table->segments;
  const double pmin = table->p_w_min;
  const double lmax = std::log10(-pmin);
  const double lmin = lmax - 14.0;  // |p| spans 14 decades down to ~0
  nodes_.resize(n + 2);
  nodes_.back() = NodeData{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  nodes_[n] = NodeData{-std::pow(10.0, lmin), 0, 0, 0, 0, 0};
  for (int i = 0; i < n; ++i)
    nodes_[i].p = -std::pow(10.0, lmax - (lmax - lmin) * i / n);

  // Cumulative integrals toward negative pressure; node 0 on the right end.
  auto krel = [&](double p) { return ret_.rel_perm_at(p); };
  auto sw = [&](double p) { return ret_.saturation(p); };
  auto sw2 = [&](double p) {
    const double s = ret_.saturation(p);
    return s * s;
  };
  for (int i = n; i >= 0; --i) {
    const double a = nodes_[i + 1].p, b = nodes_[i].p;
    nodes_[i].chi = nodes_[i + 1].chi + gk15_panel(krel, a, b);
    nodes_[i].pore = nodes_[i + 1].pore + gk15_panel(sw, a, b);
    nodes_[i].ss = nodes_[i + 1].ss + gk15_panel(sw2, a, b);
  }
  nodes_p_.resize(nodes_.size());
  nodes_chi_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    nodes_p_[i] = nodes_[i].p;
    nodes_chi_[i] = nodes_[i].chi;
  }
  // Second pass: cumulative integrals of b dchi and b d(pore/sat), which
  // need the first-pass values inside the integrands.
  for (int i = n; i >= 0; --i) {
    const double a = nodes_[i + 1].p, b = nodes_[i].p;
    nodes_[i].int_b =
        nodes_[i + 1].int_b +
        gk15_panel([&](double p) { return storage_from_p(p) * krel(p); }, a, b);
    nodes_[i].int_br =
        nodes_[i + 1].int_br +
        gk15_panel(
            [&](double p) {
              const double s = sw(p);
              const double ratio_slope =
                  1.0 - pore_from_p(p) * ret_.saturation_slope(p) / (s * s);
              return storage_from_p(p) * ratio_slope;
            },
            a, b);
  }
}

double KirchhoffLaws::pore_from_p(double p) const {
  const int k = locate(p);
  return nodes_[k].pore +
         gk15_panel([&](double t) { return ret_.saturation(t); }, nodes_[k].p,
                    p);
}

double KirchhoffLaws::ss_from_p(double p) const {
  const int k = locate(p);
  return nodes_[k].ss + gk15_panel(
                            [&](double t) {
                              const double s = ret_.saturation(t);
                              return s * s;
                            },
                            nodes_[k].p, p);
}

double KirchhoffLaws::storage_from_p(double p) const {
  return storage_at_p(p, pore_from_p(p), ss_from_p(p));
}

double KirchhoffLaws::storage_at_p(double p, double pore, double ss) const {
  return mat_.phi0 * ret_.saturation(p) + mat_.c_w * mat_.phi0 * pore +
         (mat_.inv_n + eta_) * ss;
}

int KirchhoffLaws::locate(double p) const {
  // Largest node index whose pressure is <= p (nodes ascend in p).
  auto it = std::upper_bound(nodes_p_.begin(), nodes_p_.end(), p);
  int k = int(it - nodes_p_.begin()) - 1;
  return std::clamp(k, 0, int(nodes_p_.size()) - 1);
}

int KirchhoffLaws::locate_chi(double chi) const {
  auto it = std::upper_bound(nodes_chi_.begin(), nodes_chi_.end(), chi);
  int k = int(it - nodes_chi_.begin()) - 1;
  return std::clamp(k, 0, int(nodes_chi_.size()) - 2);
}

double KirchhoffLaws::p_w_exact(double chi) const {
  return kirchhoff_inverse(ret_, chi);
}

double KirchhoffLaws::p_w(double chi) const {
  if (chi >= 0.0) return chi;
  if (nodes_.empty() || chi < nodes_.front().chi) return p_w_exact(chi);
  // Node bracket, then safeguarded Newton on the cumulative transform.
  int k = locate_chi(chi);
  double lo = nodes_[k].p, hi = nodes_[k + 1].p;
  double p = 0.5 * (lo + hi);
  auto chi_at = [&](double q) {
    return nodes_[k].chi +
           gk15_panel([&](double t) { return ret_.rel_perm_at(t); },
                      nodes_[k].p, q);
  };
  for (int it = 0; it < 100; ++it) {
    const double r = chi_at(p) - chi;
    if (r > 0)
      hi = p;
    else
      lo = p;
    const double slope = ret_.rel_perm_at(p);
    double next = slope > 0.0 ? p - r / slope : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - p) < 1e-16 * std::max(1.0, std::abs(p))) return next;
    p = next;
  }
  return p;
}

double KirchhoffLaws::forward(double p_w) const {
  if (p_w >= 0.0) return p_w;
  if (nodes_.empty() || p_w < nodes_.front().p) return kirchhoff(ret_, p_w);
  const int k = locate(p_w);
  return nodes_[k].chi +
         gk15_panel([&](double t) { return ret_.rel_perm_at(t); }, nodes_[k].p,
                    p_w);
}

double KirchhoffLaws::saturation(double chi) const {
  if (chi >= 0.0) return 1.0;
  return ret_.saturation(p_w(chi));
}

double KirchhoffLaws::saturation_slope(double chi) const {
  if (chi >= 0.0) return 0.0;
  const double p = p_w(chi);
  return ret_.saturation_slope(p) / ret_.rel_perm_at(p);
}

double KirchhoffLaws::rel_perm(double chi) const {
  if (chi >= 0.0) return 1.0;
  return ret_.rel_perm_at(p_w(chi));
}

double KirchhoffLaws::pore_pressure(double chi) const {
  if (chi >= 0.0) return chi;
  const double p = p_w(chi);
  if (nodes_.empty() || p < nodes_.front().p) return uporo::pore_pressure(ret_, p);
  const int k = locate(p);
  return nodes_[k].pore +
         gk15_panel([&](double t) { return ret_.saturation(t); }, nodes_[k].p,
                    p);
}

double KirchhoffLaws::pore_pressure_slope(double chi) const {
  if (chi >= 0.0) return 1.0;
  const double p = p_w(chi);
  return ret_.saturation(p) / ret_.rel_perm_at(p);
}

double KirchhoffLaws::storage(double chi) const {
  const double grain = mat_.inv_n + eta_;
  if (chi >= 0.0) return mat_.phi0 + (mat_.c_w * mat_.phi0 + grain) * chi;
  const double p = p_w(chi);
  if (nodes_.empty() || p < nodes_.front().p)
    return storage_b(ret_, mat_, p, eta_);
  const int k = locate(p);
  const double pore =
      nodes_[k].pore +
      gk15_panel([&](double t) { return ret_.saturation(t); }, nodes_[k].p, p);
  const double ss =
      nodes_[k].ss + gk15_panel(
                         [&](double t) {
                           const double s = ret_.saturation(t);
                           return s * s;
                         },
                         nodes_[k].p, p);
  return storage_at_p(p, pore, ss);
}

double KirchhoffLaws::storage_slope(double chi) const {
  const double grain = mat_.inv_n + eta_;
  if (chi >= 0.0) return mat_.c_w * mat_.phi0 + grain;
  const double p = p_w(chi);
  const double s = ret_.saturation(p);
  const double k = ret_.rel_perm_at(p);
  return (mat_.c_w * mat_.phi0 * s + mat_.phi0 * ret_.saturation_slope(p) +
          grain * s * s) /
         k;
}

double KirchhoffLaws::pore_over_sat(double chi) const {
  if (chi >= 0.0) return chi;
  return pore_pressure(chi) / saturation(chi);
}

double KirchhoffLaws::pore_over_sat_slope(double chi) const {
  if (chi >= 0.0) return 1.0;
  const double p = p_w(chi);
  const double s = ret_.saturation(p);
  const double pore = pore_pressure(chi);
  return (1.0 - pore * ret_.saturation_slope(p) / (s * s)) /
         ret_.rel_perm_at(p);
}

double KirchhoffLaws::pore_over_sat_inverse(double y) const {
  if (y >= 0.0) return y;
  // pore_over_sat(chi) <= chi for chi < 0 (slope >= 1, zero at 0), so the
  // root lies in [y, 0]; it also lies inside the transform range.
  double lo = std::max(y, chi_floor()), hi = 0.0;
  double chi = 0.5 * (lo + hi);
  for (int it = 0; it < 120; ++it) {
    const double r = pore_over_sat(chi) - y;
    if (r > 0)
      hi = chi;
    else
      lo = chi;
    const double slope = pore_over_sat_slope(chi);
    double next = slope > 0.0 ? chi - r / slope : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - chi) < 1e-15 * std::max(1.0, std::abs(chi)))
      return next;
    chi = next;
  }
  return chi;
}

double KirchhoffLaws::legendre_storage(double chi) const {
  if (chi == 0.0) return 0.0;
  if (chi > 0.0) {
    // Affine branch: B(chi) = slope * chi^2 / 2 plus nothing from the
    // constant part (Legendre energies ignore constants).
    const double slope = mat_.c_w * mat_.phi0 + mat_.inv_n + eta_;
    return 0.5 * slope * chi * chi;
  }
  double tail;  // int_0^chi b dchi
  const double p = p_w(chi);
  if (!nodes_.empty() && p >= nodes_.front().p) {
    const int k = locate(p);
    tail = nodes_[k].int_b +
           gk15_panel(
               [&](double t) {
                 return storage_from_p(t) * ret_.rel_perm_at(t);
               },
               nodes_[k].p, p);
  } else {
    tail = integrate([&](double z) { return storage(z); }, 0.0, chi, 1e-10);
  }
  return chi * storage(chi) - tail;
}

double KirchhoffLaws::legendre_pore_over_sat(double chi) const {
  if (chi == 0.0) return 0.0;
  if (chi > 0.0) {
    const double slope = mat_.c_w * mat_.phi0 + mat_.inv_n + eta_;
    return 0.5 * slope * chi * chi;
  }
  const double y = pore_over_sat(chi);
  double tail;  // int_0^y bbar(s) ds = int_0^chi b d(pore/sat)
  const double p = p_w(chi);
  if (!nodes_.empty() && p >= nodes_.front().p) {
    const int k = locate(p);
    tail = nodes_[k].int_br +
           gk15_panel(
               [&](double t) {
                 const double s = ret_.saturation(t);
                 const double slope =
                     1.0 - pore_from_p(t) * ret_.saturation_slope(t) / (s * s);
                 return storage_from_p(t) * slope;
               },
               nodes_[k].p, p);
  } else {
    tail = integrate(
        [&](double z) { return storage(z) * pore_over_sat_slope(z); }, 0.0,
        chi, 1e-10);
  }
  return y * storage(chi) - tail;
}

}  // namespace uporo
