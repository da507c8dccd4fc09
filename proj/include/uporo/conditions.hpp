#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "uporo/constitutive.hpp"

namespace uporo {

/// Quantitative non-degeneracy report for one parameter set.
struct ConditionReport {
  double nd1_bound = 0.0;        // constant bounding |pore/(sat*chi)|
  double nd2_lower = 0.0;        // bounds on the pore-pressure slope
  double nd2_upper = 0.0;
  double nd3_smin = 0.0;         // minimal admissible saturation
  bool nd3_no_root = false;      // criterion held for every saturation
  double a1star_constant = 0.0;  // phi0*c_w + 1/N + eta
  double s_floor = 0.0;          // saturation floor the bounds were taken on
  double s_range_hi = 1.0;
};

struct Nd3Options {
  double pressure_tol = 1e-12;   // bisection tolerance on the root pressure
  double smin_floor = 1e-12;     // reported when the criterion never fails
};

/// Minimal saturation for the stiffness criterion in the incompressible
/// case: the root of
///   s_w'(p) kappa_rel / (s_w^2 (1 - kappa_rel)^2) = phi0 alpha^2 / (4 K_dr),
/// mapped through s_w. The left side is increasing toward saturation, so the
/// criterion holds for s >= s_min. Returns smin_floor and sets the flag when
/// the threshold is never reached (e.g. alpha_biot = 0).
double nd3_smin(const VanGenuchtenModel& vg, double k_dr, double phi0,
                double alpha_biot, const Nd3Options& opt = {},
                bool* no_root = nullptr);

/// The criterion function above, exposed for monotonicity checks.
double nd3_criterion(const VanGenuchtenModel& vg, double p_w);

struct GridBoundOptions {
  int initial_points = 4096;      // log-spaced capillary-pressure grid
  double rel_change_tol = 0.005;  // refinement stops below this
  int max_refinements = 6;
  double safety = 1.05;           // applied to the reported supremum
};

/// Supremum of |pore_pressure / (saturation * chi)| over the chi range with
/// saturation >= s_floor, times a safety factor. Throws std::runtime_error
/// if the bound keeps growing under grid refinement.
double nd1_bound(const VanGenuchtenModel& vg, double s_floor,
                 const GridBoundOptions& opt = {});

/// Min/max of the pore-pressure slope saturation/rel_perm over the same
/// restricted range.
std::pair<double, double> nd2_bounds(const VanGenuchtenModel& vg,
                                     double s_floor,
                                     const GridBoundOptions& opt = {});

/// Aggregate report.
ConditionReport check_report(const MaterialParams& mat,
                             const VanGenuchtenModel& vg, double eta,
                             double s_floor, int dim = 2);

/// One row of the minimal-saturation survey emitted by the CLI.
struct SminTableRow {
  double alpha_vg;
  double n_vg;
  double k_dr;
  double s_min;
};

/// Survey over the standard parameter grid: alpha_vg in {0.1, 2},
/// n_vg in {1.5, 2, 2.5}, K_dr in {1e5, 1e8, 1e11}.
std::vector<SminTableRow> smin_table(double phi0 = 0.1, double alpha_biot = 1.0);

}  // namespace uporo
