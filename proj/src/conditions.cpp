#include "uporo/conditions.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace uporo {

double nd3_criterion(const VanGenuchtenModel& vg, double p_w) {
  const double s = vg.saturation(p_w);
  const double k = vg.rel_perm(s);
  const double dry = 1.0 - k;
  return vg.saturation_slope(p_w) * k / (s * s * dry * dry);
}

double nd3_smin(const VanGenuchtenModel& vg, double k_dr, double phi0,
                double alpha_biot, const Nd3Options& opt, bool* no_root) {
  if (!(k_dr > 0.0)) throw std::invalid_argument("nd3_smin: K_dr must be > 0");
  if (no_root) *no_root = false;
  const double threshold = phi0 * alpha_biot * alpha_biot / (4.0 * k_dr);
  if (!(threshold > 0.0)) {
    if (no_root) *no_root = true;
    return opt.smin_floor;
  }
  // The criterion grows without bound toward p -> 0- and decays in the dry
  // limit. Expand a bracket [p_lo, p_hi] with g(p_lo) < threshold < g(p_hi).
  double p_hi = -1.0 / vg.params().alpha_vg;
  int guard = 0;
  while (nd3_criterion(vg, p_hi) <= threshold) {
    p_hi *= 0.5;
    if (++guard > 2000) {
      if (no_root) *no_root = true;
      return opt.smin_floor;
    }
  }
  double p_lo = 2.0 * p_hi;
  guard = 0;
  while (nd3_criterion(vg, p_lo) > threshold) {
    p_lo *= 2.0;
    if (++guard > 2000) {
      // Criterion holds for every saturation down to the resolvable range.
      if (no_root) *no_root = true;
      return opt.smin_floor;
    }
  }
  while (p_hi - p_lo > opt.pressure_tol &&
         p_hi - p_lo > 1e-15 * std::abs(p_lo)) {
    const double mid = 0.5 * (p_lo + p_hi);
    if (nd3_criterion(vg, mid) > threshold)
      p_hi = mid;
    else
      p_lo = mid;
  }
  return vg.saturation(0.5 * (p_lo + p_hi));
}

namespace {

// Log-spaced capillary pressures covering saturations [s_floor, 1).
std::vector<double> pressure_grid(const VanGenuchtenModel& vg, double s_floor,
                                  int points) {
  const double p_floor = vg.pressure_at_saturation(s_floor);
  const double p_wet = -1e-10 / vg.params().alpha_vg;
  const double l0 = std::log10(-p_wet), l1 = std::log10(-p_floor);
  std::vector<double> ps(points);
  for (int i = 0; i < points; ++i)
    ps[i] = -std::pow(10.0, l0 + (l1 - l0) * i / double(points - 1));
  return ps;
}

double sup_on_grid(const VanGenuchtenModel& vg, double s_floor,
                   const GridBoundOptions& opt,
                   const std::function<double(double)>& fn_of_p, bool maximize) {
  if (!(s_floor > 0.0) || !(s_floor < 1.0))
    throw std::invalid_argument("condition bounds: s_floor must lie in (0,1)");
  double prev = 0.0;
  int points = opt.initial_points;
  for (int r = 0; r <= opt.max_refinements; ++r, points *= 2) {
    double extreme = maximize ? 0.0 : std::numeric_limits<double>::infinity();
    for (double p : pressure_grid(vg, s_floor, points)) {
      const double v = fn_of_p(p);
      extreme = maximize ? std::max(extreme, v) : std::min(extreme, v);
    }
    if (r > 0 && std::abs(extreme - prev) <= opt.rel_change_tol * std::abs(prev))
      return extreme;
    prev = extreme;
  }
  throw std::runtime_error(
      "condition bounds: supremum did not settle under grid refinement "
      "(diverging toward the saturation floor?)");
}

}  // namespace

double nd1_bound(const VanGenuchtenModel& vg, double s_floor,
                 const GridBoundOptions& opt) {
  auto ratio = [&](double p) {
    const double chi = kirchhoff(vg, p);
    if (chi == 0.0) return 1.0;
    return std::abs(pore_pressure(vg, p) / (vg.saturation(p) * chi));
  };
  const double sup = sup_on_grid(vg, s_floor, opt, ratio, true);
  return opt.safety * std::max(sup, 1.0);  // saturated branch contributes 1
}

std::pair<double, double> nd2_bounds(const VanGenuchtenModel& vg,
                                     double s_floor,
                                     const GridBoundOptions& opt) {
  auto slope = [&](double p) {
    const double s = vg.saturation(p);
    return s / vg.rel_perm(s);
  };
  const double hi = sup_on_grid(vg, s_floor, opt, slope, true);
  const double lo = sup_on_grid(vg, s_floor, opt, slope, false);
  return {std::min(lo, 1.0), std::max(hi, 1.0)};  // saturated branch gives 1
}

ConditionReport check_report(const MaterialParams& mat,
                             const VanGenuchtenModel& vg, double eta,
                             double s_floor, int dim) {
  mat.validate(dim);
  ConditionReport r;
  r.s_floor = s_floor;
  r.s_range_hi = 1.0;
  r.nd1_bound = nd1_bound(vg, s_floor);
  std::tie(r.nd2_lower, r.nd2_upper) = nd2_bounds(vg, s_floor);
  r.nd3_smin = nd3_smin(vg, mat.bulk_modulus(dim), mat.phi0, mat.alpha_biot,
                        {}, &r.nd3_no_root);
  r.a1star_constant = mat.phi0 * mat.c_w + mat.inv_n + eta;
  return r;
}

std::vector<SminTableRow> smin_table(double phi0, double alpha_biot) {
  const double alphas[] = {0.1, 2.0};
  const double ns[] = {1.5, 2.0, 2.5};
  const double kdrs[] = {1e5, 1e8, 1e11};
  std::vector<SminTableRow> rows;
  for (double n : ns)
    for (double a : alphas)
      for (double k : kdrs) {
        VanGenuchtenModel vg(a, n);
        rows.push_back({a, n, k, nd3_smin(vg, k, phi0, alpha_biot)});
      }
  return rows;
}

}  // namespace uporo
