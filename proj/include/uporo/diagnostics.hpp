#pragma once

#include <functional>
#include <vector>

#include "uporo/solver.hpp"

namespace uporo {

/// Running stability quantities mirrored from the step-wise energy
/// estimates: all entries must stay finite and nonnegative for a healthy
/// run, and bounded under simultaneous space/time refinement.
struct EnergyReport {
  double visc_increment_sum = 0.0;   // zeta * sum tau^-1 |du|_V^2
  double sup_u_energy_sq = 0.0;      // sup_n |u^n|_V^2
  double sum_du_energy_sq = 0.0;     // sum |u^n - u^{n-1}|_V^2
  double sum_chi_h1k = 0.0;          // sum tau |chi^n|^2_{1,T,kappa}
  double sup_legendre_bar = 0.0;     // sup_n L1 norm, transformed-ratio energy
  double sup_legendre_hat = 0.0;     // sup_n L1 norm, storage energy
  double sum_pore_l2 = 0.0;          // sum tau |pore(chi^n)|^2
  double sum_dchi_l2 = 0.0;          // sum tau^-1 |chi^n - chi^{n-1}|^2
  std::vector<double> legendre_bar_per_step;
  std::vector<double> legendre_hat_per_step;
  bool all_finite = true;
  double data_bound = 0.0;        // initial-data + source norms reference
  double implied_constant = 0.0;  // max quantity / data_bound
  bool flagged = false;           // implied constant above the threshold

  std::vector<std::pair<const char*, double>> named() const;
};

struct EnergyMonitorOptions {
  double flag_threshold = 1e6;  // on the implied constant
};

EnergyReport energy_monitor(const Trajectory& traj,
                            const TransientSolver& solver,
                            const EnergyMonitorOptions& opt = {});

// ---------------------------------------------------------------------------
// Saturated consolidation column benchmark.
// ---------------------------------------------------------------------------

/// One-dimensional consolidation column: load applied on the drained top
/// face of a column of the given height, all other faces rollers / no-flow.
struct TerzaghiSetup {
  double height = 1.0;
  double width = 0.0;  // 0 = height / cells (near-square cells)
  int cells = 64;
  int steps = 200;
  double t_end = 0.0;  // 0 = half a characteristic drainage time
  double load = 1.0e3;
  MaterialParams material{/*mu=*/1.0e5, /*lambda=*/1.0e5, /*alpha_biot=*/1.0,
                          /*c_w=*/1.0e-6, /*inv_n=*/1.0e-7, /*phi0=*/0.1,
                          /*kappa_abs=*/1.0e-5};
  double eta = 0.0;

  double constrained_modulus() const {
    return 2.0 * material.mu + material.lambda;
  }
  double storage_coefficient() const {
    return material.c_w * material.phi0 + material.inv_n + eta;
  }
  double consolidation_coefficient() const;
  double characteristic_time() const;
  /// Instantaneous pore-pressure response to the load.
  double skempton_jump() const;
  double final_time() const;
};

/// Truncated eigenfunction series for the excess pressure at height z
/// (measured from the impermeable bottom) and time t > 0. Writes an estimate
/// of the truncation remainder if tail_bound is non-null.
double terzaghi_analytic(const TerzaghiSetup& setup, double z, double t,
                         int n_terms, double* tail_bound = nullptr);

ProblemSpec make_terzaghi_problem(const TerzaghiSetup& setup);

struct TerzaghiResult {
  double rel_l2_error;  // space-time relative error against the series
  Trajectory trajectory;
};

TerzaghiResult run_terzaghi(const TerzaghiSetup& setup, int series_terms = 200);

// ---------------------------------------------------------------------------
// Manufactured-solution study.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int level = 0;
  double h = 0.0, tau = 0.0, zeta = 0.0, eta = 0.0;
  double err_chi = 0.0, err_u = 0.0;
  double order_chi = 0.0, order_u = 0.0;  // pairwise log2 ratios, 0 on row 0
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double fit_order_chi = 0.0;  // least-squares slopes over all levels
  double fit_order_u = 0.0;
};

/// Manufactured smooth fields with forcing closing the governing system.
/// The transformed pressure keeps one sign everywhere except on the
/// homogeneous-Dirichlet edge, so each study stays on a single branch.
class MmsCase {
 public:
  MmsCase(MaterialParams mat, VanGenuchtenParams vg, RegularizationParams reg,
          bool saturated);

  bool saturated() const { return saturated_; }
  ProblemSpec problem(int n, int steps) const;
  /// Exact fields for error evaluation.
  double chi_exact(double x, double y, double t) const;
  Vec2 u_exact(double x, double y, double t) const;

 private:
  MaterialParams mat_;
  VanGenuchtenParams vg_params_;
  RegularizationParams reg_;
  bool saturated_;
  std::shared_ptr<VanGenuchtenModel> vg_;
  std::shared_ptr<KirchhoffLaws> laws_;  // table-backed, shared by forcings
  double sign_ = 1.0;
};

struct MmsStudyOptions {
  std::vector<int> levels{8, 16, 32};  // cells per direction
  double steps_per_cells = 1.0;        // steps = round(n * this)
};

ConvergenceTable mms_study(const MmsCase& mms, const MmsStudyOptions& opt = {});

// ---------------------------------------------------------------------------
// Regularization ladders.
// ---------------------------------------------------------------------------

/// Successive differences over a ladder of regularization values at fixed
/// mesh and time grid. rows[k] holds the distance between solutions at
/// ladder[k] and ladder[k+1] in the space-time norms (err_chi / err_u);
/// Cauchy behavior = monotone decrease down the ladder.
ConvergenceTable regularization_sweep(
    const std::function<ProblemSpec(double)>& make_problem,
    const std::vector<double>& ladder);

/// Space-time distances between two trajectories on the same grid.
std::pair<double, double> trajectory_distance(const Trajectory& a,
                                              const Trajectory& b,
                                              const TransientSolver& solver);

}  // namespace uporo
