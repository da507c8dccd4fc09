#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "uporo/constitutive.hpp"
#include "uporo/elasticity.hpp"
#include "uporo/mesh.hpp"

namespace uporo {

struct TimeGrid {
  double t_end = 1.0;
  int steps = 1;
  double tau() const { return t_end / steps; }
};

/// External load and source data as space-time functions. Boundary data is
/// sampled on the side it applies to; homogeneous defaults.
struct Sources {
  std::function<Vec2(double, double, double)> body;            // f(x,y,t)
  std::function<Vec2(Side, double, double, double)> traction;  // on Gamma_N^m
  std::function<double(double, double, double)> fluid;         // h(x,y,t)
  std::function<double(Side, double, double, double)> influx;  // w_N on Gamma_N^f

  Vec2 body_at(double x, double y, double t) const {
    return body ? body(x, y, t) : Vec2{0.0, 0.0};
  }
  Vec2 traction_at(Side s, double x, double y, double t) const {
    return traction ? traction(s, x, y, t) : Vec2{0.0, 0.0};
  }
  double fluid_at(double x, double y, double t) const {
    return fluid ? fluid(x, y, t) : 0.0;
  }
  double influx_at(Side s, double x, double y, double t) const {
    return influx ? influx(s, x, y, t) : 0.0;
  }
};

struct SolverOptions {
  double tol_abs = 1e-9;       // absolute residual tolerance per equation
  double tol_rel = 1e-9;       // relative to the initial step residual
  int max_iters = 50;
  bool retry_with_halved_tau = false;  // one recursive tau/2 retry
  bool use_law_table = true;
  LawTableSpec table{};
  int source_time_samples = 8;  // trapezoid panels per slab average
};

/// Full problem description. The retention model is owned here; solvers keep
/// references, so the spec must outlive them.
struct ProblemSpec {
  Mesh mesh;
  VanGenuchtenModel retention{0.5, 2.0};
  MaterialParams material;
  RegularizationParams reg;
  CellField kappa_cells;  // empty = uniform material.kappa_abs
  TimeGrid time;
  Sources sources;
  std::function<double(double, double)> chi0;  // initial transformed pressure
  SolverOptions opts;
  bool monitors_enabled = false;  // enforces tau < 1/8

  void validate() const;  // throws std::invalid_argument
  CellField kappa_or_default() const;
};

struct State {
  Eigen::VectorXd u;  // full nodal vector, constrained dofs zero
  CellField chi;
  int step = 0;
  double time = 0.0;
};

struct StepDiagnostics {
  int newton_iters = 0;
  double mech_residual = 0.0;
  double flow_residual = 0.0;
  double storage_monotonicity = 0.0;  // <b(chi^n)-b(chi^{n-1}), chi^n-chi^{n-1}>
  bool stabilized = false;            // L-scheme fallback engaged
  bool tau_halved = false;
};

struct Trajectory {
  std::vector<State> states;  // indices 0..N
  std::vector<StepDiagnostics> steps;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int step, int iters, double mech_res, double flow_res);
  int step;
  int iters;
  double mech_res;
  double flow_res;
};

/// Time-slab average of a scalar function of time by composite trapezoid;
/// exact for affine integrands regardless of the panel count.
double average_source(const std::function<double(double)>& f, double t_begin,
                      double t_end, int panels = 8);

/// Implicit Euler stepping of the coupled quadratic-displacement /
/// cell-pressure system with a monolithic Newton solve per step.
class TransientSolver {
 public:
  explicit TransientSolver(const ProblemSpec& problem);

  const ProblemSpec& problem() const { return *problem_; }
  const DisplacementSpace& space() const { return space_; }
  const KirchhoffLaws& laws() const { return laws_; }
  const Eigen::SparseMatrix<double>& elastic_matrix() const { return A_; }
  const Eigen::SparseMatrix<double>& coupling_matrix() const { return B_; }
  const Eigen::SparseMatrix<double>& flow_matrix() const { return L_; }
  const CellField& kappa() const { return kappa_; }

  /// Energy norm a(u,u)^(1/2) of a full nodal vector.
  double energy_norm(const Eigen::VectorXd& u_full) const;

  /// Riesz dual norm of a free-dof load against the elastic operator.
  double mech_dual_norm(const Eigen::VectorXd& free_load) const;

  /// Compatibility initial data: cell averages of chi0, displacement from the
  /// elastic solve against the initial pore pressure and loads at t = 0.
  State initial_state() const;

  /// Algebraic residuals of the coupled step equations for a candidate state;
  /// mechanics over free dofs, flow over cells.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> residual_vectors(
      const State& prev, const State& candidate, int n) const;
  std::pair<double, double> step_residual(const State& prev,
                                          const State& candidate, int n) const;

  /// One implicit Euler step prev -> n. Throws NonConvergence.
  State advance(const State& prev, int n, StepDiagnostics* diag = nullptr,
                const State* initial_guess = nullptr) const;

  Trajectory run() const;

  /// Slab-averaged loads for step n (test hook; n in 1..steps).
  Eigen::VectorXd mech_load(int n) const;
  CellField flow_load(int n) const;  // includes tau and boundary influx

 private:
  struct NewtonResult {
    State state;
    StepDiagnostics diag;
    bool converged;
  };
  NewtonResult newton_solve(const State& prev, int n, bool stabilized,
                            const State* guess) const;
  Eigen::VectorXd mech_load_at(double t) const;  // instantaneous (t = 0 data)

  const ProblemSpec* problem_;
  DisplacementSpace space_;
  KirchhoffLaws laws_;
  CellField kappa_;
  Eigen::SparseMatrix<double> A_;  // elastic, free dofs
  Eigen::SparseMatrix<double> B_;  // divergence coupling, cells x free
  Eigen::SparseMatrix<double> L_;  // weighted two-point flux operator
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> A_solver_;
};

}  // namespace uporo
