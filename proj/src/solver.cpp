#include "uporo/solver.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <sstream>

namespace uporo {

void ProblemSpec::validate() const {
  material.validate(mesh.dim());
  reg.validate();
  if (time.steps < 0) throw std::invalid_argument("problem: steps must be >= 0");
  if (!(time.t_end > 0.0) && time.steps > 0)
    throw std::invalid_argument("problem: t_end must be > 0");
  bool has_flow_dirichlet = false;
  for (const Face& f : mesh.faces())
    if (f.boundary && f.flow_bc == FlowBc::dirichlet) has_flow_dirichlet = true;
  if (!has_flow_dirichlet)
    throw std::invalid_argument(
        "problem: flow boundary needs at least one Dirichlet face");
  bool has_mech_dirichlet = false;
  for (const Face& f : mesh.faces())
    if (f.boundary && f.mech_bc != MechBc::neumann) has_mech_dirichlet = true;
  if (!has_mech_dirichlet)
    throw std::invalid_argument(
        "problem: mechanics boundary needs a constrained part");
  if (monitors_enabled && time.steps > 0 && !(time.tau() < 0.125))
    throw std::invalid_argument(
        "problem: stability monitors require tau < 1/8");
  if (kappa_cells.size() != 0) {
    if (kappa_cells.size() != mesh.cell_count())
      throw std::invalid_argument("problem: kappa field length mismatch");
    for (int k = 0; k < kappa_cells.size(); ++k)
      if (kappa_cells[k] < material.kappa_lower() - 1e-14 * material.kappa_lower() ||
          kappa_cells[k] > material.kappa_upper() + 1e-14 * material.kappa_upper())
        throw std::invalid_argument(
            "problem: kappa value outside declared bounds");
  }
}

CellField ProblemSpec::kappa_or_default() const {
  if (kappa_cells.size() != 0) return kappa_cells;
  return CellField::Constant(mesh.cell_count(), material.kappa_abs);
}

NonConvergence::NonConvergence(int step_, int iters_, double mech,
                               double flow)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "nonlinear step " << step_ << " did not converge after "
           << iters_ << " iterations (mech residual " << mech
           << ", flow residual " << flow << ")";
        return os.str();
      }()),
      step(step_),
      iters(iters_),
      mech_res(mech),
      flow_res(flow) {}

double average_source(const std::function<double(double)>& f, double t_begin,
                      double t_end, int panels) {
  if (t_end <= t_begin) return f(t_begin);
  const double h = (t_end - t_begin) / panels;
  double acc = 0.5 * (f(t_begin) + f(t_end));
  for (int i = 1; i < panels; ++i) acc += f(t_begin + i * h);
  return acc / panels;
}

TransientSolver::TransientSolver(const ProblemSpec& problem)
    : problem_(&problem),
      space_(problem.mesh),
      laws_(problem.retention, problem.material, problem.reg.eta,
            problem.opts.use_law_table
                ? std::optional<LawTableSpec>(problem.opts.table)
                : std::nullopt),
      kappa_(problem.kappa_or_default()) {
  problem.validate();
  A_ = assemble_elastic(space_, problem.material.mu, problem.material.lambda);
  B_ = assemble_div_coupling(space_);
  L_ = tpfa_matrix(problem.mesh, kappa_);
  A_solver_.compute(A_);
  if (A_solver_.info() != Eigen::Success)
    throw std::runtime_error(
        "solver: elastic operator is singular (bad boundary partition)");
}

double TransientSolver::energy_norm(const Eigen::VectorXd& u_full) const {
  const Eigen::VectorXd uf = space_.restrict_to_free(u_full);
  return std::sqrt(std::max(0.0, uf.dot(A_ * uf)));
}

double TransientSolver::mech_dual_norm(const Eigen::VectorXd& free_load) const {
  return dual_norm(A_solver_, free_load);
}

Eigen::VectorXd TransientSolver::mech_load_at(double t) const {
  const Sources& src = problem_->sources;
  Eigen::VectorXd load = assemble_body_load(
      space_, [&](double x, double y) { return src.body_at(x, y, t); });
  load += assemble_traction_load(space_, [&](Side s, double x, double y) {
    return src.traction_at(s, x, y, t);
  });
  return load;
}

Eigen::VectorXd TransientSolver::mech_load(int n) const {
  const double tau = problem_->time.tau();
  const double t0 = (n - 1) * tau, t1 = n * tau;
  const int m = problem_->opts.source_time_samples;
  const Sources& src = problem_->sources;
  Eigen::VectorXd load = assemble_body_load(space_, [&](double x, double y) {
    return Vec2{average_source([&](double t) { return src.body_at(x, y, t)[0]; },
                               t0, t1, m),
                average_source([&](double t) { return src.body_at(x, y, t)[1]; },
                               t0, t1, m)};
  });
  load += assemble_traction_load(space_, [&](Side s, double x, double y) {
    return Vec2{
        average_source([&](double t) { return src.traction_at(s, x, y, t)[0]; },
                       t0, t1, m),
        average_source([&](double t) { return src.traction_at(s, x, y, t)[1]; },
                       t0, t1, m)};
  });
  return load;
}

CellField TransientSolver::flow_load(int n) const {
  const Mesh& mesh = problem_->mesh;
  const double tau = problem_->time.tau();
  const double t0 = (n - 1) * tau, t1 = n * tau;
  const int m = problem_->opts.source_time_samples;
  const Sources& src = problem_->sources;
  CellField rhs = CellField::Zero(mesh.cell_count());
  for (int k = 0; k < mesh.cell_count(); ++k) {
    const auto& c = mesh.cell(k);
    rhs[k] = c.measure * average_source(
                             [&](double t) {
                               return src.fluid_at(c.center[0], c.center[1], t);
                             },
                             t0, t1, m);
  }
  // The boundary datum is the prescribed outward Darcy flux
  // (-kappa grad chi . n), so it enters the cell balance as a sink.
  for (const Face& f : mesh.faces()) {
    if (!f.boundary || f.flow_bc != FlowBc::neumann) continue;
    rhs[f.cell_in] -=
        f.measure * average_source(
                        [&](double t) {
                          return src.influx_at(f.side, f.center[0], f.center[1], t);
                        },
                        t0, t1, m);
  }
  return tau * rhs;
}

State TransientSolver::initial_state() const {
  const Mesh& mesh = problem_->mesh;
  State s;
  s.step = 0;
  s.time = 0.0;
  s.chi = CellField::Zero(mesh.cell_count());
  if (problem_->chi0) {
    // Cell averages by a 3x3 tensor Gauss rule.
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int k = 0; k < mesh.cell_count(); ++k) {
      const int i = k % mesh.nx(), j = k / mesh.nx();
      const double x0 = mesh.x_lines()[i], x1 = mesh.x_lines()[i + 1];
      const double y0 = mesh.y_lines()[j], y1 = mesh.y_lines()[j + 1];
      double acc = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx[a];
          const double y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * gx[b];
          acc += gw[a] * gw[b] * problem_->chi0(x, y);
        }
      s.chi[k] = 0.25 * acc;  // weights sum to 4 on the reference square
    }
  }
  for (int k = 0; k < mesh.cell_count(); ++k)
    if (s.chi[k] <= laws_.chi_infimum())
      throw std::invalid_argument(
          "initial data: chi0 below the range of the pressure transform");
  // Mechanics compatible with the initial pore pressure and loads at t = 0.
  CellField pore(mesh.cell_count());
  for (int k = 0; k < mesh.cell_count(); ++k)
    pore[k] = laws_.pore_pressure(s.chi[k]);
  const Eigen::VectorXd rhs =
      mech_load_at(0.0) + problem_->material.alpha_biot * (B_.transpose() * pore);
  const Eigen::VectorXd uf = A_solver_.solve(rhs);
  if (A_solver_.info() != Eigen::Success)
    throw std::runtime_error("solver: initial elastic solve failed");
  s.u = space_.expand(uf);
  return s;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> TransientSolver::residual_vectors(
    const State& prev, const State& candidate, int n) const {
  const Mesh& mesh = problem_->mesh;
  const MaterialParams& mat = problem_->material;
  const double tau = problem_->time.tau();
  const double zeta = problem_->reg.zeta;

  const Eigen::VectorXd uf = space_.restrict_to_free(candidate.u);
  const Eigen::VectorXd uf_prev = space_.restrict_to_free(prev.u);
  const Eigen::VectorXd du = uf - uf_prev;

  CellField pore(mesh.cell_count()), sat(mesh.cell_count()),
      dstor(mesh.cell_count());
  for (int k = 0; k < mesh.cell_count(); ++k) {
    pore[k] = laws_.pore_pressure(candidate.chi[k]);
    sat[k] = laws_.saturation(candidate.chi[k]);
    dstor[k] = laws_.storage(candidate.chi[k]) - laws_.storage(prev.chi[k]);
  }

  Eigen::VectorXd mech = (zeta / tau) * (A_ * du) + A_ * uf -
                         mat.alpha_biot * (B_.transpose() * pore) -
                         mech_load(n);

  const Eigen::VectorXd div_du = B_ * du;
  CellField flow(mesh.cell_count());
  for (int k = 0; k < mesh.cell_count(); ++k)
    flow[k] = mesh.cell(k).measure * dstor[k] +
              mat.alpha_biot * sat[k] * div_du[k];
  flow += tau * (L_ * candidate.chi) - flow_load(n);
  return {std::move(mech), std::move(flow)};
}

std::pair<double, double> TransientSolver::step_residual(
    const State& prev, const State& candidate, int n) const {
  auto [mech, flow] = residual_vectors(prev, candidate, n);
  return {mech.norm(), flow.norm()};
}

TransientSolver::NewtonResult TransientSolver::newton_solve(
    const State& prev, int n, bool stabilized, const State* guess) const {
  const Mesh& mesh = problem_->mesh;
  const MaterialParams& mat = problem_->material;
  const SolverOptions& opts = problem_->opts;
  const double tau = problem_->time.tau();
  const double zeta = problem_->reg.zeta;
  const int nf = space_.free_count();
  const int nc = mesh.cell_count();

  State cand = guess ? *guess : prev;
  cand.step = n;
  cand.time = n * tau;

  const Eigen::VectorXd load = mech_load(n);
  const CellField frhs = flow_load(n);
  const Eigen::VectorXd uf_prev = space_.restrict_to_free(prev.u);

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool pattern_ready = false;

  double r0_mech = -1.0, r0_flow = -1.0;
  double last_norm = std::numeric_limits<double>::infinity();
  int rising = 0;
  double damping = 1.0;

  NewtonResult out;
  out.converged = false;
  out.diag.stabilized = stabilized;

  for (int it = 0; it <= opts.max_iters; ++it) {
    Eigen::VectorXd uf = space_.restrict_to_free(cand.u);
    const Eigen::VectorXd du = uf - uf_prev;

    CellField pore(nc), pore_slope(nc), sat(nc), sat_slope(nc), dstor(nc),
        stor_slope(nc);
    for (int k = 0; k < nc; ++k) {
      const double chi = cand.chi[k];
      pore[k] = laws_.pore_pressure(chi);
      pore_slope[k] = laws_.pore_pressure_slope(chi);
      sat[k] = laws_.saturation(chi);
      sat_slope[k] = laws_.saturation_slope(chi);
      stor_slope[k] = laws_.storage_slope(chi);
      dstor[k] = laws_.storage(chi) - laws_.storage(prev.chi[k]);
    }

    Eigen::VectorXd mech = (zeta / tau) * (A_ * du) + A_ * uf -
                           mat.alpha_biot * (B_.transpose() * pore) - load;
    const Eigen::VectorXd div_du = B_ * du;
    CellField flow(nc);
    for (int k = 0; k < nc; ++k)
      flow[k] = mesh.cell(k).measure * dstor[k] +
                mat.alpha_biot * sat[k] * div_du[k];
    flow += tau * (L_ * cand.chi) - frhs;

    const double mech_norm = mech.norm();
    const double flow_norm = flow.norm();
    if (!std::isfinite(mech_norm) || !std::isfinite(flow_norm)) break;
    if (r0_mech < 0) {
      r0_mech = mech_norm;
      r0_flow = flow_norm;
    }
    out.diag.newton_iters = it;
    out.diag.mech_residual = mech_norm;
    out.diag.flow_residual = flow_norm;
    const bool mech_ok =
        mech_norm <= std::max(opts.tol_abs, opts.tol_rel * r0_mech);
    const bool flow_ok =
        flow_norm <= std::max(opts.tol_abs, opts.tol_rel * r0_flow);
    if (mech_ok && flow_ok) {
      out.converged = true;
      break;
    }
    if (it == opts.max_iters) break;

    const double norm = mech_norm + flow_norm;
    if (norm > last_norm * (1.0 + 1e-12)) {
      if (++rising >= 2) damping = 0.5;  // after two consecutive increases
      if (rising >= 4 && !stabilized) break;  // hand over to the L-scheme pass
    } else {
      rising = 0;
    }
    last_norm = norm;

    // Diagonal stabilization constant for the fallback pass.
    double lcap = 0.0;
    if (stabilized)
      for (int k = 0; k < nc; ++k) lcap = std::max(lcap, stor_slope[k]);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A_.nonZeros() + 2 * B_.nonZeros() + L_.nonZeros() + nc);
    const double mech_scale = 1.0 + zeta / tau;
    for (int col = 0; col < A_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator a(A_, col); a; ++a)
        trip.emplace_back(int(a.row()), int(a.col()), mech_scale * a.value());
    for (int col = 0; col < B_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator b(B_, col); b; ++b) {
        const int K = int(b.row()), j = int(b.col());
        // d mech_j / d chi_K and d flow_K / d u_j
        trip.emplace_back(j, nf + K,
                          -mat.alpha_biot * pore_slope[K] * b.value());
        trip.emplace_back(nf + K, j, mat.alpha_biot * sat[K] * b.value());
      }
    for (int col = 0; col < L_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator l(L_, col); l; ++l)
        trip.emplace_back(nf + int(l.row()), nf + int(l.col()),
                          tau * l.value());
    for (int k = 0; k < nc; ++k) {
      double diag = mesh.cell(k).measure * stor_slope[k] +
                    mat.alpha_biot * sat_slope[k] * div_du[k];
      if (stabilized)
        diag = mesh.cell(k).measure * std::max(stor_slope[k], lcap) +
               std::max(0.0, mat.alpha_biot * sat_slope[k] * div_du[k]);
      trip.emplace_back(nf + k, nf + k, diag);
    }
    Eigen::SparseMatrix<double> J(nf + nc, nf + nc);
    J.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd rhs(nf + nc);
    rhs.head(nf) = -mech;
    rhs.tail(nc) = -flow;

    if (!pattern_ready) {
      lu.analyzePattern(J);
      pattern_ready = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success) break;

    uf += damping * delta.head(nf);
    cand.u = space_.expand(uf);
    cand.chi += damping * delta.tail(nc);
    // Iterates must stay inside the range of the pressure transform; the
    // laws are undefined below its infimum. Projection only touches
    // intermediate iterates, accepted states still have to pass the
    // residual check.
    const double floor = laws_.chi_floor();
    for (int k = 0; k < nc; ++k)
      if (cand.chi[k] < floor) cand.chi[k] = floor;
  }

  // Monotone storage update indicator for the accepted candidate.
  double mono = 0.0;
  for (int k = 0; k < nc; ++k)
    mono += mesh.cell(k).measure *
            (laws_.storage(cand.chi[k]) - laws_.storage(prev.chi[k])) *
            (cand.chi[k] - prev.chi[k]);
  out.diag.storage_monotonicity = mono;
  out.state = std::move(cand);
  return out;
}

State TransientSolver::advance(const State& prev, int n, StepDiagnostics* diag,
                               const State* initial_guess) const {
  NewtonResult res = newton_solve(prev, n, false, initial_guess);
  if (!res.converged) {
    res = newton_solve(prev, n, true, initial_guess);  // L-scheme fallback
  }
  if (!res.converged && problem_->opts.retry_with_halved_tau) {
    // One recursive bisection of the step: solve two half steps on a
    // temporary problem with doubled resolution in time.
    ProblemSpec half = *problem_;
    half.time.steps = 2 * problem_->time.steps;
    half.opts.retry_with_halved_tau = false;
    TransientSolver hs(half);
    StepDiagnostics d1, d2;
    State mid = hs.advance(prev, 2 * n - 1, &d1);
    State end = hs.advance(mid, 2 * n, &d2);
    end.step = n;
    end.time = n * problem_->time.tau();
    d2.tau_halved = true;
    if (diag) *diag = d2;
    return end;
  }
  if (!res.converged)
    throw NonConvergence(n, res.diag.newton_iters, res.diag.mech_residual,
                         res.diag.flow_residual);
  if (diag) *diag = res.diag;
  return std::move(res.state);
}

Trajectory TransientSolver::run() const {
  Trajectory traj;
  traj.states.push_back(initial_state());
  for (int n = 1; n <= problem_->time.steps; ++n) {
    StepDiagnostics d;
    traj.states.push_back(advance(traj.states.back(), n, &d));
    traj.steps.push_back(d);
  }
  return traj;
}

}  // namespace uporo
