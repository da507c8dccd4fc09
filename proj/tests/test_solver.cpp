#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SparseLU>
#include <cmath>
#include <random>

#include "uporo/solver.hpp"

using namespace uporo;

namespace {

BoundaryConditions column_bc() {
  BoundaryConditions bc;
  bc.flow = {FlowBc::neumann, FlowBc::neumann, FlowBc::neumann,
             FlowBc::dirichlet};
  bc.mech = {MechBc::roller, MechBc::roller, MechBc::roller, MechBc::neumann};
  return bc;
}

MaterialParams stiff_material() {
  MaterialParams mat;
  mat.mu = 1e5;
  mat.lambda = 1e5;
  mat.alpha_biot = 1.0;
  mat.c_w = 1e-6;
  mat.inv_n = 1e-7;
  mat.phi0 = 0.1;
  mat.kappa_abs = 1e-2;
  return mat;
}

/// Unsaturated redistribution problem on a small square.
ProblemSpec drainage_problem(double zeta = 0.0, double eta = 1e-3,
                             int n = 4, int steps = 5) {
  ProblemSpec prob;
  prob.mesh = Mesh::rectangular(n, n, 1.0, 1.0, column_bc());
  prob.retention = VanGenuchtenModel(0.5, 2.0);
  prob.material = stiff_material();
  prob.material.c_w = 0.0;
  prob.material.inv_n = 0.0;
  prob.reg = {zeta, eta};
  prob.time = {0.05, steps};
  prob.sources.traction = [](Side s, double, double, double) {
    return s == Side::top ? Vec2{0.0, -1e3} : Vec2{0.0, 0.0};
  };
  prob.chi0 = [](double, double y) { return -0.5 * (1.0 - y); };
  return prob;
}

/// Saturated column under a step load; stays on the linear branch.
ProblemSpec saturated_problem(double zeta = 0.0, int cells = 8, int steps = 5) {
  ProblemSpec prob;
  prob.mesh = Mesh::rectangular(1, cells, 0.125, 1.0, column_bc());
  prob.retention = VanGenuchtenModel(0.5, 2.0);
  prob.material = stiff_material();
  prob.reg = {zeta, 0.0};
  prob.time = {0.02, steps};
  prob.sources.traction = [](Side s, double, double, double) {
    return s == Side::top ? Vec2{0.0, -1e3} : Vec2{0.0, 0.0};
  };
  prob.chi0 = [](double, double) { return 900.0; };
  return prob;
}

}  // namespace

TEST_CASE("problem validation") {
  ProblemSpec prob = drainage_problem();
  CHECK_NOTHROW(prob.validate());
  SUBCASE("flow Dirichlet part required") {
    BoundaryConditions bc = column_bc();
    bc.flow[int(Side::top)] = FlowBc::neumann;
    prob.mesh = Mesh::rectangular(4, 4, 1, 1, bc);
    CHECK_THROWS_AS(prob.validate(), std::invalid_argument);
  }
  SUBCASE("monitors enforce the step bound") {
    prob.monitors_enabled = true;
    prob.time = {2.0, 4};  // tau = 1/2
    CHECK_THROWS_AS(prob.validate(), std::invalid_argument);
    prob.time = {2.0, 64};
    CHECK_NOTHROW(prob.validate());
  }
  SUBCASE("kappa field bounds") {
    prob.kappa_cells = CellField::Constant(16, 5.0);
    CHECK_THROWS_AS(prob.validate(), std::invalid_argument);
    prob.material.kappa_min = 1.0;
    prob.material.kappa_max = 10.0;
    CHECK_NOTHROW(prob.validate());
  }
}

TEST_CASE("slab averages") {
  CHECK(average_source([](double) { return 3.5; }, 0.0, 0.25) ==
        doctest::Approx(3.5));
  CHECK(average_source([](double t) { return t; }, 0.0, 0.25) ==
        doctest::Approx(0.125).epsilon(1e-14));
  // Richardson extrapolation oracle for a sinusoid; the default panel count
  // carries the usual second-order trapezoid error.
  auto f = [](double t) { return std::sin(3.0 * t); };
  const double coarse = average_source(f, 0.2, 0.7, 64);
  const double fine = average_source(f, 0.2, 0.7, 128);
  const double oracle = fine + (fine - coarse) / 3.0;
  const double h = 0.5 / 8;
  const double trapezoid_bound = h * h / 12.0 * 9.0 * 1.1;
  CHECK(std::abs(average_source(f, 0.2, 0.7, 8) - oracle) <= trapezoid_bound);
  CHECK(fine == doctest::Approx((std::cos(0.6) - std::cos(2.1)) / 3.0 / 0.5)
                    .epsilon(1e-4));
}

TEST_CASE("initial state") {
  SUBCASE("zero data gives the zero state") {
    ProblemSpec prob = drainage_problem();
    prob.sources = {};
    prob.chi0 = nullptr;
    TransientSolver solver(prob);
    const State s = solver.initial_state();
    CHECK(s.u.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(s.chi.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hydrostatic prestress balances a matching boundary traction") {
    // With saturated chi0 = c and traction -alpha c n on the free sides, the
    // total stress is uniform and the displacement vanishes.
    ProblemSpec prob;
    BoundaryConditions bc;
    bc.flow = {FlowBc::dirichlet, FlowBc::neumann, FlowBc::neumann,
               FlowBc::neumann};
    bc.mech = {MechBc::fixed, MechBc::neumann, MechBc::neumann,
               MechBc::neumann};
    prob.mesh = Mesh::rectangular(4, 4, 1, 1, bc);
    prob.retention = VanGenuchtenModel(0.5, 2.0);
    prob.material = stiff_material();
    const double c = 250.0;
    const double a = prob.material.alpha_biot;
    prob.chi0 = [=](double, double) { return c; };
    prob.sources.traction = [=](Side s, double, double, double) -> Vec2 {
      switch (s) {
        case Side::right: return {-a * c, 0.0};
        case Side::top: return {0.0, -a * c};
        case Side::bottom: return {0.0, a * c};
        default: return {0.0, 0.0};
      }
    };
    TransientSolver solver(prob);
    const State s = solver.initial_state();
    CHECK(solver.energy_norm(s.u) <= 1e-9 * c);
  }
  SUBCASE("compatibility residual vanishes for smooth data") {
    ProblemSpec prob = drainage_problem();
    TransientSolver solver(prob);
    const State s0 = solver.initial_state();
    // With zeta = 0 and constant-in-time loads, the mechanics block of the
    // step residual evaluated at the initial state reduces to the
    // compatibility equation.
    auto [mech, flow] = solver.residual_vectors(s0, s0, 1);
    CHECK(mech.norm() <= 1e-10 * std::max(1.0, solver.mech_load(1).norm()));
    (void)flow;
  }
}

TEST_CASE("saturated residuals match a hand-assembled linear system") {
  ProblemSpec prob = saturated_problem(0.3);
  TransientSolver solver(prob);
  const MaterialParams& mat = prob.material;
  const double tau = prob.time.tau();
  const double zeta = prob.reg.zeta;
  const double storage_coeff = mat.c_w * mat.phi0 + mat.inv_n + prob.reg.eta;

  const auto& A = solver.elastic_matrix();
  const auto& B = solver.coupling_matrix();
  const auto& L = solver.flow_matrix();
  const DisplacementSpace& space = solver.space();
  const Mesh& mesh = prob.mesh;

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> chi_dist(100.0, 1000.0);
  std::normal_distribution<double> u_dist(0.0, 1e-3);

  const State prev = solver.initial_state();
  State cand = prev;
  cand.step = 1;
  for (int k = 0; k < mesh.cell_count(); ++k) cand.chi[k] = chi_dist(rng);
  Eigen::VectorXd uf(space.free_count());
  for (int i = 0; i < uf.size(); ++i) uf[i] = u_dist(rng);
  cand.u = space.expand(uf);

  auto [mech, flow] = solver.residual_vectors(prev, cand, 1);

  const Eigen::VectorXd uf_prev = space.restrict_to_free(prev.u);
  const Eigen::VectorXd mech_lin =
      (1.0 + zeta / tau) * (A * uf) - (zeta / tau) * (A * uf_prev) -
      mat.alpha_biot * (B.transpose() * cand.chi) - solver.mech_load(1);
  Eigen::VectorXd flow_lin = tau * (L * cand.chi) - solver.flow_load(1) +
                             mat.alpha_biot * (B * (uf - uf_prev));
  for (int k = 0; k < mesh.cell_count(); ++k)
    flow_lin[k] +=
        mesh.cell(k).measure * storage_coeff * (cand.chi[k] - prev.chi[k]);

  CHECK((mech - mech_lin).norm() <= 1e-9 * std::max(1.0, mech_lin.norm()));
  CHECK((flow - flow_lin).norm() <= 1e-9 * std::max(1.0, flow_lin.norm()));
}

TEST_CASE("decoupled mechanics residual against a standalone solve") {
  ProblemSpec prob = saturated_problem(0.0);
  prob.material.alpha_biot = 0.0;
  TransientSolver solver(prob);
  const DisplacementSpace& space = solver.space();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(
      solver.elastic_matrix());
  const State prev = solver.initial_state();
  State cand = prev;
  cand.step = 1;
  cand.u = space.expand(chol.solve(solver.mech_load(1)));
  auto [mech, flow] = solver.residual_vectors(prev, cand, 1);
  CHECK(mech.norm() <= 1e-10 * std::max(1.0, solver.mech_load(1).norm()));
  (void)flow;
}

TEST_CASE("nonlinear step") {
  SUBCASE("zero data converges immediately") {
    ProblemSpec prob = drainage_problem();
    prob.sources = {};
    prob.chi0 = nullptr;
    TransientSolver solver(prob);
    StepDiagnostics d;
    const State s1 = solver.advance(solver.initial_state(), 1, &d);
    CHECK(d.newton_iters <= 1);
    CHECK(s1.chi.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s1.u.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("saturated regime is linear: at most two iterations") {
    ProblemSpec prob = saturated_problem();
    TransientSolver solver(prob);
    StepDiagnostics d;
    const State s1 = solver.advance(solver.initial_state(), 1, &d);
    CHECK(d.newton_iters <= 2);
    CHECK(s1.chi.minCoeff() > 0.0);  // stayed on the saturated branch
  }
  SUBCASE("drainage step converges and is insensitive to the guess") {
    ProblemSpec prob = drainage_problem();
    TransientSolver solver(prob);
    const State s0 = solver.initial_state();
    StepDiagnostics d;
    const State s1 = solver.advance(s0, 1, &d);
    const auto [rm, rf] = solver.step_residual(s0, s1, 1);
    CHECK(rm <= 1e-6);  // absolute residuals at this load scale
    CHECK(rf <= 1e-6);
    // Perturbed initial guess lands on the same discrete solution.
    State guess = s0;
    std::mt19937 rng(7);
    std::normal_distribution<double> dist(0.0, 1e-3);
    for (int k = 0; k < guess.chi.size(); ++k) guess.chi[k] += dist(rng);
    const State s1b = solver.advance(s0, 1, nullptr, &guess);
    CHECK((s1.chi - s1b.chi).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(solver.energy_norm(s1.u - s1b.u) <=
          1e-8 * (1 + solver.energy_norm(s1.u)));
  }
  SUBCASE("non-convergence is reported with diagnostics") {
    ProblemSpec prob = drainage_problem();
    prob.opts.max_iters = 1;
    prob.opts.tol_abs = 1e-14;
    prob.opts.tol_rel = 0.0;
    TransientSolver solver(prob);
    const State s0 = solver.initial_state();
    CHECK_THROWS_AS(solver.advance(s0, 1), NonConvergence);
    try {
      solver.advance(s0, 1);
    } catch (const NonConvergence& e) {
      CHECK(e.step == 1);
      CHECK(e.iters >= 1);
      CHECK(e.mech_res >= 0.0);
    }
  }
}

TEST_CASE("time loop") {
  SUBCASE("zero steps returns the initial state only") {
    ProblemSpec prob = drainage_problem();
    prob.time.steps = 0;
    TransientSolver solver(prob);
    const Trajectory traj = solver.run();
    CHECK(traj.states.size() == 1);
    CHECK(traj.steps.empty());
  }
  SUBCASE("steady data reproduces the initial state") {
    // Constant load, zero initial pressure, undrained supports: the
    // compatibility state is already the discrete equilibrium.
    ProblemSpec prob = saturated_problem();
    prob.chi0 = nullptr;
    TransientSolver solver(prob);
    const Trajectory traj = solver.run();
    const State& s0 = traj.states.front();
    for (const State& s : traj.states) {
      CHECK((s.chi - s0.chi).cwiseAbs().maxCoeff() <= 1e-7);
      CHECK(solver.energy_norm(s.u - s0.u) <= 1e-7);
    }
  }
  SUBCASE("per-step invariants: mass balance and monotone storage") {
    ProblemSpec prob = drainage_problem(0.0, 1e-3, 4, 6);
    TransientSolver solver(prob);
    const Trajectory traj = solver.run();
    const Mesh& mesh = prob.mesh;
    const KirchhoffLaws& laws = solver.laws();
    const double tau = prob.time.tau();
    for (int n = 1; n <= prob.time.steps; ++n) {
      CHECK(traj.steps[n - 1].storage_monotonicity >= -1e-12);
      // Storage change + coupling balances sources minus boundary outflux.
      const State& s = traj.states[n];
      const State& p = traj.states[n - 1];
      const Eigen::VectorXd du = solver.space().restrict_to_free(s.u - p.u);
      const Eigen::VectorXd div_du = solver.coupling_matrix() * du;
      double lhs = 0.0;
      for (int k = 0; k < mesh.cell_count(); ++k)
        lhs += mesh.cell(k).measure *
                   (laws.storage(s.chi[k]) - laws.storage(p.chi[k])) +
               prob.material.alpha_biot * laws.saturation(s.chi[k]) *
                   div_du[k];
      double rhs = solver.flow_load(n).sum();
      double outflux = 0.0;
      for (int i = 0; i < mesh.face_count(); ++i)
        if (mesh.face(i).boundary)
          outflux += tpfa_flux(mesh, s.chi, solver.kappa(), i);
      rhs -= tau * outflux;
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-8});
      CHECK(std::abs(lhs - rhs) <= 1e-8 * scale);
    }
  }
  SUBCASE("saturated trajectory equals the linear Biot solve") {
    ProblemSpec prob = saturated_problem(0.25, 8, 4);
    TransientSolver solver(prob);
    const Trajectory traj = solver.run();

    // Independent route: monolithic linear system per step.
    const MaterialParams& mat = prob.material;
    const double tau = prob.time.tau();
    const double zeta = prob.reg.zeta;
    const double sc = mat.c_w * mat.phi0 + mat.inv_n + prob.reg.eta;
    const auto& A = solver.elastic_matrix();
    const auto& B = solver.coupling_matrix();
    const auto& L = solver.flow_matrix();
    const DisplacementSpace& space = solver.space();
    const Mesh& mesh = prob.mesh;
    const int nf = space.free_count(), nc = mesh.cell_count();

    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < A.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator a(A, col); a; ++a)
        trip.emplace_back(a.row(), a.col(), (1.0 + zeta / tau) * a.value());
    for (int col = 0; col < B.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator b(B, col); b; ++b) {
        trip.emplace_back(b.col(), nf + b.row(), -mat.alpha_biot * b.value());
        trip.emplace_back(nf + b.row(), b.col(), mat.alpha_biot * b.value());
      }
    for (int col = 0; col < L.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator l(L, col); l; ++l)
        trip.emplace_back(nf + l.row(), nf + l.col(), tau * l.value());
    for (int k = 0; k < nc; ++k)
      trip.emplace_back(nf + k, nf + k, mesh.cell(k).measure * sc);
    Eigen::SparseMatrix<double> K(nf + nc, nf + nc);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(K);
    REQUIRE(lu.info() == Eigen::Success);

    Eigen::VectorXd u = space.restrict_to_free(traj.states[0].u);
    CellField chi = traj.states[0].chi;
    for (int n = 1; n <= prob.time.steps; ++n) {
      Eigen::VectorXd rhs(nf + nc);
      rhs.head(nf) = solver.mech_load(n) + (zeta / tau) * (A * u);
      rhs.tail(nc) = solver.flow_load(n) + mat.alpha_biot * (B * u);
      for (int k = 0; k < nc; ++k)
        rhs[nf + k] += mesh.cell(k).measure * sc * chi[k];
      const Eigen::VectorXd x = lu.solve(rhs);
      u = x.head(nf);
      chi = x.tail(nc);
      CHECK((chi - traj.states[n].chi).cwiseAbs().maxCoeff() <=
            1e-8 * std::max(1.0, chi.cwiseAbs().maxCoeff()));
      CHECK(solver.energy_norm(traj.states[n].u - space.expand(u)) <=
            1e-8 * std::max(1.0, solver.energy_norm(traj.states[n].u)));
    }
  }
  SUBCASE("tiny visco-elastic term changes nothing measurable") {
    ProblemSpec p0 = drainage_problem(0.0, 1e-3, 4, 4);
    ProblemSpec p1 = drainage_problem(1e-12, 1e-3, 4, 4);
    // Tight but above the residual roundoff floor at load scale 1e3.
    p0.opts.tol_abs = 1e-10;
    p0.opts.tol_rel = 1e-12;
    p1.opts.tol_abs = 1e-10;
    p1.opts.tol_rel = 1e-12;
    TransientSolver s0(p0), s1(p1);
    const Trajectory t0 = s0.run(), t1 = s1.run();
    for (std::size_t n = 0; n < t0.states.size(); ++n) {
      CHECK(s0.energy_norm(t0.states[n].u - t1.states[n].u) <= 1e-8);
      CHECK((t0.states[n].chi - t1.states[n].chi).cwiseAbs().maxCoeff() <=
            1e-8);
    }
  }
}
