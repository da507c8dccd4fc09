#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "uporo/conditions.hpp"

using namespace uporo;

namespace {

// Reference values for the minimal-saturation criterion, solved at 40-digit
// precision with an independent bisection (frozen).
struct Entry {
  double alpha_vg, n_vg, k_dr, s_min;
};
constexpr Entry kReference[] = {
    {0.1, 1.5, 1e5, 0.26307096},   {0.1, 1.5, 1e8, 0.10481082},
    {0.1, 1.5, 1e11, 0.041727939}, {2.0, 1.5, 1e5, 0.17654326},
    {2.0, 1.5, 1e8, 0.070299294},  {2.0, 1.5, 1e11, 0.027987058},
    {0.1, 2.0, 1e5, 0.077426321},  {0.1, 2.0, 1e8, 0.016681005},
    {0.1, 2.0, 1e11, 0.0035938137},{2.0, 2.0, 1e5, 0.03978974},
    {2.0, 2.0, 1e8, 0.0085724398}, {2.0, 2.0, 1e11, 0.0018468762},
    {0.1, 2.5, 1e5, 0.029918647},  {0.1, 2.5, 1e8, 0.0041565228},
    {0.1, 2.5, 1e11, 0.00057754356},{2.0, 2.5, 1e5, 0.01271056},
    {2.0, 2.5, 1e8, 0.0017660593}, {2.0, 2.5, 1e11, 0.0002453928}};

}  // namespace

TEST_CASE("minimal saturation against the high-precision oracle") {
  for (const Entry& e : kReference) {
    VanGenuchtenModel vg(e.alpha_vg, e.n_vg);
    const double smin = nd3_smin(vg, e.k_dr, 0.1, 1.0);
    CHECK(smin == doctest::Approx(e.s_min).epsilon(2e-5));
  }
}

TEST_CASE("criterion function increases toward saturation") {
  for (double a : {0.1, 2.0})
    for (double n : {1.5, 2.0, 2.5}) {
      VanGenuchtenModel vg(a, n);
      // Log-spaced capillary pressures from dry to wet.
      double prev = -1.0;
      for (int i = 0; i <= 400; ++i) {
        const double p = -std::pow(10.0, 5.0 - 10.0 * i / 400.0) / a;
        const double g = nd3_criterion(vg, p);
        if (i > 0) CHECK(g >= prev * (1.0 - 1e-9));
        prev = g;
      }
    }
}

TEST_CASE("minimal saturation is non-increasing in stiffness") {
  for (double a : {0.1, 2.0})
    for (double n : {1.5, 2.0, 2.5}) {
      VanGenuchtenModel vg(a, n);
      double prev = 1.0;
      for (double kdr : {1e5, 1e8, 1e11}) {
        const double smin = nd3_smin(vg, kdr, 0.1, 1.0);
        CHECK(smin <= prev + 1e-12);
        prev = smin;
      }
    }
}

TEST_CASE("no-root flag when the criterion holds everywhere") {
  VanGenuchtenModel vg(1.0, 2.0);
  bool no_root = false;
  const double smin = nd3_smin(vg, 1e5, 0.1, /*alpha_biot=*/0.0, {}, &no_root);
  CHECK(no_root);
  CHECK(smin == doctest::Approx(1e-12));
}

TEST_CASE("nd1 bound") {
  VanGenuchtenModel vg(1.0, 2.0);
  SUBCASE("saturated limit") {
    // With the floor almost at full saturation the ratio degenerates to 1
    // (the deviation of kappa_rel from 1 scales like sqrt(1 - s)).
    const double bound = nd1_bound(vg, 1.0 - 1e-8);
    CHECK(bound == doctest::Approx(1.05).epsilon(1e-3));
  }
  SUBCASE("refined-grid oracle at 10x resolution") {
    GridBoundOptions opt;
    const double bound = nd1_bound(vg, 0.3, opt);
    GridBoundOptions fine = opt;
    fine.initial_points = 10 * opt.initial_points;
    const double oracle = nd1_bound(vg, 0.3, fine);
    CHECK(bound == doctest::Approx(oracle).epsilon(0.01));
    CHECK(bound >= 1.05 * (1.0 - 1e-12));
  }
}

TEST_CASE("nd2 bounds") {
  VanGenuchtenModel vg(2.0, 2.5);
  SUBCASE("saturated grid degenerates to (1,1)") {
    const auto [lo, hi] = nd2_bounds(vg, 0.9999);
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(hi == doctest::Approx(1.0 / vg.rel_perm(0.9999)).epsilon(1e-2));
  }
  SUBCASE("bounds bracket the endpoint value") {
    const auto [lo, hi] = nd2_bounds(vg, 0.99);
    CHECK(lo >= 1.0 - 1e-12);
    CHECK(hi <= 1.0 / vg.rel_perm(0.99) * (1.0 + 1e-6));
    CHECK(hi >= 0.99 / vg.rel_perm(0.99) * (1.0 - 1e-6));
  }
  SUBCASE("refined-grid oracle") {
    GridBoundOptions opt;
    const auto [lo, hi] = nd2_bounds(vg, 0.5, opt);
    GridBoundOptions fine = opt;
    fine.initial_points = 10 * opt.initial_points;
    const auto [lo2, hi2] = nd2_bounds(vg, 0.5, fine);
    CHECK(lo == doctest::Approx(lo2).epsilon(0.01));
    CHECK(hi == doctest::Approx(hi2).epsilon(0.01));
  }
}

TEST_CASE("aggregated report") {
  MaterialParams mat;
  mat.mu = 0.375e5;       // K_dr = 2 mu / 2 + lambda = 1e5
  mat.lambda = 0.625e5;
  mat.alpha_biot = 1.0;
  mat.phi0 = 0.1;
  mat.kappa_abs = 1.0;
  SUBCASE("incompressible table row") {
    VanGenuchtenModel vg(0.1, 1.5);
    const ConditionReport rep = check_report(mat, vg, 0.0, 0.3);
    CHECK(rep.nd3_smin == doctest::Approx(0.26307096).epsilon(1e-4));
    CHECK(rep.a1star_constant == 0.0);
    CHECK(rep.s_floor == 0.3);
    CHECK(rep.nd2_lower > 0.0);
    CHECK(std::isfinite(rep.nd2_upper));
  }
  SUBCASE("compressible growth constant is the closed formula") {
    mat.c_w = 1e-9;
    mat.inv_n = 1e-10;
    VanGenuchtenModel vg(0.1, 1.5);
    const ConditionReport rep = check_report(mat, vg, 1e-8, 0.3);
    CHECK(rep.a1star_constant ==
          doctest::Approx(0.1 * 1e-9 + 1e-10 + 1e-8).epsilon(1e-14));
  }
}

TEST_CASE("survey covers the standard grid") {
  const auto rows = smin_table(0.1, 1.0);
  CHECK(rows.size() == 18);
  for (const Entry& e : kReference) {
    bool found = false;
    for (const auto& r : rows)
      if (r.alpha_vg == e.alpha_vg && r.n_vg == e.n_vg && r.k_dr == e.k_dr) {
        CHECK(r.s_min == doctest::Approx(e.s_min).epsilon(2e-5));
        found = true;
      }
    CHECK(found);
  }
}
