#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "gradient_check.hpp"
#include "sicae/error.hpp"
#include "sicae/oc_solver.hpp"

using namespace sicae;

TEST_CASE("pointwise minimizer") {
  const OcConfig cfg;
  CHECK(oc_pointwise_control(10000.0, {}, cfg, 0.0) == 0.0);
  // dH/du = 2 w2 u + (lE - lS) S vanishes at u = (lS - lE) S / (2 w2).
  const Compartments lam{1e-4, 0, 0, 0, 0};
  CHECK(oc_pointwise_control(1000.0, lam, cfg, 0.0) == doctest::Approx(0.05));
  CHECK(oc_pointwise_control(1e6, lam, cfg, 0.0) == 1.0);
  CHECK(oc_pointwise_control(1000.0, {-1e-4, 0, 0, 0, 0}, cfg, 0.0) == 0.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((OcConfig{.w1 = 0.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((OcConfig{.relaxation = 0.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((OcConfig{.relaxation = 1.5}).validate(), InvalidInput);
  CHECK_THROWS_AS((OcConfig{.sweep_tol = 0.0}).validate(), InvalidInput);
  ModelParams p;
  p.instantaneous_population = true;
  CHECK_THROWS_AS(solve_ocp(p, reference_initial_state(), OcConfig{}), InvalidInput);
}

TEST_CASE("vanishing infection weight leaves the control at zero") {
  const OcConfig cfg{.w1 = 1e-12, .w2 = 1.0, .t_f = 25.0};
  const OcResult res = solve_ocp(ModelParams{}, reference_initial_state(), cfg, {.step_h = 0.1, .t_final = 25.0});
  const auto& u = res.trajectory.u;
  CHECK(*std::max_element(u.begin(), u.end()) < 1e-6);
}

TEST_CASE("adjoint gradient matches finite differences") {
  const IntegrationConfig grid{.step_h = 0.05, .t_final = 25.0};
  std::vector<double> u, dir;
  gradcheck::probe(grid, u, dir);
  SUBCASE("unconstrained") {
    const auto chk = gradcheck::directional(u, dir, OcConfig{}, 0.0, grid);
    CAPTURE(chk.finite_difference);
    CAPTURE(chk.adjoint);
    CHECK(chk.relative_error() < 1e-3);
  }
  SUBCASE("with an active penalty") {
    const OcConfig cfg{.gamma_max = 2000.0};
    const auto chk = gradcheck::directional(u, dir, cfg, 1e-4, grid);
    CAPTURE(chk.finite_difference);
    CAPTURE(chk.adjoint);
    CHECK(chk.relative_error() < 1e-3);
  }
}

TEST_CASE("constrained solve: feasibility and per-stage descent") {
  const OcConfig cfg{.gamma_max = 2000.0};
  const IntegrationConfig grid{.step_h = 0.05, .t_final = 25.0};
  const OcResult res = solve_ocp(ModelParams{}, reference_initial_state(), cfg, grid);
  const Trajectory& tr = res.trajectory;
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(tr.u[k] >= 0.0);
    CHECK(tr.u[k] <= 1.0);
    worst = std::max(worst, tr.S_times_u(k));
  }
  CHECK(worst <= 2000.0 + 1e-9);  // projected, so tighter than the penalty stop rule
  REQUIRE(res.stage_begin.size() == res.stages.size());
  for (std::size_t s = 0; s < res.stage_begin.size(); ++s) {
    const std::size_t end = s + 1 < res.stage_begin.size() ? res.stage_begin[s + 1] : res.J_history.size();
    for (std::size_t i = res.stage_begin[s] + 1; i < end; ++i) {
      CHECK(res.J_history[i] <= res.J_history[i - 1] * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("projection only lowers nodes where the bound is active") {
  const IntegrationConfig grid{.step_h = 0.1, .t_final = 25.0};
  const std::size_t n = grid.steps() + 1;
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = k < n / 2 ? 0.6 : 0.05;
  const auto v = oc_project_feasible(ModelParams{}, reference_initial_state(), u, grid, 2000.0);
  const Trajectory tr = oc_forward(ModelParams{}, reference_initial_state(), v, grid);
  int lowered = 0;
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(v[k] <= u[k]);
    CHECK(tr.S_times_u(k) <= 2000.0 + 1e-9);
    if (v[k] < u[k]) {
      ++lowered;
      CHECK(tr.S_times_u(k) == doctest::Approx(2000.0).epsilon(1e-9));
    }
  }
  CHECK(lowered > 0);
  CHECK(v.back() == u.back());
}

TEST_CASE("iteration cap raises a diagnostic") {
  const OcConfig cfg{.gamma_max = 2000.0, .max_iter = 2};
  try {
    solve_ocp(ModelParams{}, reference_initial_state(), cfg, {.step_h = 0.1, .t_final = 25.0});
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.last_cost()));
    CHECK(e.constraint_violation() >= 0.0);
  }
}
