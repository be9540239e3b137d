#include <algorithm>
#include <cmath>
#include <sstream>

#include <doctest.h>

#include "oracle.hpp"
#include "sicae/error.hpp"
#include "sicae/integrator.hpp"

using namespace sicae;

namespace {

/// Max over samples and compartments of |a - b| / max(|b|, 1).
double max_relative_error(const Trajectory& traj, std::size_t stride, const std::vector<oracle::State>& ref) {
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const auto a = traj.x[k * stride].as_array();
    for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(a[i] - ref[k][i]) / std::max(std::abs(ref[k][i]), 1.0));
  }
  return worst;
}

ControlSource constant(double u) {
  return [u](double, const Compartments&) { return u; };
}

}  // namespace

TEST_CASE("step count and sample times") {
  const IntegrationConfig cfg{.step_h = 0.01, .t_final = 25.0};
  CHECK(cfg.steps() == 2500);
  const Trajectory traj = simulate(reference_initial_state(), constant(0.0), ModelParams{}, cfg);
  CHECK(traj.size() == 2501);
  CHECK(traj.t.front() == 0.0);
  CHECK(traj.t.back() == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(traj.u.size() == traj.size());
}

TEST_CASE("integration config validation") {
  CHECK_THROWS_AS((IntegrationConfig{.step_h = 0.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((IntegrationConfig{.step_h = 30.0, .t_final = 25.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((IntegrationConfig{.step_h = 0.3, .t_final = 25.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((IntegrationConfig{.step_h = 0.01, .t_final = 25.0, .control_decimation = 0}).validate(),
                  InvalidInput);
  CHECK_NOTHROW((IntegrationConfig{.step_h = 1e-3, .t_final = 25.0}).validate());
  CHECK(parse_method("euler") == Method::euler);
  CHECK_THROWS_AS(parse_method("rk45"), InvalidInput);
}

TEST_CASE("population is conserved without control") {
  const Trajectory traj = simulate(reference_initial_state(), constant(0.0), ModelParams{}, IntegrationConfig{});
  for (const auto& x : traj.x) CHECK(std::abs(x.total() - 10200.0) <= 1e-6 * 10200.0);
}

TEST_CASE("rk4 agrees with a fine Euler oracle under u = 0.5") {
  const IntegrationConfig cfg{.step_h = 1e-2, .t_final = 25.0};
  const Trajectory traj = simulate(reference_initial_state(), constant(0.5), ModelParams{}, cfg);
  const auto ref = oracle::euler({10000, 200, 0, 0, 0}, 0.5, 1e-5, 2'500'000, 1000);
  REQUIRE(ref.size() == traj.size());
  CHECK(max_relative_error(traj, 1, ref) < 1e-4);
}

TEST_CASE("rk4 global error falls by about 16x when the step halves") {
  // Coarse steps over five years so the RK4 error dominates the oracle's.
  const oracle::State x0{10000, 200, 0, 0, 0};
  const auto ref = oracle::euler_richardson(x0, 0.3, 1e-5, 500'000, 50'000);  // samples every 0.5 years
  const ModelParams p;
  const Trajectory coarse = simulate(reference_initial_state(), constant(0.3), p, {.step_h = 0.25, .t_final = 5.0});
  const Trajectory fine = simulate(reference_initial_state(), constant(0.3), p, {.step_h = 0.125, .t_final = 5.0});
  const double e1 = max_relative_error(coarse, 2, ref);
  const double e2 = max_relative_error(fine, 4, ref);
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(e1 / e2 >= 8.0);
  CHECK(e1 / e2 <= 32.0);
}

TEST_CASE("euler converges at first order") {
  const oracle::State x0{10000, 200, 0, 0, 0};
  const auto ref = oracle::euler_richardson(x0, 0.3, 1e-5, 500'000, 50'000);
  const ModelParams p;
  const IntegrationConfig c1{.step_h = 0.01, .t_final = 5.0, .method = Method::euler};
  const IntegrationConfig c2{.step_h = 0.005, .t_final = 5.0, .method = Method::euler};
  const double e1 = max_relative_error(simulate(reference_initial_state(), constant(0.3), p, c1), 50, ref);
  const double e2 = max_relative_error(simulate(reference_initial_state(), constant(0.3), p, c2), 100, ref);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("disease-free state stays fixed") {
  const Trajectory traj = simulate({10200, 0, 0, 0, 0}, constant(0.0), ModelParams{}, IntegrationConfig{});
  for (const auto& x : traj.x) {
    CHECK(std::abs(x.S - 10200.0) <= 1e-10);
    CHECK(std::abs(x.I) <= 1e-10);
    CHECK(std::abs(x.E) <= 1e-10);
  }
}

TEST_CASE("compartments stay nonnegative under full control") {
  const Trajectory traj = simulate(reference_initial_state(), constant(1.0), ModelParams{}, IntegrationConfig{});
  for (const auto& x : traj.x) {
    CHECK(x.S >= -1e-9);
    CHECK(x.I >= -1e-9);
    CHECK(x.C >= -1e-9);
    CHECK(x.A >= -1e-9);
    CHECK(x.E >= -1e-9);
  }
}

TEST_CASE("zero-order hold and decimation") {
  int calls = 0;
  const IntegrationConfig cfg{.step_h = 0.1, .t_final = 1.0, .control_decimation = 5};
  const Trajectory traj = simulate(
      reference_initial_state(),
      [&](double t, const Compartments&) {
        ++calls;
        return t < 0.45 ? 0.2 : 0.4;
      },
      ModelParams{}, cfg);
  CHECK(calls == 3);  // t = 0, 0.5 and the final sample
  for (std::size_t k = 0; k < 5; ++k) CHECK(traj.u[k] == 0.2);
  for (std::size_t k = 5; k < 11; ++k) CHECK(traj.u[k] == 0.4);
}

TEST_CASE("a control outside [0,1] is a contract violation") {
  CHECK_THROWS_AS(simulate(reference_initial_state(), constant(1.5), ModelParams{}, {.step_h = 0.1, .t_final = 1.0}),
                  ContractViolation);
}

TEST_CASE("divergence is reported with the step index") {
  ModelParams p;
  p.beta = 1e300;
  try {
    simulate(reference_initial_state(), constant(0.0), p, {.step_h = 0.1, .t_final = 10.0});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 1);
    CHECK(e.step() <= 100);
  }
}

TEST_CASE("schedule with linear hold matches a constant control run") {
  const IntegrationConfig cfg{.step_h = 0.01, .t_final = 2.0};
  const std::vector<double> nodes(cfg.steps() + 1, 0.3);
  const Trajectory a = simulate_schedule(reference_initial_state(), nodes, ModelParams{}, cfg, Hold::linear);
  const Trajectory b = simulate(reference_initial_state(), constant(0.3), ModelParams{}, cfg);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.x[k].I == doctest::Approx(b.x[k].I).epsilon(1e-14));
}

TEST_CASE("trajectory csv round trip") {
  const Trajectory traj = simulate(reference_initial_state(), constant(0.25), ModelParams{}, {.step_h = 0.1, .t_final = 1.0});
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "t,S,I,C,A,E,u,Su");
  const Trajectory back = read_trajectory_csv(ss);
  REQUIRE(back.size() == traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(back.t[k] == traj.t[k]);
    CHECK(back.x[k] == traj.x[k]);
    CHECK(back.u[k] == traj.u[k]);
  }
}
