#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "gen.hpp"
#include "sicae/error.hpp"
#include "sicae/sequencer.hpp"

using namespace sicae;

TEST_CASE("phase 1 ramp values") {
  SequencePlan lin{.shape = RampShape::linear, .u0 = 0.05, .slope = 0.1, .u_max = 0.7};
  CHECK(phase1_control(0.0, lin) == 0.05);
  lin.u0 = 0.0;
  CHECK(phase1_control(3.0, lin) == doctest::Approx(0.3));
  CHECK(phase1_control(100.0, lin) == 0.7);

  const SequencePlan quad{.shape = RampShape::quadratic, .u0 = 0.0, .slope = 0.05, .u_max = 0.7};
  CHECK(phase1_raw(4.0, quad) == doctest::Approx(0.8));
  CHECK(phase1_control(4.0, quad) == 0.7);
  CHECK(parse_ramp_shape("slope") == RampShape::linear);
  CHECK_THROWS_AS(parse_ramp_shape("cubic"), InvalidInput);
}

TEST_CASE("constraint clamp") {
  const SequencePlan plan{.gamma_max = 2000.0};
  CHECK(constraint_clamp(0.5, 10000.0, plan) == doctest::Approx(0.2));
  CHECK(constraint_clamp(0.1, 10000.0, plan) == 0.1);
  CHECK(constraint_clamp(0.5, 0.0, plan) == 0.5);
  CHECK(constraint_clamp(1.7, 0.0, plan) == 1.0);

  SequencePlan off = plan;
  off.constraint_enabled = false;
  const double u = constraint_clamp(0.7, 4470.0, off);
  CHECK(u == 0.7);
  CHECK(4470.0 * u == doctest::Approx(3129.0));
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS((SequencePlan{.u0 = 0.8, .u_max = 0.7}).validate(), InvalidInput);
  CHECK_THROWS_AS((SequencePlan{.u_max = 1.2}).validate(), InvalidInput);
  CHECK_THROWS_AS((SequencePlan{.slope = -1.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((SequencePlan{.gamma_max = 0.0}).validate(), InvalidInput);
  CHECK_THROWS_AS((SequencePlan{.epsilon_off = 0.0}).validate(), InvalidInput);
}

TEST_CASE("a flat zero ramp is the untreated epidemic") {
  const IntegrationConfig cfg{.step_h = 0.01, .t_final = 25.0};
  const SequencePlan plan{.u0 = 0.0, .slope = 0.0};
  const RunResult run = run_sequence(reference_initial_state(), plan, ControllerGains{}, ModelParams{}, cfg);
  const RunResult none = run_uncontrolled(reference_initial_state(), ModelParams{}, cfg);
  CHECK_FALSE(run.switched());
  CHECK(run.T_e == 0.0);
  REQUIRE(run.trajectory.size() == none.trajectory.size());
  for (std::size_t k = 0; k < run.trajectory.size(); ++k) {
    CHECK(run.trajectory.u[k] == 0.0);
    CHECK(run.trajectory.x[k] == none.trajectory.x[k]);
  }
}

TEST_CASE("a ramp that never reaches u_max reports no switch") {
  const SequencePlan plan{.slope = 0.01, .u_max = 0.7};
  const RunResult run =
      run_sequence(reference_initial_state(), plan, ControllerGains{}, ModelParams{}, {.step_h = 0.01, .t_final = 25.0});
  CHECK_FALSE(run.switched());
  CHECK(run.T_e == 25.0);
}

TEST_CASE("property: sequencer invariants over random plans and gains") {
  gen::Source g(31);
  const ModelParams params;
  const IntegrationConfig cfg{.step_h = 0.01, .t_final = 25.0};
  for (int c = 0; c < 150; ++c) {
    CAPTURE(c);
    SequencePlan plan;
    plan.shape = g.coin() ? RampShape::linear : RampShape::quadratic;
    plan.u_max = g.uniform(0.05, 1.0);
    plan.u0 = g.coin(0.3) ? g.uniform(0.0, plan.u_max) : 0.0;
    plan.slope = g.log_uniform(1e-3, 20.0);
    plan.gamma_max = g.uniform(500.0, 4000.0);
    plan.constraint_enabled = g.coin(0.8);
    plan.epsilon_off = g.log_uniform(1e-5, 1e-2);
    const ControllerGains gains{g.log_uniform(1e-6, 1e-1), g.log_uniform(0.1, 10.0), g.log_uniform(0.1, 10.0),
                                g.log_uniform(1e-4, 1.0)};
    CAPTURE(plan.slope);
    CAPTURE(gains.K_p);

    const RunResult run = run_sequence(reference_initial_state(), plan, gains, params, cfg);
    const Trajectory& tr = run.trajectory;
    bool admissible = true, constrained = true, off_after = true, ramp_monotone = true;
    double last_raw = -1.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      admissible = admissible && tr.u[k] >= 0.0 && tr.u[k] <= 1.0;
      if (plan.constraint_enabled) constrained = constrained && tr.S_times_u(k) <= plan.gamma_max + 1e-9;
      // T_e = t_final means treatment never stopped; nothing is forced off then.
      if (run.T_e < cfg.t_final && tr.t[k] >= run.T_e) off_after = off_after && tr.u[k] == 0.0;
      if (!run.switch_time || tr.t[k] <= *run.switch_time) {
        const double raw = phase1_raw(tr.t[k], plan);
        ramp_monotone = ramp_monotone && raw >= last_raw;
        last_raw = raw;
      }
    }
    CHECK(admissible);
    CHECK(constrained);
    CHECK(off_after);
    CHECK(ramp_monotone);
    CHECK(run.T_e >= 0.0);
    CHECK(run.T_e <= cfg.t_final);
    if (tr.u.back() > 0.0) CHECK(run.T_e == cfg.t_final);

    if (run.switched()) {
      const auto k = static_cast<std::size_t>(std::llround(*run.switch_time / cfg.step_h));
      CHECK(phase1_raw(tr.t[k], plan) >= plan.u_max);
      CHECK(tr.u[k] == constraint_clamp(plan.u_max, tr.x[k].S, plan));
      if (k > 0) CHECK(phase1_raw(tr.t[k - 1], plan) < plan.u_max);
      CHECK(run.T_e >= *run.switch_time);
    }
  }
}

TEST_CASE("unconstrained run exceeds the bound that the constrained run respects") {
  const IntegrationConfig cfg{.step_h = 0.01, .t_final = 25.0};
  SequencePlan plan{.slope = 0.5, .u_max = 0.7, .gamma_max = 2000.0, .constraint_enabled = false};
  const ControllerGains gains{2e-3, 1.0, 1.0, 1e-2};
  const RunResult free_run = run_sequence(reference_initial_state(), plan, gains, ModelParams{}, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < free_run.trajectory.size(); ++k) worst = std::max(worst, free_run.trajectory.S_times_u(k));
  CHECK(worst > 2000.0);

  plan.constraint_enabled = true;
  const RunResult held = run_sequence(reference_initial_state(), plan, gains, ModelParams{}, cfg);
  for (std::size_t k = 0; k < held.trajectory.size(); ++k) CHECK(held.trajectory.S_times_u(k) <= 2000.0 + 1e-9);
}
