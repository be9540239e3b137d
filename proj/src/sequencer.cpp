#include "sicae/sequencer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sicae/error.hpp"
#include "sicae/metrics.hpp"

namespace sicae {

RampShape parse_ramp_shape(const std::string& s) {
  if (s == "linear" || s == "slope") return RampShape::linear;
  if (s == "quadratic") return RampShape::quadratic;
  throw InvalidInput(fmt::format("unknown ramp shape '{}' (expected linear or quadratic)", s));
}

const char* to_string(RampShape s) { return s == RampShape::linear ? "linear" : "quadratic"; }

void SequencePlan::validate() const {
  if (!(u0 >= 0.0 && u0 <= u_max && u_max <= 1.0)) {
    throw InvalidInput(fmt::format("sequence plan: need 0 <= u0 ({}) <= u_max ({}) <= 1", u0, u_max));
  }
  if (!std::isfinite(slope) || slope < 0.0) {
    throw InvalidInput(fmt::format("sequence plan: slope must be finite and >= 0 (got {})", slope));
  }
  if (!std::isfinite(gamma_max) || gamma_max <= 0.0) {
    throw InvalidInput(fmt::format("sequence plan: gamma_max must be > 0 (got {})", gamma_max));
  }
  if (!std::isfinite(epsilon_off) || epsilon_off <= 0.0) {
    throw InvalidInput(fmt::format("sequence plan: epsilon_off must be > 0 (got {})", epsilon_off));
  }
}

double phase1_raw(double t, const SequencePlan& plan) {
  return plan.shape == RampShape::linear ? plan.u0 + plan.slope * t : plan.u0 + plan.slope * t * t;
}

double phase1_control(double t, const SequencePlan& plan) { return std::min(phase1_raw(t, plan), plan.u_max); }

double constraint_clamp(double u_raw, double S, const SequencePlan& plan) {
  double u = u_raw;
  if (plan.constraint_enabled && S > 0.0) u = std::min(u, plan.gamma_max / S);
  return std::clamp(u, 0.0, 1.0);
}

namespace {

enum class Phase { ramp, closed_loop, off };

}  // namespace

RunResult run_sequence(const Compartments& initial, const SequencePlan& plan, const ControllerGains& gains,
                       const ModelParams& params, const IntegrationConfig& cfg, const ControllerOptions& options) {
  plan.validate();
  gains.validate();
  options.validate();
  params.validate();
  cfg.validate();

  const double dt = cfg.control_period();
  Phase phase = Phase::ramp;
  ControllerState controller;
  RunResult result;
  std::optional<double> off_time;

  auto source = [&](double t, const Compartments& x) {
    double command = 0.0;
    const double infected = std::max(x.I, 0.0);
    switch (phase) {
      case Phase::ramp: {
        const double raw = phase1_raw(t, plan);
        if (raw >= plan.u_max) {
          phase = Phase::closed_loop;
          result.switch_time = t;
          controller = handoff_state(plan.u_max, infected, gains, dt, options);
          command = plan.u_max;
        } else {
          command = raw;
        }
        break;
      }
      case Phase::closed_loop: {
        const ControlStep out = controller_step(controller, infected, gains, dt, plan.u_max, options);
        controller = out.state;
        command = out.u;
        if (command <= plan.epsilon_off) {
          phase = Phase::off;
          off_time = t;
          command = 0.0;
        }
        break;
      }
      case Phase::off:
        break;
    }
    return constraint_clamp(command, std::max(x.S, 0.0), plan);
  };

  result.trajectory = simulate(initial, source, params, cfg);
  result.T_e = off_time ? *off_time : treatment_end_time(result.trajectory);
  return result;
}

RunResult run_uncontrolled(const Compartments& initial, const ModelParams& params, const IntegrationConfig& cfg) {
  params.validate();
  RunResult result;
  result.trajectory = simulate(initial, [](double, const Compartments&) { return 0.0; }, params, cfg);
  result.T_e = 0.0;
  return result;
}

}  // namespace sicae
