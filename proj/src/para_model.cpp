#include "sicae/para_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sicae/error.hpp"

namespace sicae {

void ControllerGains::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw InvalidInput(fmt::format("controller gain {} must be finite and > 0 (got {})", name, v));
    }
  };
  positive(K_p, "K_p");
  positive(K_i, "K_i");
  positive(k_alpha, "k_alpha");
  positive(k_beta, "k_beta");
}

void ControllerOptions::validate() const {
  if (!std::isfinite(integral_floor) || integral_floor <= 0.0) {
    throw InvalidInput(fmt::format("controller integral_floor must be > 0 (got {})", integral_floor));
  }
  if (!std::isfinite(measurement_scale) || measurement_scale <= 0.0) {
    throw InvalidInput(fmt::format("controller measurement_scale must be > 0 (got {})", measurement_scale));
  }
  if (!std::isfinite(psi0_fixed)) throw InvalidInput("controller psi0_fixed must be finite");
}

PsiUpdate parse_psi_update(const std::string& s) {
  if (s == "verbatim") return PsiUpdate::verbatim;
  if (s == "error_driven") return PsiUpdate::error_driven;
  throw InvalidInput(fmt::format("unknown psi_update '{}' (expected verbatim or error_driven)", s));
}

IntegralRule parse_integral_rule(const std::string& s) {
  if (s == "left_riemann") return IntegralRule::left_riemann;
  if (s == "trapezoidal") return IntegralRule::trapezoidal;
  throw InvalidInput(fmt::format("unknown integral_rule '{}' (expected left_riemann or trapezoidal)", s));
}

Psi0Policy parse_psi0_policy(const std::string& s) {
  if (s == "continuous_handoff") return Psi0Policy::continuous_handoff;
  if (s == "fixed") return Psi0Policy::fixed;
  throw InvalidInput(fmt::format("unknown psi0_policy '{}' (expected continuous_handoff or fixed)", s));
}

const char* to_string(PsiUpdate v) { return v == PsiUpdate::verbatim ? "verbatim" : "error_driven"; }
const char* to_string(IntegralRule v) { return v == IntegralRule::left_riemann ? "left_riemann" : "trapezoidal"; }
const char* to_string(Psi0Policy v) { return v == Psi0Policy::continuous_handoff ? "continuous_handoff" : "fixed"; }

double initialization_term(std::int64_t k, const ControllerGains& gains) {
  return gains.k_alpha * std::exp(-gains.k_beta * static_cast<double>(k));
}

namespace {

void check_step_inputs(double y_measured, double dt, double u_max) {
  if (!std::isfinite(dt) || dt <= 0.0) throw ContractViolation(fmt::format("controller: dt must be > 0 (got {})", dt));
  if (!std::isfinite(y_measured) || y_measured < 0.0) {
    throw ContractViolation(fmt::format("controller: measurement must be finite and >= 0 (got {})", y_measured));
  }
  if (!(u_max >= 0.0 && u_max <= 1.0)) {
    throw ContractViolation(fmt::format("controller: u_max must lie in [0,1] (got {})", u_max));
  }
}

}  // namespace

ControlStep controller_step(const ControllerState& state, double y_measured, const ControllerGains& gains, double dt,
                            double u_max, const ControllerOptions& options) {
  check_step_inputs(y_measured, dt, u_max);
  const double y = y_measured / options.measurement_scale;

  ControllerState next = state;
  next.k = state.k + 1;
  next.y_ref = std::min(state.y_ref, y);
  const double error = next.y_ref - y;

  const double increment = options.integral_rule == IntegralRule::left_riemann
                               ? gains.K_i * error * dt
                               : gains.K_i * 0.5 * (error + state.e_prev) * dt;

  const double drive = options.psi_update == PsiUpdate::verbatim ? -y : error;
  next.psi = state.psi + gains.K_p * (initialization_term(next.k, gains) + drive);

  double raw = next.psi * (state.integral_acc + increment);
  if (options.anti_windup && raw > u_max && next.psi * increment > 0.0) {
    raw = next.psi * state.integral_acc;
  } else {
    next.integral_acc = state.integral_acc + increment;
  }
  next.e_prev = error;

  // NaN can only come from inf * 0 when Psi has blown up; treat as "no dose".
  const double u = std::isnan(raw) ? 0.0 : std::clamp(raw, 0.0, u_max);
  next.u_prev = u;
  return {u, next};
}

ControllerState handoff_state(double u_handoff, double y_measured, const ControllerGains& gains, double dt,
                              const ControllerOptions& options) {
  check_step_inputs(y_measured, dt, 1.0);
  if (!(u_handoff >= 0.0 && u_handoff <= 1.0)) {
    throw ContractViolation(fmt::format("controller: handoff control must lie in [0,1] (got {})", u_handoff));
  }
  ControllerState s;
  s.k = 0;
  s.y_ref = y_measured / options.measurement_scale;
  // The reference starts on the current measurement, so the first Riemann
  // term is zero and the floor sets the seed.
  const double first_term = gains.K_i * (s.y_ref - s.y_ref) * dt;
  s.integral_acc = std::max(first_term, options.integral_floor);
  s.psi = options.psi0_policy == Psi0Policy::continuous_handoff ? u_handoff / s.integral_acc : options.psi0_fixed;
  s.u_prev = u_handoff;
  s.e_prev = 0.0;
  return s;
}

}  // namespace sicae
