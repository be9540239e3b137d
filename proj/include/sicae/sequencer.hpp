#pragma once

#include <optional>
#include <string>

#include "sicae/integrator.hpp"
#include "sicae/model.hpp"
#include "sicae/para_model.hpp"

namespace sicae {

enum class RampShape { linear, quadratic };

RampShape parse_ramp_shape(const std::string& s);
const char* to_string(RampShape s);

/// Two-phase treatment plan: an open-loop ramp u0 + slope*t (or u0 + slope*t^2)
/// up to u_max, then the para-model loop. `slope` is L for the linear ramp
/// and Q for the quadratic one.
struct SequencePlan {
  RampShape shape = RampShape::linear;
  double u0 = 0.0;
  double slope = 0.1;
  double u_max = 0.7;
  double gamma_max = 2000.0;
  bool constraint_enabled = true;
  double epsilon_off = 1e-3;

  void validate() const;
  bool operator==(const SequencePlan&) const = default;
};

struct RunResult {
  Trajectory trajectory;
  /// First time after which the applied control is identically zero.
  double T_e = 0.0;
  /// Time the loop was closed; empty when the ramp never reached u_max.
  std::optional<double> switch_time;

  bool switched() const { return switch_time.has_value(); }
};

/// Uncapped ramp value u0 + L t or u0 + Q t^2.
double phase1_raw(double t, const SequencePlan& plan);

/// Ramp value capped at u_max.
double phase1_control(double t, const SequencePlan& plan);

/// Applies the mixed constraint S u <= gamma_max (when enabled) and the
/// admissible range [0,1].
double constraint_clamp(double u_raw, double S, const SequencePlan& plan);

/// Runs ramp then closed loop over [0, cfg.t_final]. The controller is
/// sampled once per control period of `cfg`. After the loop output first
/// drops to epsilon_off or below, the control stays at zero.
RunResult run_sequence(const Compartments& initial, const SequencePlan& plan, const ControllerGains& gains,
                       const ModelParams& params, const IntegrationConfig& cfg,
                       const ControllerOptions& options = {});

/// Untreated epidemic (u = 0) on the same grid.
RunResult run_uncontrolled(const Compartments& initial, const ModelParams& params, const IntegrationConfig& cfg);

}  // namespace sicae
