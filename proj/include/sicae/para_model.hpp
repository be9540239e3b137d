#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace sicae {

/// Tuning coefficients of the para-model law. All strictly positive.
struct ControllerGains {
  double K_p = 1e-2;
  double K_i = 1.0;
  double k_alpha = 1.0;
  double k_beta = 1e-2;

  void validate() const;
  bool operator==(const ControllerGains&) const = default;
};

/// How the Psi series is driven.
///  - verbatim:      Psi_k = Psi_{k-1} + K_p (k_alpha e^{-k_beta k} - y_{k-1})
///  - error_driven:  Psi_k = Psi_{k-1} + K_p (k_alpha e^{-k_beta k} + (y*_k - y_{k-1}))
enum class PsiUpdate { verbatim, error_driven };

/// Discretization of the integral of K_i (y* - y).
enum class IntegralRule { left_riemann, trapezoidal };

/// Starting value of Psi when the loop is closed.
///  - continuous_handoff: integral seeded with max(first Riemann term, integral_floor) and
///                        Psi_0 = u_handoff / seed, so the first output equals u_handoff.
///  - fixed:              Psi_0 = psi0_fixed, integral seeded with the first Riemann term.
enum class Psi0Policy { continuous_handoff, fixed };

struct ControllerOptions {
  PsiUpdate psi_update = PsiUpdate::verbatim;
  IntegralRule integral_rule = IntegralRule::left_riemann;
  Psi0Policy psi0_policy = Psi0Policy::continuous_handoff;
  double psi0_fixed = 1.0;
  double integral_floor = 1e-3;
  /// Freeze the integral while the output sits above u_max and the new term
  /// would push it further up.
  bool anti_windup = true;
  /// Feed y / measurement_scale into the law (e.g. N to work with I/N).
  double measurement_scale = 1.0;

  void validate() const;
  bool operator==(const ControllerOptions&) const = default;
};

PsiUpdate parse_psi_update(const std::string& s);
IntegralRule parse_integral_rule(const std::string& s);
Psi0Policy parse_psi0_policy(const std::string& s);
const char* to_string(PsiUpdate v);
const char* to_string(IntegralRule v);
const char* to_string(Psi0Policy v);

/// Memory of the discrete law between samples.
struct ControllerState {
  double psi = 1.0;
  double integral_acc = 0.0;
  std::int64_t k = 0;
  /// Running minimum of the (scaled) measurement.
  double y_ref = std::numeric_limits<double>::infinity();
  double u_prev = 0.0;
  /// Last tracking error, used by the trapezoidal rule.
  double e_prev = 0.0;

  bool operator==(const ControllerState&) const = default;
};

struct ControlStep {
  double u;
  ControllerState state;
};

/// k_alpha * exp(-k_beta * k).
double initialization_term(std::int64_t k, const ControllerGains& gains);

/// One sample of the law: refresh the running-minimum reference, add the
/// integral term, advance Psi, and saturate Psi * integral to [0, u_max].
/// Requires dt > 0, a finite measurement >= 0 and 0 <= u_max <= 1.
ControlStep controller_step(const ControllerState& state, double y_measured, const ControllerGains& gains, double dt,
                            double u_max, const ControllerOptions& options = {});

/// Controller memory at the moment the loop is closed on measurement
/// `y_measured`, with the open-loop sequence currently emitting `u_handoff`.
ControllerState handoff_state(double u_handoff, double y_measured, const ControllerGains& gains, double dt,
                              const ControllerOptions& options = {});

}  // namespace sicae
