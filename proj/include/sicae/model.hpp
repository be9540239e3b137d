#pragma once

#include <array>

namespace sicae {

/// Rate constants of the SICAE model. Rates are per year, populations are
/// individuals. Defaults are the reference calibration with a constant
/// population (Lambda = mu * N, no AIDS-induced death).
struct ModelParams {
  double N = 10200.0;
  double mu = 1.0 / 69.54;
  double beta = 0.582;
  double eta_C = 0.04;
  double eta_A = 1.35;
  double theta = 0.001;
  double omega = 0.09;
  double rho = 0.1;
  double phi = 1.0;
  double alpha = 0.33;
  double d = 0.0;
  double Lambda = (1.0 / 69.54) * 10200.0;
  /// Divide the force of infection by S+I+C+A+E instead of the constant N.
  bool instantaneous_population = false;

  /// Throws InvalidInput when a rate is negative/non-finite, N <= 0, or the
  /// modification factors leave eta_A >= 1, 0 <= eta_C <= 1.
  void validate() const;

  /// True when Lambda == mu*N and d == 0, i.e. the controlled-model form.
  bool constant_population() const;

  bool operator==(const ModelParams&) const = default;
};

/// The five compartments. Also used for their time derivatives.
struct Compartments {
  double S = 0.0;
  double I = 0.0;
  double C = 0.0;
  double A = 0.0;
  double E = 0.0;

  double total() const { return S + I + C + A + E; }
  bool finite() const;
  std::array<double, 5> as_array() const { return {S, I, C, A, E}; }
  static Compartments from_array(const std::array<double, 5>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

  Compartments& operator+=(const Compartments& o);
  bool operator==(const Compartments&) const = default;
};

Compartments operator+(Compartments a, const Compartments& b);
Compartments operator-(Compartments a, const Compartments& b);
Compartments operator*(double s, Compartments a);

struct StateVector {
  double t = 0.0;
  Compartments x;
};

/// S(0)=10000, I(0)=200, others zero.
Compartments reference_initial_state();

/// lambda = beta/N (I + eta_C C + eta_A A). Negative compartments (integration
/// round-off) are treated as zero.
double force_of_infection(const Compartments& x, const ModelParams& p);

/// Right-hand side of the controlled SICAE system with PrEP fraction `u`.
/// Requires 0 <= u <= 1 (ContractViolation otherwise) and a finite state.
Compartments derivative(const Compartments& x, double u, const ModelParams& p);

}  // namespace sicae
