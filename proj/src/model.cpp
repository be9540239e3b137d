#include "sicae/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "sicae/error.hpp"

namespace sicae {

namespace {

void require_rate(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw InvalidInput(fmt::format("model parameter {} must be finite and >= 0 (got {})", name, value));
  }
}

}  // namespace

void ModelParams::validate() const {
  if (!std::isfinite(N) || N <= 0.0) {
    throw InvalidInput(fmt::format("model parameter N must be > 0 (got {})", N));
  }
  require_rate(mu, "mu");
  require_rate(beta, "beta");
  require_rate(eta_C, "eta_C");
  require_rate(eta_A, "eta_A");
  require_rate(theta, "theta");
  require_rate(omega, "omega");
  require_rate(rho, "rho");
  require_rate(phi, "phi");
  require_rate(alpha, "alpha");
  require_rate(d, "d");
  require_rate(Lambda, "Lambda");
  if (eta_A < 1.0) {
    throw InvalidInput(fmt::format("model parameter eta_A must be >= 1 (got {})", eta_A));
  }
  if (eta_C > 1.0) {
    throw InvalidInput(fmt::format("model parameter eta_C must be <= 1 (got {})", eta_C));
  }
}

bool ModelParams::constant_population() const {
  return d == 0.0 && std::abs(Lambda - mu * N) <= 1e-12 * std::max(1.0, mu * N);
}

bool Compartments::finite() const {
  return std::isfinite(S) && std::isfinite(I) && std::isfinite(C) && std::isfinite(A) && std::isfinite(E);
}

Compartments& Compartments::operator+=(const Compartments& o) {
  S += o.S;
  I += o.I;
  C += o.C;
  A += o.A;
  E += o.E;
  return *this;
}

Compartments operator+(Compartments a, const Compartments& b) { return a += b; }

Compartments operator-(Compartments a, const Compartments& b) {
  return {a.S - b.S, a.I - b.I, a.C - b.C, a.A - b.A, a.E - b.E};
}

Compartments operator*(double s, Compartments a) { return {s * a.S, s * a.I, s * a.C, s * a.A, s * a.E}; }

Compartments reference_initial_state() { return {10000.0, 200.0, 0.0, 0.0, 0.0}; }

double force_of_infection(const Compartments& x, const ModelParams& p) {
  if (!x.finite()) {
    throw InvalidInput("force_of_infection: non-finite compartment value");
  }
  const double I = std::max(x.I, 0.0);
  const double C = std::max(x.C, 0.0);
  const double A = std::max(x.A, 0.0);
  double population = p.N;
  if (p.instantaneous_population) {
    population = std::max(x.S, 0.0) + I + C + A + std::max(x.E, 0.0);
    if (population <= 0.0) return 0.0;
  }
  return p.beta / population * (I + p.eta_C * C + p.eta_A * A);
}

Compartments derivative(const Compartments& x, double u, const ModelParams& p) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw ContractViolation(fmt::format("derivative: control must lie in [0,1] (got {})", u));
  }
  const double lambda = force_of_infection(x, p);
  const double infection = lambda * x.S;
  const double prep = u * x.S;
  return {
      p.Lambda - infection - p.mu * x.S - prep + p.theta * x.E,
      infection - (p.rho + p.phi + p.mu) * x.I + p.alpha * x.A + p.omega * x.C,
      p.phi * x.I - (p.omega + p.mu) * x.C,
      p.rho * x.I - (p.alpha + p.mu + p.d) * x.A,
      prep - (p.mu + p.theta) * x.E,
  };
}

}  // namespace sicae
