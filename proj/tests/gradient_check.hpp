#pragma once

// Directional derivative of the penalized OC cost: central finite difference
// of the discrete cost versus the adjoint gradient integrated against the
// direction.

#include <cmath>
#include <vector>

#include "sicae/oc_solver.hpp"

namespace gradcheck {

struct Result {
  double finite_difference;
  double adjoint;
  double relative_error() const { return std::abs(finite_difference - adjoint) / std::abs(finite_difference); }
};

inline Result directional(const std::vector<double>& u, const std::vector<double>& dir, const sicae::OcConfig& cfg,
                          double r, const sicae::IntegrationConfig& grid) {
  using namespace sicae;
  const ModelParams p;
  const Compartments x0 = reference_initial_state();
  const double eps = 1e-5;
  std::vector<double> up(u), dn(u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    up[k] += eps * dir[k];
    dn[k] -= eps * dir[k];
  }
  const double fd = (oc_penalized_cost(oc_forward(p, x0, up, grid), cfg, r) -
                     oc_penalized_cost(oc_forward(p, x0, dn, grid), cfg, r)) /
                    (2.0 * eps);
  const Trajectory tr = oc_forward(p, x0, u, grid);
  const auto g = oc_control_gradient(tr, oc_adjoint(tr, p, cfg, r), cfg, r);
  double ad = 0.0;
  for (std::size_t k = 1; k < u.size(); ++k) {
    ad += 0.5 * (g[k] * dir[k] + g[k - 1] * dir[k - 1]) * (tr.t[k] - tr.t[k - 1]);
  }
  return {fd, ad};
}

/// Smooth interior control and a sign-changing direction on `grid`.
inline void probe(const sicae::IntegrationConfig& grid, std::vector<double>& u, std::vector<double>& dir) {
  const std::size_t n = grid.steps() + 1;
  u.resize(n);
  dir.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.step_h * static_cast<double>(k);
    u[k] = 0.3 + 0.2 * std::sin(0.4 * t);
    dir[k] = std::cos(0.7 * t) + 0.5;
  }
}

}  // namespace gradcheck
