#pragma once

#include <optional>
#include <vector>

#include "sicae/integrator.hpp"
#include "sicae/model.hpp"

namespace sicae {

/// Settings of the forward-backward sweep for
///   min int_0^{t_f} w1 I + w2 u^2   s.t. SICAE dynamics, 0 <= u <= 1, S u <= gamma_max.
struct OcConfig {
  double w1 = 1.0;
  double w2 = 1.0;
  double t_f = 25.0;
  /// Mixed constraint bound; empty disables the constraint.
  std::optional<double> gamma_max;
  double sweep_tol = 1e-6;
  int max_iter = 2000;
  /// Exterior penalty r * max(0, S u - gamma_max)^2, r multiplied by
  /// penalty_growth until the constraint holds within 0.1%.
  double penalty_weight = 1e-6;
  double penalty_growth = 10.0;
  int max_penalty_stages = 30;
  double relaxation = 0.5;

  void validate() const;
  bool operator==(const OcConfig&) const = default;
};

struct OcStage {
  double penalty_weight = 0.0;
  int iterations = 0;
  double cost = 0.0;
  double max_Su = 0.0;
  double residual = 0.0;
};

struct OcResult {
  /// Optimal control at the nodes and the state it produces. With the
  /// constraint enabled the final iterate is projected so that every node
  /// satisfies S u <= gamma_max.
  Trajectory trajectory;
  /// Penalized cost of every accepted iterate, in order.
  std::vector<double> J_history;
  /// Index into J_history where each penalty stage starts.
  std::vector<std::size_t> stage_begin;
  std::vector<OcStage> stages;
};

/// Stops when the sweep is stationary. With a constraint, the penalty grows
/// until max S u <= gamma_max (1 + 1e-3), then oc_project_feasible removes
/// the remaining excess. Throws ConvergenceError when a stage exhausts
/// max_iter or the penalty schedule cannot reach feasibility.
OcResult solve_ocp(const ModelParams& params, const Compartments& initial, const OcConfig& cfg,
                   const IntegrationConfig& grid = {.step_h = 1e-2, .t_final = 25.0});

// Building blocks, exposed for gradient checks.

/// Lowers node controls, in time order, just enough that S u <= gamma_max at
/// every node of the resulting linear-hold RK4 trajectory.
std::vector<double> oc_project_feasible(const ModelParams& params, const Compartments& initial,
                                        std::span<const double> u, const IntegrationConfig& grid, double gamma_max);

/// Forward pass under a nodal control (linear between nodes).
Trajectory oc_forward(const ModelParams& params, const Compartments& initial, std::span<const double> u,
                      const IntegrationConfig& grid);

/// Trapezoidal w1 I + w2 u^2 + r max(0, S u - gamma)^2 over the trajectory.
double oc_penalized_cost(const Trajectory& traj, const OcConfig& cfg, double penalty_weight);

/// Costate at each node, integrated backwards from a zero terminal value.
std::vector<Compartments> oc_adjoint(const Trajectory& traj, const ModelParams& params, const OcConfig& cfg,
                                     double penalty_weight);

/// dH/du at each node.
std::vector<double> oc_control_gradient(const Trajectory& traj, const std::vector<Compartments>& costate,
                                        const OcConfig& cfg, double penalty_weight);

/// argmin over [0,1] of the Hamiltonian at one node.
double oc_pointwise_control(double S, const Compartments& costate, const OcConfig& cfg, double penalty_weight);

}  // namespace sicae
