#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sicae/model.hpp"

namespace sicae {

enum class Method { rk4, euler };

Method parse_method(const std::string& name);
const char* to_string(Method m);

struct IntegrationConfig {
  double step_h = 1e-3;
  double t_final = 25.0;
  Method method = Method::rk4;
  /// The control callback is queried every `control_decimation` steps and
  /// held in between.
  int control_decimation = 1;

  /// Throws InvalidInput unless 0 < step_h <= t_final, t_final/step_h is an
  /// integer within rounding and control_decimation >= 1.
  void validate() const;
  std::size_t steps() const;
  double control_period() const { return step_h * control_decimation; }
};

/// Time-ordered samples and the control applied from each sample to the next
/// (the last entry is the control the source emitted at t_final).
struct Trajectory {
  std::vector<double> t;
  std::vector<Compartments> x;
  std::vector<double> u;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  double S_times_u(std::size_t k) const { return x[k].S * u[k]; }
  void reserve(std::size_t n);
  void push_back(double time, const Compartments& state, double control);
};

/// Returns the control fraction to hold over the next step.
using ControlSource = std::function<double(double t, const Compartments& x)>;

/// Fixed-step integration with zero-order hold of the control.
/// Produces steps()+1 samples. Throws DivergenceError on a non-finite state
/// and ContractViolation when the source leaves [0,1].
Trajectory simulate(const Compartments& initial, const ControlSource& control, const ModelParams& params,
                    const IntegrationConfig& cfg);

/// How a nodal control schedule is evaluated between nodes.
enum class Hold { zero_order, linear };

/// Integrates a precomputed control schedule, one value per sample node.
/// With Hold::linear the stage controls of RK4 use the node average at the
/// half step, which keeps the scheme second order in the control.
Trajectory simulate_schedule(const Compartments& initial, std::span<const double> u_nodes, const ModelParams& params,
                             const IntegrationConfig& cfg, Hold hold = Hold::zero_order);

/// One explicit step of the configured method with the control held at `u`.
Compartments step(const Compartments& x, double u, double h, const ModelParams& params, Method method);

/// One RK4 step with the control varying linearly from `u0` to `u1`.
Compartments step_linear(const Compartments& x, double u0, double u1, double h, const ModelParams& params);

/// CSV with header `t,S,I,C,A,E,u,Su`, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace sicae
