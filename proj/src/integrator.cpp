#include "sicae/integrator.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sicae/error.hpp"

namespace sicae {

Method parse_method(const std::string& name) {
  if (name == "rk4") return Method::rk4;
  if (name == "euler") return Method::euler;
  throw InvalidInput(fmt::format("unknown integration method '{}' (expected rk4 or euler)", name));
}

const char* to_string(Method m) { return m == Method::rk4 ? "rk4" : "euler"; }

void IntegrationConfig::validate() const {
  if (!std::isfinite(step_h) || !std::isfinite(t_final) || step_h <= 0.0 || step_h > t_final) {
    throw InvalidInput(fmt::format("integration: need 0 < step ({}) <= t_final ({})", step_h, t_final));
  }
  const double ratio = t_final / step_h;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw InvalidInput(fmt::format("integration: t_final ({}) is not a whole number of steps ({})", t_final, step_h));
  }
  if (control_decimation < 1) {
    throw InvalidInput(fmt::format("integration: control_decimation must be >= 1 (got {})", control_decimation));
  }
}

std::size_t IntegrationConfig::steps() const { return static_cast<std::size_t>(std::llround(t_final / step_h)); }

void Trajectory::reserve(std::size_t n) {
  t.reserve(n);
  x.reserve(n);
  u.reserve(n);
}

void Trajectory::push_back(double time, const Compartments& state, double control) {
  t.push_back(time);
  x.push_back(state);
  u.push_back(control);
}

Compartments step(const Compartments& x, double u, double h, const ModelParams& params, Method method) {
  const Compartments k1 = derivative(x, u, params);
  if (method == Method::euler) return x + h * k1;
  const Compartments k2 = derivative(x + (0.5 * h) * k1, u, params);
  const Compartments k3 = derivative(x + (0.5 * h) * k2, u, params);
  const Compartments k4 = derivative(x + h * k3, u, params);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

void check_finite(const Compartments& x, std::size_t k, double t) {
  if (!x.finite()) {
    throw DivergenceError(k, fmt::format("integration diverged at step {} (t = {})", k, t));
  }
}

/// Runs one step, reporting a blow-up inside the RK4 stages as divergence of
/// step k+1 rather than as bad input.
template <typename F>
Compartments advance(F&& f, std::size_t k, double t) {
  try {
    return f();
  } catch (const InvalidInput&) {
    throw DivergenceError(k + 1, fmt::format("integration diverged at step {} (t = {})", k + 1, t));
  }
}

double checked_control(double u, double t) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw ContractViolation(fmt::format("control source returned {} at t = {}; must lie in [0,1]", u, t));
  }
  return u;
}

}  // namespace

Trajectory simulate(const Compartments& initial, const ControlSource& control, const ModelParams& params,
                    const IntegrationConfig& cfg) {
  cfg.validate();
  if (!initial.finite()) throw InvalidInput("simulate: non-finite initial state");
  const std::size_t n = cfg.steps();
  const double h = cfg.step_h;
  const auto decimation = static_cast<std::size_t>(cfg.control_decimation);

  Trajectory traj;
  traj.reserve(n + 1);
  Compartments x = initial;
  double u = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    if (k % decimation == 0) u = checked_control(control(t, x), t);
    traj.push_back(t, x, u);
    x = advance([&] { return step(x, u, h, params, cfg.method); }, k, t + h);
    check_finite(x, k + 1, t + h);
  }
  const double t_end = static_cast<double>(n) * h;
  if (n % decimation == 0) u = checked_control(control(t_end, x), t_end);
  traj.push_back(t_end, x, u);
  return traj;
}

Compartments step_linear(const Compartments& x, double u0, double u1, double h, const ModelParams& params) {
  const double um = 0.5 * (u0 + u1);
  const Compartments k1 = derivative(x, u0, params);
  const Compartments k2 = derivative(x + (0.5 * h) * k1, um, params);
  const Compartments k3 = derivative(x + (0.5 * h) * k2, um, params);
  const Compartments k4 = derivative(x + h * k3, u1, params);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate_schedule(const Compartments& initial, std::span<const double> u_nodes, const ModelParams& params,
                             const IntegrationConfig& cfg, Hold hold) {
  cfg.validate();
  const std::size_t n = cfg.steps();
  if (u_nodes.size() != n + 1) {
    throw InvalidInput(fmt::format("simulate_schedule: expected {} control nodes, got {}", n + 1, u_nodes.size()));
  }
  const double h = cfg.step_h;
  Trajectory traj;
  traj.reserve(n + 1);
  Compartments x = initial;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const double u0 = checked_control(u_nodes[k], t);
    traj.push_back(t, x, u0);
    if (hold == Hold::zero_order || cfg.method == Method::euler) {
      x = advance([&] { return step(x, u0, h, params, cfg.method); }, k, t + h);
    } else {
      const double u1 = checked_control(u_nodes[k + 1], t + h);
      x = advance([&] { return step_linear(x, u0, u1, h, params); }, k, t + h);
    }
    check_finite(x, k + 1, t + h);
  }
  traj.push_back(static_cast<double>(n) * h, x, checked_control(u_nodes[n], static_cast<double>(n) * h));
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,S,I,C,A,E,u,Su\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& x = traj.x[k];
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", traj.t[k], x.S, x.I, x.C,
               x.A, x.E, traj.u[k], traj.S_times_u(k));
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory_csv(out, traj);
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,S,I,C,A,E,u,Su") {
    throw InvalidInput("trajectory CSV: unexpected header");
  }
  Trajectory traj;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::array<double, 8> v{};
    std::string cell;
    for (double& value : v) {
      if (!std::getline(fields, cell, ',')) throw InvalidInput(fmt::format("trajectory CSV row {}: too few fields", row));
      value = std::stod(cell);
    }
    traj.push_back(v[0], {v[1], v[2], v[3], v[4], v[5]}, v[6]);
  }
  return traj;
}

}  // namespace sicae
