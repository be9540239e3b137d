#include "sicae/oc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "sicae/error.hpp"
#include "sicae/metrics.hpp"

namespace sicae {

void OcConfig::validate() const {
  if (!(w1 > 0.0) || !(w2 > 0.0) || !std::isfinite(w1) || !std::isfinite(w2)) {
    throw InvalidInput(fmt::format("oc: weights must be > 0 (w1 = {}, w2 = {})", w1, w2));
  }
  if (!(t_f > 0.0)) throw InvalidInput(fmt::format("oc: t_f must be > 0 (got {})", t_f));
  if (gamma_max && !(*gamma_max > 0.0)) throw InvalidInput(fmt::format("oc: gamma_max must be > 0 (got {})", *gamma_max));
  if (!(sweep_tol > 0.0)) throw InvalidInput(fmt::format("oc: sweep_tol must be > 0 (got {})", sweep_tol));
  if (max_iter < 1) throw InvalidInput("oc: max_iter must be >= 1");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw InvalidInput(fmt::format("oc: relaxation must lie in (0,1] (got {})", relaxation));
  }
  if (!(penalty_weight > 0.0) || !(penalty_growth > 1.0)) {
    throw InvalidInput("oc: penalty_weight must be > 0 and penalty_growth > 1");
  }
  if (max_penalty_stages < 1) throw InvalidInput("oc: max_penalty_stages must be >= 1");
}

namespace {

double excess(double S, double u, const OcConfig& cfg) {
  return cfg.gamma_max ? std::max(0.0, S * u - *cfg.gamma_max) : 0.0;
}

/// -dH/dx for H = w1 I + w2 u^2 + r max(0, S u - gamma)^2 + <costate, f(x, u)>.
Compartments costate_rate(const Compartments& x, const Compartments& l, double u, const ModelParams& p,
                          const OcConfig& cfg, double r) {
  const double lambda = force_of_infection(x, p);
  const double dlam = (l.I - l.S) * x.S * p.beta / p.N;  // (l_I - l_S) S d(lambda)/dI
  const double v = excess(x.S, u, cfg);
  const Compartments dH{
      l.S * (-p.mu - u) + (l.I - l.S) * lambda + l.E * u + 2.0 * r * v * u,
      cfg.w1 + dlam - l.I * (p.rho + p.phi + p.mu) + l.C * p.phi + l.A * p.rho,
      dlam * p.eta_C + l.I * p.omega - l.C * (p.omega + p.mu),
      dlam * p.eta_A + l.I * p.alpha - l.A * (p.alpha + p.mu + p.d),
      l.S * p.theta - l.E * (p.mu + p.theta),
  };
  return -1.0 * dH;
}

double max_Su(const Trajectory& traj) {
  double m = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) m = std::max(m, traj.S_times_u(k));
  return m;
}

}  // namespace

Trajectory oc_forward(const ModelParams& params, const Compartments& initial, std::span<const double> u,
                      const IntegrationConfig& grid) {
  IntegrationConfig cfg = grid;
  cfg.method = Method::rk4;
  return simulate_schedule(initial, u, params, cfg, Hold::linear);
}

std::vector<double> oc_project_feasible(const ModelParams& params, const Compartments& initial,
                                        std::span<const double> u_in, const IntegrationConfig& grid, double gamma_max) {
  IntegrationConfig cfg = grid;
  cfg.method = Method::rk4;
  cfg.validate();
  const std::size_t n = cfg.steps() + 1;
  if (u_in.size() != n) throw InvalidInput(fmt::format("oc: expected {} control nodes, got {}", n, u_in.size()));
  const double h = cfg.step_h;
  std::vector<double> u(u_in.begin(), u_in.end());
  Compartments x = initial;
  if (x.S > 0.0) u[0] = std::min(u[0], gamma_max / x.S);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    Compartments next = step_linear(x, u[k], u[k + 1], h, params);
    if (next.S * u[k + 1] > gamma_max) {
      // S_{k+1} u_{k+1} grows with u_{k+1} over this step; bisect keeping the
      // feasible end.
      double lo = 0.0;
      double hi = u[k + 1];
      for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (step_linear(x, u[k], mid, h, params).S * mid > gamma_max) hi = mid;
        else lo = mid;
      }
      u[k + 1] = lo;
      next = step_linear(x, u[k], lo, h, params);
    }
    x = next;
  }
  return u;
}

double oc_penalized_cost(const Trajectory& traj, const OcConfig& cfg, double penalty_weight) {
  return integrate_samples(traj, traj.t.back(), [&](std::size_t k) {
    const double u = traj.u[k];
    const double v = excess(traj.x[k].S, u, cfg);
    return cfg.w1 * traj.x[k].I + cfg.w2 * u * u + penalty_weight * v * v;
  });
}

std::vector<Compartments> oc_adjoint(const Trajectory& traj, const ModelParams& params, const OcConfig& cfg,
                                     double penalty_weight) {
  const std::size_t n = traj.size();
  std::vector<Compartments> costate(n);
  for (std::size_t k = n - 1; k > 0; --k) {
    const double h = traj.t[k] - traj.t[k - 1];
    const Compartments& x1 = traj.x[k];
    const Compartments& x0 = traj.x[k - 1];
    const Compartments xm = 0.5 * (x0 + x1);
    const double u1 = traj.u[k];
    const double u0 = traj.u[k - 1];
    const double um = 0.5 * (u0 + u1);
    const Compartments& l = costate[k];
    // Stepping backwards in time: dl/d(-t) = dH/dx.
    const Compartments k1 = costate_rate(x1, l, u1, params, cfg, penalty_weight);
    const Compartments k2 = costate_rate(xm, l - (0.5 * h) * k1, um, params, cfg, penalty_weight);
    const Compartments k3 = costate_rate(xm, l - (0.5 * h) * k2, um, params, cfg, penalty_weight);
    const Compartments k4 = costate_rate(x0, l - h * k3, u0, params, cfg, penalty_weight);
    costate[k - 1] = l - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return costate;
}

std::vector<double> oc_control_gradient(const Trajectory& traj, const std::vector<Compartments>& costate,
                                        const OcConfig& cfg, double penalty_weight) {
  std::vector<double> g(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double S = traj.x[k].S;
    const double u = traj.u[k];
    g[k] = 2.0 * cfg.w2 * u + (costate[k].E - costate[k].S) * S + 2.0 * penalty_weight * excess(S, u, cfg) * S;
  }
  return g;
}

double oc_pointwise_control(double S, const Compartments& costate, const OcConfig& cfg, double penalty_weight) {
  // H is a convex piecewise quadratic in u; take the stationary point of the
  // active piece and project onto [0,1].
  const double a = (costate.S - costate.E) * S;
  double u = a / (2.0 * cfg.w2);
  if (cfg.gamma_max && penalty_weight > 0.0 && S * u > *cfg.gamma_max) {
    u = (a + 2.0 * penalty_weight * S * *cfg.gamma_max) / (2.0 * cfg.w2 + 2.0 * penalty_weight * S * S);
  }
  return std::clamp(u, 0.0, 1.0);
}

OcResult solve_ocp(const ModelParams& params, const Compartments& initial, const OcConfig& cfg,
                   const IntegrationConfig& grid_in) {
  cfg.validate();
  params.validate();
  if (params.instantaneous_population) {
    throw InvalidInput("oc: the costate equations assume a constant population N");
  }
  IntegrationConfig grid = grid_in;
  grid.t_final = cfg.t_f;
  grid.validate();

  const std::size_t n = grid.steps() + 1;
  std::vector<double> u(n, 0.0);
  std::vector<double> candidate(n);
  OcResult result;

  const bool constrained = cfg.gamma_max.has_value();
  double r = constrained ? cfg.penalty_weight : 0.0;
  Trajectory traj = oc_forward(params, initial, u, grid);
  constexpr double kMinBlend = 1.0 / 1024.0;

  for (int stage = 0; stage < cfg.max_penalty_stages; ++stage) {
    double cost = oc_penalized_cost(traj, cfg, r);
    result.stage_begin.push_back(result.J_history.size());
    result.J_history.push_back(cost);

    OcStage info;
    info.penalty_weight = r;
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
      const auto costate = oc_adjoint(traj, params, cfg, r);
      residual = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        candidate[k] = oc_pointwise_control(traj.x[k].S, costate[k], cfg, r);
        residual = std::max(residual, std::abs(candidate[k] - u[k]));
      }
      if (residual < cfg.sweep_tol) break;

      // Relaxed update, halving the blend until the cost does not increase.
      bool accepted = false;
      std::vector<double> trial(n);
      for (double blend = cfg.relaxation; blend >= kMinBlend; blend *= 0.5) {
        for (std::size_t k = 0; k < n; ++k) trial[k] = blend * candidate[k] + (1.0 - blend) * u[k];
        Trajectory next = oc_forward(params, initial, trial, grid);
        const double next_cost = oc_penalized_cost(next, cfg, r);
        if (next_cost <= cost) {
          u.swap(trial);
          traj = std::move(next);
          cost = next_cost;
          result.J_history.push_back(cost);
          accepted = true;
          break;
        }
      }
      // No descent along the sweep direction: the iterate is stationary up
      // to the discretization mismatch between the costate and the cost.
      if (!accepted) break;
    }
    info.iterations = it;
    info.cost = cost;
    info.max_Su = max_Su(traj);
    info.residual = residual;
    result.stages.push_back(info);

    if (it == cfg.max_iter) {
      throw ConvergenceError(fmt::format("oc: sweep did not converge in {} iterations (J = {}, residual = {}, "
                                         "max S u = {})",
                                         cfg.max_iter, cost, residual, info.max_Su),
                             cost, constrained ? std::max(0.0, info.max_Su - *cfg.gamma_max) : 0.0);
    }
    if (!constrained || info.max_Su <= *cfg.gamma_max * (1.0 + 1e-3)) {
      if (constrained) {
        u = oc_project_feasible(params, initial, u, grid, *cfg.gamma_max);
        traj = oc_forward(params, initial, u, grid);
      }
      result.trajectory = std::move(traj);
      return result;
    }
    r *= cfg.penalty_growth;
  }
  const double violation = max_Su(traj) - *cfg.gamma_max;
  throw ConvergenceError(
      fmt::format("oc: constraint still violated by {} after {} penalty stages", violation, cfg.max_penalty_stages),
      result.J_history.back(), violation);
}

}  // namespace sicae
