#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sicae/integrator.hpp"

namespace sicae {

struct CostWeights {
  double w1 = 1.0;
  double w2 = 1.0;
};

/// One row of the comparison table plus the classical cost.
struct RunSummary {
  std::string case_name;
  double T_e = 0.0;
  double J_u_plus_I = 0.0;
  double J_I = 0.0;
  double J_te = 0.0;
  double I_at_Te = 0.0;
  double max_Su = 0.0;
  double u_max_observed = 0.0;
  /// int_0^{t_final} w1 I + w2 u^2; not part of the CSV row.
  std::optional<double> J_classical;

  bool operator==(const RunSummary&) const = default;
};

/// Time after the last sample with u > 0; 0 when u is identically zero and
/// the final time when u is still positive at the end.
double treatment_end_time(const Trajectory& traj);

/// Trapezoidal integral of f(k) over [0, t_end] on the sample grid, with a
/// linearly interpolated partial last interval. Throws RangeError when
/// t_end lies outside the trajectory.
template <typename F>
double integrate_samples(const Trajectory& traj, double t_end, F&& integrand);

/// Linear interpolation of I at time t.
double infected_at(const Trajectory& traj, double t);

/// int_0^{T_e} u^2 + I^2
double cost_JuI(const Trajectory& traj, double T_e);
/// int_0^{T_e} I^2
double cost_JI(const Trajectory& traj, double T_e);
/// int_0^{T_e} tau (u^2 + I^2)
double cost_Jte(const Trajectory& traj, double T_e);
/// int_0^{t_f} w1 I + w2 u^2
double cost_classical(const Trajectory& traj, double w1, double w2, double t_f);
/// int_0^{T_e} u^2
double control_energy(const Trajectory& traj, double T_e);

/// Fills every field. max_Su and u_max_observed scan the whole horizon.
RunSummary summarize(const Trajectory& traj, double T_e, const CostWeights& weights, std::string case_name = {});

inline constexpr const char* kSummaryHeader = "case,Te,J_uI,J_I,J_te,I_Te,max_Su,u_max";

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& rows);
void write_summary_csv(const std::string& path, const std::vector<RunSummary>& rows);
std::vector<RunSummary> read_summary_csv(std::istream& in);
std::vector<RunSummary> read_summary_csv(const std::string& path);

// ---------------------------------------------------------------------------

namespace detail {
void check_span(const Trajectory& traj, double t_end);
}

template <typename F>
double integrate_samples(const Trajectory& traj, double t_end, F&& integrand) {
  detail::check_span(traj, t_end);
  double total = 0.0;
  double previous = integrand(0);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double t0 = traj.t[k - 1];
    const double t1 = traj.t[k];
    if (t0 >= t_end) break;
    const double current = integrand(k);
    if (t1 <= t_end) {
      total += 0.5 * (previous + current) * (t1 - t0);
    } else {
      const double w = (t_end - t0) / (t1 - t0);
      const double at_end = previous + w * (current - previous);
      total += 0.5 * (previous + at_end) * (t_end - t0);
      break;
    }
    previous = current;
  }
  return total;
}

}  // namespace sicae
