#include "sicae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sicae/error.hpp"

namespace sicae {

namespace detail {

void check_span(const Trajectory& traj, double t_end) {
  if (traj.empty()) throw RangeError("trajectory is empty");
  const double last = traj.t.back();
  const double slack = 1e-9 * std::max(1.0, std::abs(last));
  if (!std::isfinite(t_end) || t_end < traj.t.front() - slack || t_end > last + slack) {
    throw RangeError(fmt::format("time {} outside trajectory span [{}, {}]", t_end, traj.t.front(), last));
  }
}

}  // namespace detail

double treatment_end_time(const Trajectory& traj) {
  if (traj.empty()) return 0.0;
  for (std::size_t k = traj.size(); k-- > 0;) {
    if (traj.u[k] > 0.0) return k + 1 < traj.size() ? traj.t[k + 1] : traj.t[k];
  }
  return traj.t.front();
}

double infected_at(const Trajectory& traj, double t) {
  detail::check_span(traj, t);
  const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), t);
  if (it == traj.t.end()) return traj.x.back().I;
  const auto k = static_cast<std::size_t>(it - traj.t.begin());
  if (k == 0 || *it == t) return traj.x[k].I;
  const double w = (t - traj.t[k - 1]) / (traj.t[k] - traj.t[k - 1]);
  return traj.x[k - 1].I + w * (traj.x[k].I - traj.x[k - 1].I);
}

double cost_JuI(const Trajectory& traj, double T_e) {
  return integrate_samples(traj, T_e, [&](std::size_t k) {
    const double u = traj.u[k];
    const double I = traj.x[k].I;
    return u * u + I * I;
  });
}

double cost_JI(const Trajectory& traj, double T_e) {
  return integrate_samples(traj, T_e, [&](std::size_t k) { return traj.x[k].I * traj.x[k].I; });
}

double cost_Jte(const Trajectory& traj, double T_e) {
  return integrate_samples(traj, T_e, [&](std::size_t k) {
    const double u = traj.u[k];
    const double I = traj.x[k].I;
    return traj.t[k] * (u * u + I * I);
  });
}

double cost_classical(const Trajectory& traj, double w1, double w2, double t_f) {
  return integrate_samples(traj, t_f, [&](std::size_t k) { return w1 * traj.x[k].I + w2 * traj.u[k] * traj.u[k]; });
}

double control_energy(const Trajectory& traj, double T_e) {
  return integrate_samples(traj, T_e, [&](std::size_t k) { return traj.u[k] * traj.u[k]; });
}

RunSummary summarize(const Trajectory& traj, double T_e, const CostWeights& weights, std::string case_name) {
  detail::check_span(traj, T_e);
  RunSummary s;
  s.case_name = std::move(case_name);
  s.T_e = T_e;
  s.J_u_plus_I = cost_JuI(traj, T_e);
  s.J_I = cost_JI(traj, T_e);
  s.J_te = cost_Jte(traj, T_e);
  s.I_at_Te = infected_at(traj, T_e);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    s.max_Su = std::max(s.max_Su, traj.S_times_u(k));
    s.u_max_observed = std::max(s.u_max_observed, traj.u[k]);
  }
  s.J_classical = cost_classical(traj, weights.w1, weights.w2, traj.t.back());
  return s;
}

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    if (r.case_name.find_first_of(",\n\r") != std::string::npos) {
      throw InvalidInput(fmt::format("case name '{}' must not contain commas or newlines", r.case_name));
    }
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.case_name, r.T_e,
               r.J_u_plus_I, r.J_I, r.J_te, r.I_at_Te, r.max_Su, r.u_max_observed);
  }
}

void write_summary_csv(const std::string& path, const std::vector<RunSummary>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_summary_csv(out, rows);
}

std::vector<RunSummary> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("summary CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryHeader) throw InvalidInput(fmt::format("summary CSV: unexpected header '{}'", line));
  std::vector<RunSummary> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    RunSummary s;
    std::string cell;
    std::getline(fields, s.case_name, ',');
    double* targets[] = {&s.T_e, &s.J_u_plus_I, &s.J_I, &s.J_te, &s.I_at_Te, &s.max_Su, &s.u_max_observed};
    for (double* target : targets) {
      if (!std::getline(fields, cell, ',')) throw InvalidInput(fmt::format("summary CSV row {}: too few fields", row));
      try {
        *target = std::stod(cell);
      } catch (const std::exception&) {
        throw InvalidInput(fmt::format("summary CSV row {}: '{}' is not a number", row, cell));
      }
    }
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<RunSummary> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_summary_csv(in);
}

}  // namespace sicae
