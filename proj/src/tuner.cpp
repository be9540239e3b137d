#include "sicae/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sicae/error.hpp"

namespace sicae {

Objective parse_objective(const std::string& s) {
  if (s == "J_u_plus_I") return Objective::J_u_plus_I;
  if (s == "J_I") return Objective::J_I;
  if (s == "J_te") return Objective::J_te;
  if (s == "I_at_Te") return Objective::I_at_Te;
  if (s == "weighted") return Objective::weighted;
  if (s == "reference_match") return Objective::reference_match;
  throw InvalidInput(fmt::format("unknown objective '{}'", s));
}

const char* to_string(Objective o) {
  switch (o) {
    case Objective::J_u_plus_I: return "J_u_plus_I";
    case Objective::J_I: return "J_I";
    case Objective::J_te: return "J_te";
    case Objective::I_at_Te: return "I_at_Te";
    case Objective::weighted: return "weighted";
    case Objective::reference_match: return "reference_match";
  }
  return "?";
}

double summary_field(const RunSummary& s, const std::string& field) {
  if (field == "T_e") return s.T_e;
  if (field == "J_u_plus_I") return s.J_u_plus_I;
  if (field == "J_I") return s.J_I;
  if (field == "J_te") return s.J_te;
  if (field == "I_at_Te") return s.I_at_Te;
  if (field == "max_Su") return s.max_Su;
  if (field == "u_max") return s.u_max_observed;
  throw InvalidInput(fmt::format("unknown summary field '{}'", field));
}

void TuneSpec::validate() const {
  if (max_evals <= 0) throw InvalidInput("tune: max_evals must be > 0");
  if (bounds.empty()) throw InvalidInput("tune: at least one parameter bound is required");
  if (!(simplex_init_scale > 0.0 && simplex_init_scale <= 1.0)) {
    throw InvalidInput("tune: simplex_init_scale must lie in (0,1]");
  }
  if (!(ftol >= 0.0)) throw InvalidInput("tune: ftol must be >= 0");
  if (!(infeasibility_penalty >= 0.0)) throw InvalidInput("tune: infeasibility_penalty must be >= 0");
  for (const auto& b : bounds) {
    if (std::find(tunable_names().begin(), tunable_names().end(), b.name) == tunable_names().end()) {
      throw InvalidInput(fmt::format("tune: '{}' is not a tunable parameter", b.name));
    }
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower > b.upper) {
      throw InvalidInput(fmt::format("tune: empty bound for {} ([{}, {}])", b.name, b.lower, b.upper));
    }
    if (b.log_scale && b.lower <= 0.0) {
      throw InvalidInput(fmt::format("tune: log-scale bound for {} needs lower > 0", b.name));
    }
  }
  if (objective == Objective::weighted && weights.empty()) throw InvalidInput("tune: weighted objective needs weights");
  if (objective == Objective::reference_match && targets.empty()) {
    throw InvalidInput("tune: reference_match objective needs targets");
  }
  for (const auto& [field, target] : targets) {
    if (target == 0.0) throw InvalidInput(fmt::format("tune: target for {} must be nonzero", field));
  }
}

void apply_parameter(Scenario& s, const std::string& name, double value) {
  if (name == "u0") s.plan.u0 = value;
  else if (name == "slope") s.plan.slope = value;
  else if (name == "u_max") s.plan.u_max = value;
  else if (name == "K_p") s.gains.K_p = value;
  else if (name == "K_i") s.gains.K_i = value;
  else if (name == "k_alpha") s.gains.k_alpha = value;
  else if (name == "k_beta") s.gains.k_beta = value;
  else throw InvalidInput(fmt::format("unknown tunable '{}'", name));
}

double read_parameter(const Scenario& s, const std::string& name) {
  if (name == "u0") return s.plan.u0;
  if (name == "slope") return s.plan.slope;
  if (name == "u_max") return s.plan.u_max;
  if (name == "K_p") return s.gains.K_p;
  if (name == "K_i") return s.gains.K_i;
  if (name == "k_alpha") return s.gains.k_alpha;
  if (name == "k_beta") return s.gains.k_beta;
  throw InvalidInput(fmt::format("unknown tunable '{}'", name));
}

RunSummary evaluate_scenario(const Scenario& s) {
  const RunResult run = run_sequence(s.initial, s.plan, s.gains, s.params, s.integration, s.controller);
  return summarize(run.trajectory, run.T_e, s.weights, s.case_name);
}

double objective_value(const TuneSpec& spec, const RunSummary& summary) {
  switch (spec.objective) {
    case Objective::J_u_plus_I: return summary.J_u_plus_I;
    case Objective::J_I: return summary.J_I;
    case Objective::J_te: return summary.J_te;
    case Objective::I_at_Te: return summary.I_at_Te;
    case Objective::weighted: {
      double total = 0.0;
      for (const auto& [field, w] : spec.weights) total += w * summary_field(summary, field);
      return total;
    }
    case Objective::reference_match: {
      double total = 0.0;
      for (const auto& [field, target] : spec.targets) {
        const double rel = (summary_field(summary, field) - target) / target;
        total += rel * rel;
      }
      return total;
    }
  }
  return 0.0;
}

namespace {

bool is_feasible(const RunSummary& summary, const SequencePlan& plan) {
  return summary.max_Su <= plan.gamma_max + 1e-9;
}

}  // namespace

double penalized_objective(const TuneSpec& spec, const RunSummary& summary, const SequencePlan& plan) {
  return objective_value(spec, summary) + spec.infeasibility_penalty * std::max(0.0, summary.max_Su - plan.gamma_max);
}

namespace {

/// Unit-box coordinates <-> parameter values.
struct Transform {
  const ParameterBound* bound;

  double to_value(double z) const {
    z = std::clamp(z, 0.0, 1.0);
    if (bound->log_scale) {
      const double lo = std::log10(bound->lower);
      const double hi = std::log10(bound->upper);
      return std::pow(10.0, lo + z * (hi - lo));
    }
    return bound->lower + z * (bound->upper - bound->lower);
  }

  double to_unit(double value) const {
    value = std::clamp(value, bound->lower, bound->upper);
    if (bound->log_scale) {
      const double lo = std::log10(bound->lower);
      const double hi = std::log10(bound->upper);
      return hi > lo ? (std::log10(value) - lo) / (hi - lo) : 0.0;
    }
    return bound->upper > bound->lower ? (value - bound->lower) / (bound->upper - bound->lower) : 0.0;
  }
};

class Search {
public:
  Search(const TuneSpec& spec, const Scenario& base) : spec_(spec), base_(base) {
    for (const auto& b : spec.bounds) {
      result_.names.push_back(b.name);
      transforms_.push_back(Transform{&b});
      if (b.upper > b.lower) free_.push_back(transforms_.size() - 1);
    }
    start_.resize(transforms_.size());
    for (std::size_t i = 0; i < transforms_.size(); ++i) {
      start_[i] = transforms_[i].to_unit(read_parameter(base, spec.bounds[i].name));
    }
  }

  TuneResult run() {
    std::mt19937_64 rng(spec_.seed);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);

    evaluate(start_);
    if (free_.empty()) return finish();

    const std::size_t dim = free_.size();
    double scale = spec_.simplex_init_scale;
    int stale_restarts = 0;
    while (budget_left() && stale_restarts < 3) {
      const double best_before = best_value_;
      // Simplex in the free coordinates around the incumbent.
      std::vector<std::vector<double>> simplex{best_point_};
      std::vector<double> values{best_value_};
      for (std::size_t j = 0; j < dim && budget_left(); ++j) {
        std::vector<double> vertex = best_point_;
        const std::size_t i = free_[j];
        const double delta = scale * jitter(rng);
        vertex[i] = vertex[i] + delta <= 1.0 ? vertex[i] + delta : vertex[i] - delta;
        vertex[i] = std::clamp(vertex[i], 0.0, 1.0);
        simplex.push_back(vertex);
        values.push_back(evaluate(vertex));
      }
      if (simplex.size() == dim + 1) nelder_mead(simplex, values);
      stale_restarts = best_value_ < best_before - spec_.ftol * (std::abs(best_before) + 1e-12) ? 0 : stale_restarts + 1;
      scale = std::max(scale * 0.5, 1e-3);
    }
    return finish();
  }

private:
  bool budget_left() const { return static_cast<int>(result_.log.size()) < spec_.max_evals; }

  double evaluate(const std::vector<double>& z) {
    Scenario scenario = base_;
    Evaluation e;
    for (std::size_t i = 0; i < transforms_.size(); ++i) {
      const double v = transforms_[i].to_value(z[i]);
      e.parameters.push_back(v);
      apply_parameter(scenario, spec_.bounds[i].name, v);
    }
    try {
      e.summary = evaluate_scenario(scenario);
      e.objective = objective_value(spec_, e.summary);
      e.penalized = penalized_objective(spec_, e.summary, scenario.plan);
      e.feasible = is_feasible(e.summary, scenario.plan);
    } catch (const std::exception& ex) {
      e.error = ex.what();
      e.objective = e.penalized = std::numeric_limits<double>::infinity();
    }
    if (e.penalized < best_value_) {
      best_value_ = e.penalized;
      best_point_ = z;
      result_.best_parameters = e.parameters;
      result_.best_summary = e.summary;
      result_.feasible = e.feasible;
      result_.best_scenario = scenario;
    }
    any_feasible_ = any_feasible_ || e.feasible;
    e.best_so_far = best_value_;
    result_.log.push_back(std::move(e));
    return result_.log.back().penalized;
  }

  void nelder_mead(std::vector<std::vector<double>>& simplex, std::vector<double>& values) {
    const std::size_t m = simplex.size();
    std::vector<std::size_t> order(m);
    auto point = [&](const std::vector<double>& centroid, const std::vector<double>& from, double coeff) {
      std::vector<double> p = centroid;
      for (std::size_t i : free_) p[i] = std::clamp(centroid[i] + coeff * (centroid[i] - from[i]), 0.0, 1.0);
      return p;
    };
    while (budget_left()) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[m - 2];

      double diameter = 0.0;
      for (std::size_t v = 0; v < m; ++v) {
        for (std::size_t i : free_) diameter = std::max(diameter, std::abs(simplex[v][i] - simplex[best][i]));
      }
      const double spread = std::abs(values[worst] - values[best]);
      if ((std::isfinite(spread) && spread <= spec_.ftol * (std::abs(values[best]) + 1e-12)) || diameter < 1e-7) break;

      std::vector<double> centroid(simplex[0].size(), 0.0);
      for (std::size_t v : order) {
        if (v == worst) continue;
        for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += simplex[v][i] / static_cast<double>(m - 1);
      }

      const auto reflected = point(centroid, simplex[worst], 1.0);
      const double f_r = evaluate(reflected);
      if (f_r < values[best]) {
        if (!budget_left()) {
          simplex[worst] = reflected;
          values[worst] = f_r;
          break;
        }
        const auto expanded = point(centroid, simplex[worst], 2.0);
        const double f_e = evaluate(expanded);
        if (f_e < f_r) {
          simplex[worst] = expanded;
          values[worst] = f_e;
        } else {
          simplex[worst] = reflected;
          values[worst] = f_r;
        }
        continue;
      }
      if (f_r < values[second]) {
        simplex[worst] = reflected;
        values[worst] = f_r;
        continue;
      }
      if (!budget_left()) break;
      const bool outside = f_r < values[worst];
      const auto contracted = outside ? point(centroid, simplex[worst], 0.5) : point(centroid, simplex[worst], -0.5);
      const double f_c = evaluate(contracted);
      if (f_c < std::min(f_r, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_c;
        continue;
      }
      // Shrink toward the best vertex.
      for (std::size_t v = 0; v < m && budget_left(); ++v) {
        if (v == best) continue;
        for (std::size_t i : free_) simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
        values[v] = evaluate(simplex[v]);
      }
    }
  }

  TuneResult finish() {
    result_.best_penalized = best_value_;
    result_.warning_all_infeasible = !any_feasible_;
    return std::move(result_);
  }

  const TuneSpec& spec_;
  const Scenario& base_;
  std::vector<Transform> transforms_;
  std::vector<std::size_t> free_;
  std::vector<double> start_;
  std::vector<double> best_point_;
  double best_value_ = std::numeric_limits<double>::infinity();
  bool any_feasible_ = false;
  TuneResult result_;
};

}  // namespace

TuneResult tune(const TuneSpec& spec, const Scenario& scenario_template) {
  spec.validate();
  Search search(spec, scenario_template);
  return search.run();
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_evaluation_log_csv(std::ostream& out, const TuneResult& result) {
  for (const auto& name : result.names) out << name << ',';
  out << "Te,J_uI,J_I,J_te,I_Te,max_Su,u_max,objective,penalized,best_so_far,feasible,error\n";
  for (const auto& e : result.log) {
    for (double p : e.parameters) fmt::print(out, "{:.17g},", p);
    const auto& s = e.summary;
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n",
               s.T_e, s.J_u_plus_I, s.J_I, s.J_te, s.I_at_Te, s.max_Su, s.u_max_observed, e.objective, e.penalized,
               e.best_so_far, e.feasible ? 1 : 0, csv_quote(e.error));
  }
}

void write_evaluation_log_csv(const std::string& path, const TuneResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_evaluation_log_csv(out, result);
}

}  // namespace sicae
