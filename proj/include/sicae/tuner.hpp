#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sicae/integrator.hpp"
#include "sicae/metrics.hpp"
#include "sicae/model.hpp"
#include "sicae/para_model.hpp"
#include "sicae/sequencer.hpp"

namespace sicae {

enum class Objective { J_u_plus_I, J_I, J_te, I_at_Te, weighted, reference_match };

Objective parse_objective(const std::string& s);
const char* to_string(Objective o);

/// Names accepted as tunables: u0, slope, u_max, K_p, K_i, k_alpha, k_beta.
inline const std::vector<std::string>& tunable_names() {
  static const std::vector<std::string> names{"u0", "slope", "u_max", "K_p", "K_i", "k_alpha", "k_beta"};
  return names;
}

struct ParameterBound {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  /// Search in log10 space (requires lower > 0).
  bool log_scale = false;
};

/// Criterion values addressable by the weighted and reference_match
/// objectives: T_e, J_u_plus_I, J_I, J_te, I_at_Te, max_Su, u_max.
double summary_field(const RunSummary& s, const std::string& field);

struct TuneSpec {
  Objective objective = Objective::J_u_plus_I;
  /// Weighted objective: sum of weight * field.
  std::map<std::string, double> weights;
  /// reference_match objective: sum of ((field - target) / target)^2.
  std::map<std::string, double> targets;
  std::vector<ParameterBound> bounds;
  /// Added per unit of max(0, max_Su - gamma_max).
  double infeasibility_penalty = 1.0;
  /// Initial simplex edge as a fraction of each (transformed) box width.
  double simplex_init_scale = 0.1;
  int max_evals = 500;
  double ftol = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Scenario {
  Compartments initial = reference_initial_state();
  ModelParams params;
  IntegrationConfig integration;
  SequencePlan plan;
  ControllerGains gains;
  ControllerOptions controller;
  CostWeights weights;
  std::string case_name;
};

/// Sets one named tunable on a scenario (unknown names throw InvalidInput).
void apply_parameter(Scenario& scenario, const std::string& name, double value);
double read_parameter(const Scenario& scenario, const std::string& name);

/// Runs the two-phase sequence and summarizes it over [0, T_e].
RunSummary evaluate_scenario(const Scenario& scenario);

struct Evaluation {
  std::vector<double> parameters;
  RunSummary summary;
  double objective = 0.0;
  double penalized = 0.0;
  bool feasible = false;
  double best_so_far = 0.0;
  /// Set when the simulation threw (e.g. an invalid plan); penalized is +inf.
  std::string error;
};

struct TuneResult {
  std::vector<std::string> names;
  std::vector<double> best_parameters;
  RunSummary best_summary;
  double best_penalized = 0.0;
  bool feasible = false;
  /// True when no evaluated point satisfied the mixed constraint.
  bool warning_all_infeasible = false;
  std::vector<Evaluation> log;
  Scenario best_scenario;
};

double objective_value(const TuneSpec& spec, const RunSummary& summary);
/// Objective plus infeasibility_penalty * max(0, max_Su - gamma_max). Applied
/// whether or not the plan clamps, so a search over an unclamped plan can
/// look for a ramp that respects the bound on its own.
double penalized_objective(const TuneSpec& spec, const RunSummary& summary, const SequencePlan& plan);

/// Box-bounded Nelder-Mead with restarts. The starting point is read from the
/// template scenario; the initial simplex is jittered with the spec's seed.
TuneResult tune(const TuneSpec& spec, const Scenario& scenario_template);

void write_evaluation_log_csv(std::ostream& out, const TuneResult& result);
void write_evaluation_log_csv(const std::string& path, const TuneResult& result);

}  // namespace sicae
