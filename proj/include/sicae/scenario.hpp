#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sicae/integrator.hpp"
#include "sicae/metrics.hpp"
#include "sicae/model.hpp"
#include "sicae/oc_solver.hpp"
#include "sicae/para_model.hpp"
#include "sicae/sequencer.hpp"
#include "sicae/tuner.hpp"

namespace sicae {

enum class MethodKind { model_free, classical_oc, uncontrolled };

const char* to_string(MethodKind m);

/// A fully resolved scenario file. Blocks that are absent keep the
/// reference calibration and initial state.
struct ScenarioConfig {
  std::string case_name = "scenario";
  ModelParams params;
  Compartments initial = reference_initial_state();
  IntegrationConfig integration;
  CostWeights weights;
  MethodKind method = MethodKind::uncontrolled;
  SequencePlan plan;
  ControllerGains gains;
  ControllerOptions controller;
  OcConfig oc;
  std::optional<TuneSpec> tune;
  std::string output_dir;

  /// Model-free view used by the tuner.
  Scenario scenario() const;
  /// Copies tuned plan/gain values back from a scenario.
  void adopt(const Scenario& s);
};

/// Parses and validates. Throws ConfigError naming the offending field
/// (e.g. "model_free.plan.slope") on unknown keys, wrong types, missing
/// method block, or values that fail a component's invariants.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Serializes every field explicitly, so the output re-parses to an equal
/// config.
nlohmann::json to_json(const ScenarioConfig& cfg);

struct ScenarioOutcome {
  RunSummary summary;
  Trajectory trajectory;
  std::optional<double> switch_time;
  std::optional<OcResult> oc;
};

/// Runs the configured method in memory.
ScenarioOutcome execute(const ScenarioConfig& cfg);

/// Writes trajectory.csv, summary.csv, summary.json and (unless disabled)
/// infected.svg and control.svg into `dir`.
void write_artifacts(const ScenarioOutcome& outcome, const ScenarioConfig& cfg, const std::filesystem::path& dir,
                     bool plots);

nlohmann::json summary_to_json(const RunSummary& s);

// Plotting and reporting (report.cpp).

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG line chart.
void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series);

/// One row per run with the seven table columns followed by the difference
/// to the reference row.
std::string format_comparison(const std::vector<RunSummary>& rows, std::size_t reference);
void write_comparison_csv(std::ostream& out, const std::vector<RunSummary>& rows, std::size_t reference);

}  // namespace sicae
