// Command-line front end: run, tune, compare and table1.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "sicae/error.hpp"
#include "sicae/scenario.hpp"

namespace fs = std::filesystem;
using namespace sicae;

namespace {

struct CommonFlags {
  std::string out;
  double step = 0.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_plots = false;
};

void apply_overrides(ScenarioConfig& cfg, const CommonFlags& flags) {
  if (flags.step > 0.0) {
    cfg.integration.step_h = flags.step;
    try {
      cfg.integration.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError("--step", e.what());
    }
  }
  if (flags.seed_set && cfg.tune) cfg.tune->seed = flags.seed;
}

fs::path output_dir(const ScenarioConfig& cfg, const CommonFlags& flags, const fs::path& fallback_root) {
  if (!flags.out.empty()) return flags.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return fallback_root / cfg.case_name;
}

void print_summary(const RunSummary& s) {
  fmt::print("{}: Te={:.2f} J_uI={:.4g} J_I={:.4g} J_te={:.4g} I(Te)={:.2f} max_Su={:.1f} u_max={:.3f}\n", s.case_name,
             s.T_e, s.J_u_plus_I, s.J_I, s.J_te, s.I_at_Te, s.max_Su, s.u_max_observed);
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
  ScenarioConfig cfg = load_config(path);
  apply_overrides(cfg, flags);
  const ScenarioOutcome outcome = execute(cfg);
  const fs::path dir = output_dir(cfg, flags, "out");
  write_artifacts(outcome, cfg, dir, !flags.no_plots);
  print_summary(outcome.summary);
  fmt::print("artifacts written to {}\n", dir.string());
  return 0;
}

TuneResult tune_config(ScenarioConfig& cfg) {
  if (!cfg.tune) throw ConfigError("tune", "scenario has no tune block");
  TuneResult result = tune(*cfg.tune, cfg.scenario());
  if (result.warning_all_infeasible) {
    fmt::print(stderr, "warning: {}: no evaluated point satisfied S u <= {}\n", cfg.case_name, cfg.plan.gamma_max);
  }
  cfg.adopt(result.best_scenario);
  return result;
}

int cmd_tune(const std::string& path, const CommonFlags& flags) {
  ScenarioConfig cfg = load_config(path);
  apply_overrides(cfg, flags);
  const TuneResult result = tune_config(cfg);
  const fs::path dir = output_dir(cfg, flags, "out");
  fs::create_directories(dir);
  write_evaluation_log_csv((dir / "tune_log.csv").string(), result);
  std::ofstream(dir / "tuned_config.json") << to_json(cfg).dump(2) << '\n';
  const ScenarioOutcome outcome = execute(cfg);
  write_artifacts(outcome, cfg, dir, !flags.no_plots);
  fmt::print("{} evaluations, best penalized objective {:.6g}\n", result.log.size(), result.best_penalized);
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    fmt::print("  {} = {:.10g}\n", result.names[i], result.best_parameters[i]);
  }
  print_summary(outcome.summary);
  fmt::print("tuned config and log written to {}\n", dir.string());
  return 0;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& reference, const CommonFlags& flags) {
  std::vector<RunSummary> rows;
  for (const auto& f : files) {
    auto parsed = read_summary_csv(f);
    rows.insert(rows.end(), parsed.begin(), parsed.end());
  }
  std::size_t ref = 0;
  if (!reference.empty()) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const RunSummary& r) { return r.case_name == reference; });
    if (it == rows.end()) throw std::runtime_error("reference case '" + reference + "' not found");
    ref = static_cast<std::size_t>(it - rows.begin());
  }
  fmt::print("{}", format_comparison(rows, ref));
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    std::ofstream csv(fs::path(flags.out) / "comparison.csv");
    write_comparison_csv(csv, rows, ref);
  }
  return 0;
}

int cmd_table1(const std::string& config_dir, bool retune, const CommonFlags& flags) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no scenario files in " + config_dir);

  const fs::path root = flags.out.empty() ? fs::path("table1_out") : fs::path(flags.out);
  std::vector<std::future<RunSummary>> jobs;
  for (const auto& file : files) {
    jobs.push_back(std::async(std::launch::async, [&, file] {
      ScenarioConfig cfg = load_config(file);
      apply_overrides(cfg, flags);
      if (retune && cfg.tune) tune_config(cfg);
      const ScenarioOutcome outcome = execute(cfg);
      write_artifacts(outcome, cfg, root / cfg.case_name, !flags.no_plots);
      return outcome.summary;
    }));
  }
  std::vector<RunSummary> rows;
  for (auto& job : jobs) rows.push_back(job.get());
  write_summary_csv((root / "table1_summary.csv").string(), rows);
  fmt::print("{}", format_comparison(rows, 0));
  fmt::print("summaries written to {}\n", (root / "table1_summary.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SICAE PrEP control toolkit: model-free sequences, classical optimal control, tuning"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--step", flags.step, "Override the integration step (years)");
    sub->add_option("--seed", flags.seed, "Seed for the tuner's initial simplex")->each([&](const std::string&) {
      flags.seed_set = true;
    });
    sub->add_flag("--no-plots", flags.no_plots, "Skip SVG plots");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one scenario file");
  run->add_option("config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_common(run);

  auto* tune_cmd = app.add_subcommand("tune", "Tune a model-free scenario, then run the best point");
  tune_cmd->add_option("config", config_path, "Scenario JSON with a tune block")->required()->check(CLI::ExistingFile);
  add_common(tune_cmd);

  std::vector<std::string> summaries;
  std::string reference;
  auto* compare = app.add_subcommand("compare", "Tabulate summary CSV files");
  compare->add_option("summaries", summaries, "summary.csv files")->required()->check(CLI::ExistingFile);
  compare->add_option("--reference", reference, "Case name used as the delta reference (default: first row)");
  add_common(compare);

  std::string config_dir = std::string(SICAE_CONFIG_DIR) + "/table1";
  bool retune = false;
  auto* table1 = app.add_subcommand("table1", "Run every bundled comparison scenario");
  table1->add_option("--configs", config_dir, "Directory of scenario files");
  table1->add_flag("--tune", retune, "Re-tune model-free scenarios before running");
  add_common(table1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, flags);
    if (*tune_cmd) return cmd_tune(config_path, flags);
    if (*compare) return cmd_compare(summaries, reference, flags);
    if (*table1) return cmd_table1(config_dir, retune, flags);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
