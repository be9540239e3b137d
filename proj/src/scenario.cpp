#include "sicae/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/core.h>

#include "sicae/error.hpp"

namespace sicae {

using nlohmann::json;

const char* to_string(MethodKind m) {
  switch (m) {
    case MethodKind::model_free: return "model_free";
    case MethodKind::classical_oc: return "classical_oc";
    case MethodKind::uncontrolled: return "uncontrolled";
  }
  return "?";
}

Scenario ScenarioConfig::scenario() const {
  Scenario s;
  s.initial = initial;
  s.params = params;
  s.integration = integration;
  s.plan = plan;
  s.gains = gains;
  s.controller = controller;
  s.weights = weights;
  s.case_name = case_name;
  return s;
}

void ScenarioConfig::adopt(const Scenario& s) {
  plan = s.plan;
  gains = s.gains;
}

namespace {

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers (typos) can be reported.
class Block {
public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  /// Number or null; absent keeps `fallback`.
  std::optional<double> nullable_number(const std::string& key, std::optional<double> fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (v->is_null()) return std::nullopt;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number or null");
    return v->get<double>();
  }

  std::optional<Block> child(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    return Block(*v, field(key));
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  /// Calls f() and rewrites InvalidInput as a ConfigError on this block.
  template <typename F>
  void check(F&& f) const {
    try {
      f();
    } catch (const InvalidInput& e) {
      throw ConfigError(path_, e.what());
    }
  }

  template <typename F>
  auto convert(const std::string& key, F&& f) const {
    try {
      return f();
    } catch (const InvalidInput& e) {
      throw ConfigError(field(key), e.what());
    }
  }

private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ModelParams parse_model(Block b) {
  ModelParams p;
  p.N = b.number("N", p.N);
  p.mu = b.number("mu", p.mu);
  p.beta = b.number("beta", p.beta);
  p.eta_C = b.number("eta_C", p.eta_C);
  p.eta_A = b.number("eta_A", p.eta_A);
  p.theta = b.number("theta", p.theta);
  p.omega = b.number("omega", p.omega);
  p.rho = b.number("rho", p.rho);
  p.phi = b.number("phi", p.phi);
  p.alpha = b.number("alpha", p.alpha);
  p.d = b.number("d", p.d);
  p.Lambda = b.number("Lambda", p.mu * p.N);
  p.instantaneous_population = b.boolean("instantaneous_population", p.instantaneous_population);
  b.finish();
  b.check([&] { p.validate(); });
  return p;
}

Compartments parse_initial(Block b) {
  Compartments x = reference_initial_state();
  x.S = b.number("S", x.S);
  x.I = b.number("I", x.I);
  x.C = b.number("C", x.C);
  x.A = b.number("A", x.A);
  x.E = b.number("E", x.E);
  b.finish();
  for (double v : x.as_array()) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(b.path(), "compartments must be finite and >= 0");
  }
  return x;
}

IntegrationConfig parse_integration(Block b) {
  IntegrationConfig c;
  c.step_h = b.number("step", c.step_h);
  c.t_final = b.number("t_final", c.t_final);
  const std::string method = b.string("method", to_string(c.method));
  c.method = b.convert("method", [&] { return parse_method(method); });
  c.control_decimation = b.integer("control_decimation", c.control_decimation);
  b.finish();
  b.check([&] { c.validate(); });
  return c;
}

CostWeights parse_weights(Block b) {
  CostWeights w;
  w.w1 = b.number("w1", w.w1);
  w.w2 = b.number("w2", w.w2);
  b.finish();
  return w;
}

SequencePlan parse_plan(Block b) {
  SequencePlan p;
  const std::string shape = b.string("shape", to_string(p.shape));
  p.shape = b.convert("shape", [&] { return parse_ramp_shape(shape); });
  p.u0 = b.number("u0", p.u0);
  p.slope = b.number("slope", p.slope);
  p.u_max = b.number("u_max", p.u_max);
  p.gamma_max = b.number("gamma_max", p.gamma_max);
  p.constraint_enabled = b.boolean("constraint", p.constraint_enabled);
  p.epsilon_off = b.number("epsilon_off", p.epsilon_off);
  b.finish();
  b.check([&] { p.validate(); });
  return p;
}

ControllerGains parse_gains(Block b) {
  ControllerGains g;
  g.K_p = b.number("K_p", g.K_p);
  g.K_i = b.number("K_i", g.K_i);
  g.k_alpha = b.number("k_alpha", g.k_alpha);
  g.k_beta = b.number("k_beta", g.k_beta);
  b.finish();
  b.check([&] { g.validate(); });
  return g;
}

ControllerOptions parse_controller(Block b) {
  ControllerOptions o;
  const std::string psi_update = b.string("psi_update", to_string(o.psi_update));
  o.psi_update = b.convert("psi_update", [&] { return parse_psi_update(psi_update); });
  const std::string rule = b.string("integral_rule", to_string(o.integral_rule));
  o.integral_rule = b.convert("integral_rule", [&] { return parse_integral_rule(rule); });
  const std::string policy = b.string("psi0_policy", to_string(o.psi0_policy));
  o.psi0_policy = b.convert("psi0_policy", [&] { return parse_psi0_policy(policy); });
  o.psi0_fixed = b.number("psi0", o.psi0_fixed);
  o.integral_floor = b.number("integral_floor", o.integral_floor);
  o.anti_windup = b.boolean("anti_windup", o.anti_windup);
  o.measurement_scale = b.number("measurement_scale", o.measurement_scale);
  b.finish();
  b.check([&] { o.validate(); });
  return o;
}

OcConfig parse_oc(Block b) {
  OcConfig c;
  c.gamma_max = b.nullable_number("gamma_max", c.gamma_max);
  c.sweep_tol = b.number("sweep_tol", c.sweep_tol);
  c.max_iter = b.integer("max_iter", c.max_iter);
  c.penalty_weight = b.number("penalty_weight", c.penalty_weight);
  c.penalty_growth = b.number("penalty_growth", c.penalty_growth);
  c.max_penalty_stages = b.integer("max_penalty_stages", c.max_penalty_stages);
  c.relaxation = b.number("relaxation", c.relaxation);
  b.finish();
  return c;
}

std::map<std::string, double> parse_field_map(Block b) {
  std::map<std::string, double> out;
  for (const auto& [key, value] : b.raw().items()) {
    const std::string field = b.field(key);
    try {
      summary_field(RunSummary{}, key);
    } catch (const InvalidInput&) {
      throw ConfigError(field, "unknown summary field");
    }
    out[key] = b.number(key, 0.0);
  }
  b.finish();
  return out;
}

TuneSpec parse_tune(Block b) {
  TuneSpec t;
  const std::string objective = b.string("objective", to_string(t.objective));
  t.objective = b.convert("objective", [&] { return parse_objective(objective); });
  if (auto w = b.child("weights")) t.weights = parse_field_map(*w);
  if (auto tg = b.child("targets")) t.targets = parse_field_map(*tg);
  if (auto bounds = b.child("bounds")) {
    for (const auto& [name, value] : bounds->raw().items()) {
      auto entry = bounds->child(name);
      ParameterBound pb;
      pb.name = name;
      pb.lower = entry->number("lower", 0.0);
      pb.upper = entry->number("upper", 0.0);
      pb.log_scale = entry->boolean("log", false);
      if (!entry->has("lower") || !entry->has("upper")) throw ConfigError(entry->path(), "needs lower and upper");
      entry->finish();
      t.bounds.push_back(pb);
    }
    bounds->finish();
  }
  t.infeasibility_penalty = b.number("infeasibility_penalty", t.infeasibility_penalty);
  t.simplex_init_scale = b.number("simplex_init_scale", t.simplex_init_scale);
  t.max_evals = b.integer("max_evals", t.max_evals);
  t.ftol = b.number("ftol", t.ftol);
  const double seed = b.number("seed", static_cast<double>(t.seed));
  if (seed < 0.0 || seed != std::floor(seed)) throw ConfigError(b.field("seed"), "expected a nonnegative integer");
  t.seed = static_cast<std::uint64_t>(seed);
  b.finish();
  b.check([&] { t.validate(); });
  return t;
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  Block root(doc, "");
  ScenarioConfig cfg;
  cfg.case_name = root.string("case", cfg.case_name);
  if (cfg.case_name.empty() || cfg.case_name.find_first_of(",\n\r") != std::string::npos) {
    throw ConfigError("case", "must be nonempty and contain no commas or newlines");
  }
  root.string("description", "");
  cfg.output_dir = root.string("output", "");
  if (auto b = root.child("model")) cfg.params = parse_model(*b);
  if (auto b = root.child("initial")) cfg.initial = parse_initial(*b);
  if (auto b = root.child("integration")) cfg.integration = parse_integration(*b);
  if (auto b = root.child("weights")) cfg.weights = parse_weights(*b);

  int method_blocks = 0;
  for (const char* key : {"model_free", "classical_oc", "uncontrolled"}) method_blocks += root.has(key) ? 1 : 0;
  if (method_blocks == 0) {
    throw ConfigError("method", "missing method block (one of model_free, classical_oc, uncontrolled)");
  }
  if (method_blocks > 1) throw ConfigError("method", "exactly one method block is allowed");

  if (auto b = root.child("model_free")) {
    cfg.method = MethodKind::model_free;
    if (auto p = b->child("plan")) cfg.plan = parse_plan(*p);
    if (auto g = b->child("gains")) cfg.gains = parse_gains(*g);
    if (auto c = b->child("controller")) cfg.controller = parse_controller(*c);
    b->finish();
  }
  if (auto b = root.child("classical_oc")) {
    cfg.method = MethodKind::classical_oc;
    cfg.oc = parse_oc(*b);
  }
  if (auto b = root.child("uncontrolled")) {
    cfg.method = MethodKind::uncontrolled;
    b->finish();
  }
  cfg.oc.w1 = cfg.weights.w1;
  cfg.oc.w2 = cfg.weights.w2;
  cfg.oc.t_f = cfg.integration.t_final;
  if (cfg.method == MethodKind::classical_oc) {
    try {
      cfg.oc.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError("classical_oc", e.what());
    }
  }

  if (auto b = root.child("tune")) {
    if (cfg.method != MethodKind::model_free) throw ConfigError("tune", "only model_free scenarios can be tuned");
    cfg.tune = parse_tune(*b);
  }
  root.finish();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  json j;
  j["case"] = cfg.case_name;
  if (!cfg.output_dir.empty()) j["output"] = cfg.output_dir;
  j["model"] = {{"N", p.N},         {"mu", p.mu},       {"beta", p.beta},   {"eta_C", p.eta_C},
                {"eta_A", p.eta_A}, {"theta", p.theta}, {"omega", p.omega}, {"rho", p.rho},
                {"phi", p.phi},     {"alpha", p.alpha}, {"d", p.d},         {"Lambda", p.Lambda},
                {"instantaneous_population", p.instantaneous_population}};
  j["initial"] = {{"S", cfg.initial.S}, {"I", cfg.initial.I}, {"C", cfg.initial.C}, {"A", cfg.initial.A},
                  {"E", cfg.initial.E}};
  j["integration"] = {{"step", cfg.integration.step_h},
                      {"t_final", cfg.integration.t_final},
                      {"method", to_string(cfg.integration.method)},
                      {"control_decimation", cfg.integration.control_decimation}};
  j["weights"] = {{"w1", cfg.weights.w1}, {"w2", cfg.weights.w2}};
  switch (cfg.method) {
    case MethodKind::model_free: {
      const auto& o = cfg.controller;
      j["model_free"] = {
          {"plan",
           {{"shape", to_string(cfg.plan.shape)},
            {"u0", cfg.plan.u0},
            {"slope", cfg.plan.slope},
            {"u_max", cfg.plan.u_max},
            {"gamma_max", cfg.plan.gamma_max},
            {"constraint", cfg.plan.constraint_enabled},
            {"epsilon_off", cfg.plan.epsilon_off}}},
          {"gains",
           {{"K_p", cfg.gains.K_p}, {"K_i", cfg.gains.K_i}, {"k_alpha", cfg.gains.k_alpha},
            {"k_beta", cfg.gains.k_beta}}},
          {"controller",
           {{"psi_update", to_string(o.psi_update)},
            {"integral_rule", to_string(o.integral_rule)},
            {"psi0_policy", to_string(o.psi0_policy)},
            {"psi0", o.psi0_fixed},
            {"integral_floor", o.integral_floor},
            {"anti_windup", o.anti_windup},
            {"measurement_scale", o.measurement_scale}}}};
      break;
    }
    case MethodKind::classical_oc: {
      const auto& c = cfg.oc;
      j["classical_oc"] = {{"gamma_max", c.gamma_max ? json(*c.gamma_max) : json(nullptr)},
                           {"sweep_tol", c.sweep_tol},
                           {"max_iter", c.max_iter},
                           {"penalty_weight", c.penalty_weight},
                           {"penalty_growth", c.penalty_growth},
                           {"max_penalty_stages", c.max_penalty_stages},
                           {"relaxation", c.relaxation}};
      break;
    }
    case MethodKind::uncontrolled:
      j["uncontrolled"] = json::object();
      break;
  }
  if (cfg.tune) {
    const auto& t = *cfg.tune;
    json bounds = json::object();
    for (const auto& b : t.bounds) bounds[b.name] = {{"lower", b.lower}, {"upper", b.upper}, {"log", b.log_scale}};
    j["tune"] = {{"objective", to_string(t.objective)},
                 {"bounds", bounds},
                 {"infeasibility_penalty", t.infeasibility_penalty},
                 {"simplex_init_scale", t.simplex_init_scale},
                 {"max_evals", t.max_evals},
                 {"ftol", t.ftol},
                 {"seed", t.seed}};
    if (!t.weights.empty()) j["tune"]["weights"] = t.weights;
    if (!t.targets.empty()) j["tune"]["targets"] = t.targets;
  }
  return j;
}

ScenarioOutcome execute(const ScenarioConfig& cfg) {
  ScenarioOutcome out;
  switch (cfg.method) {
    case MethodKind::uncontrolled: {
      const RunResult run = run_uncontrolled(cfg.initial, cfg.params, cfg.integration);
      out.trajectory = run.trajectory;
      out.summary = summarize(out.trajectory, run.T_e, cfg.weights, cfg.case_name);
      break;
    }
    case MethodKind::model_free: {
      RunResult run = run_sequence(cfg.initial, cfg.plan, cfg.gains, cfg.params, cfg.integration, cfg.controller);
      out.switch_time = run.switch_time;
      out.summary = summarize(run.trajectory, run.T_e, cfg.weights, cfg.case_name);
      out.trajectory = std::move(run.trajectory);
      break;
    }
    case MethodKind::classical_oc: {
      OcResult oc = solve_ocp(cfg.params, cfg.initial, cfg.oc, cfg.integration);
      out.trajectory = oc.trajectory;
      out.summary = summarize(out.trajectory, cfg.oc.t_f, cfg.weights, cfg.case_name);
      out.oc = std::move(oc);
      break;
    }
  }
  return out;
}

json summary_to_json(const RunSummary& s) {
  json j = {{"case", s.case_name},   {"T_e", s.T_e},         {"J_u_plus_I", s.J_u_plus_I},
            {"J_I", s.J_I},          {"J_te", s.J_te},       {"I_at_Te", s.I_at_Te},
            {"max_Su", s.max_Su},    {"u_max", s.u_max_observed}};
  j["J_classical"] = s.J_classical ? json(*s.J_classical) : json(nullptr);
  return j;
}

void write_artifacts(const ScenarioOutcome& outcome, const ScenarioConfig& cfg, const std::filesystem::path& dir,
                     bool plots) {
  std::filesystem::create_directories(dir);
  write_trajectory_csv((dir / "trajectory.csv").string(), outcome.trajectory);
  write_summary_csv((dir / "summary.csv").string(), {outcome.summary});

  json record;
  record["summary"] = summary_to_json(outcome.summary);
  record["method"] = to_string(cfg.method);
  record["switch_time"] = outcome.switch_time ? json(*outcome.switch_time) : json(nullptr);
  if (outcome.oc) {
    json stages = json::array();
    for (const auto& st : outcome.oc->stages) {
      stages.push_back({{"penalty_weight", st.penalty_weight},
                        {"iterations", st.iterations},
                        {"cost", st.cost},
                        {"max_Su", st.max_Su},
                        {"residual", st.residual}});
    }
    record["oc_stages"] = stages;
  }
  record["config"] = to_json(cfg);
  std::ofstream(dir / "summary.json") << record.dump(2) << '\n';

  if (!plots) return;
  const auto& traj = outcome.trajectory;
  PlotSeries infected{"I", traj.t, {}};
  PlotSeries control{"u", traj.t, traj.u};
  infected.y.reserve(traj.size());
  for (const auto& x : traj.x) infected.y.push_back(x.I);
  write_svg_plot(dir / "infected.svg", cfg.case_name + ": infected I versus time", "time (years)", "I (individuals)",
                 {infected});
  write_svg_plot(dir / "control.svg", cfg.case_name + ": PrEP control u versus time", "time (years)", "u", {control});
}

}  // namespace sicae
