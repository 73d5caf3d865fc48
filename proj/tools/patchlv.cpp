// patchlv: command-line front end for the patch competition model.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "patchlv/classify.hpp"
#include "patchlv/digraph.hpp"
#include "patchlv/io.hpp"

using namespace patchlv;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool verify = false;
  std::optional<int> jobs;
};

struct Result {
  std::string body;
  int code = 0;
};

Json envelope(const std::string& command, const RunConfig& cfg, Json result) {
  return Json{{"command", command}, {"seed", cfg.seed}, {"result", std::move(result)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::InvalidInput, message); }

std::string format_for(const RunConfig& cfg, const std::string& fallback, bool csv_ok) {
  const std::string format = cfg.output.format.value_or(fallback);
  if (format == "csv" && !csv_ok) invalid("this command writes json only");
  return format;
}

Result check_graph(const RunConfig& cfg) {
  format_for(cfg, "json", false);
  if (!cfg.graph) invalid("config has no graph block");
  const Digraph& g = *cfg.graph;
  const bool connected = is_strongly_connected(g);
  Json report{{"n", g.size()},
              {"strongly_connected", connected},
              {"sign_pattern_symmetric", is_sign_pattern_symmetric(g)},
              {"arc_count", g.arc_count()},
              {"arc_bound", 2 * (g.size() - 1)},
              {"certificate", nullptr}};
  bool balanced = false;
  if (connected) {
    const auto cert = certify_cycle_balance(g);
    balanced = cert.balanced;
    report["certificate"] = to_json(cert);
  } else {
    report["error"] = std::string(to_string(ErrorKind::NotStronglyConnected));
  }
  return {dump(envelope("check-graph", cfg, report)), connected && balanced ? 0 : 1};
}

Result identity(const RunConfig& cfg) {
  format_for(cfg, "json", false);
  if (!cfg.graph) invalid("config has no graph block");
  const Digraph& g = *cfg.graph;
  const IdentitySpec spec = cfg.identity.value_or(IdentitySpec{});
  const Index n = g.size();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> draw(-spec.scale, spec.scale);
  const Vector alpha = laplacian_cofactors(g);
  double max_dev = 0.0, max_rel = 0.0;
  for (int t = 0; t < spec.tables; ++t) {
    Matrix F = Matrix::Zero(n, n);
    if (!spec.zero) {
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) F(i, j) = draw(rng);
    }
    const auto sides = tree_cycle_identity(g, F);
    const double scale = std::max(1.0, (alpha.asDiagonal() * g.weights()).cwiseProduct(F).cwiseAbs().sum());
    const double dev = std::abs(sides.lhs - sides.rhs);
    max_dev = std::max(max_dev, dev);
    max_rel = std::max(max_rel, dev / scale);
  }
  const bool pass = max_rel <= 1e-9;
  const Json report{{"tables", spec.tables}, {"zero", spec.zero}, {"max_deviation", max_dev},
                    {"max_relative_deviation", max_rel}, {"pass", pass}};
  return {dump(envelope("identity", cfg, report)), pass ? 0 : 1};
}

Result simulate(const RunConfig& cfg) {
  const std::string format = format_for(cfg, "csv", true);
  if (!cfg.simulate) invalid("config has no simulate block");
  const PatchSystem sys = cfg.system();
  const SimulateSpec& spec = *cfg.simulate;
  State init;
  if (spec.init) {
    init = *spec.init;
  } else {
    std::mt19937_64 rng(cfg.seed);
    const double scale = std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
    std::uniform_real_distribution<double> draw(0.05 * scale, 1.5 * scale);
    init.u.resize(sys.size());
    init.v.resize(sys.size());
    for (Index i = 0; i < sys.size(); ++i) init.u(i) = draw(rng);
    for (Index i = 0; i < sys.size(); ++i) init.v(i) = draw(rng);
  }
  StepControl control;
  control.dt = spec.dt;
  control.keep_partial = true;
  control.sample_times = spec.sample_times;
  if (control.sample_times.empty()) {
    for (int k = 0; k < spec.samples; ++k) control.sample_times.push_back(spec.t_end * k / (spec.samples - 1));
    control.sample_times.back() = spec.t_end;
  }
  const Trajectory traj = integrate(sys, init, spec.t_end, control);
  const int code = traj.failure ? 1 : 0;
  if (format == "csv") return {trajectory_csv(traj, cfg.seed), code};
  Json states = Json::array();
  for (const auto& s : traj.states) states.push_back(state_to_json(s));
  Json report{{"times", traj.times}, {"states", states}, {"dt", traj.dt}, {"clipped", traj.clipped},
              {"halvings", traj.halvings}, {"failure", traj.failure ? Json(*traj.failure) : Json(nullptr)}};
  return {dump(envelope("simulate", cfg, report)), code};
}

Result classify(const RunConfig& cfg) {
  const std::string format = format_for(cfg, "json", true);
  const PatchSystem sys = cfg.system();
  const Classification result = classify_point(sys, cfg.tol);
  if (format == "json") return {dump(envelope("classify", cfg, to_json(result))), 0};
  SweepRow row;
  row.x = sys.mu_u();
  row.y = sys.mu_v();
  row.label = result.label;
  row.outcome = result.outcome.outcome;
  return {sweep_csv({row}, SweepPlane::Dispersal, false, cfg.seed), 0};
}

Result sweep_command(const RunConfig& cfg) {
  const std::string format = format_for(cfg, "csv", true);
  if (!cfg.sweep) invalid("config has no sweep block");
  SweepSpec spec;
  spec.plane = cfg.sweep->plane;
  spec.x = cfg.sweep->x.values();
  spec.y = cfg.sweep->y.values();
  spec.tol = cfg.tol;
  spec.verify = cfg.verify;
  spec.verify_settings = cfg.sweep->verify_settings;
  spec.seed = cfg.seed;
  spec.jobs = resolve_jobs(cfg.jobs);
  const auto rows = sweep(cfg.system(), spec);
  if (format == "csv") return {sweep_csv(rows, spec.plane, spec.verify, cfg.seed), 0};
  Json out = Json::array();
  for (const auto& row : rows) {
    Json r{{"x", row.x}, {"y", row.y}};
    if (row.label) {
      r["lambda_u"] = row.label->lambda_u;
      r["lambda_v"] = row.label->lambda_v;
      r["region"] = to_string(row.label->region);
    }
    if (row.outcome) r["outcome"] = to_string(*row.outcome);
    if (row.verified) r["verified"] = *row.verified;
    if (row.error) r["error"] = *row.error;
    out.push_back(r);
  }
  return {dump(envelope("sweep", cfg, Json{{"plane", to_string(spec.plane)}, {"rows", out}})), 0};
}

Result thresholds(const RunConfig& cfg) {
  format_for(cfg, "json", false);
  const ThresholdsSpec spec = cfg.thresholds.value_or(ThresholdsSpec{});
  const PatchSystem sys = cfg.system();
  Json report;
  if (spec.example == "A") {
    if (sys.p() != sys.q()) invalid("the competition thresholds need p = q");
    report = to_json(example_a_thresholds(sys.graph(), sys.p(), sys.mu_u(), sys.mu_v()));
  } else {
    const auto grid = spec.mu_grid.empty() ? default_mu_grid() : spec.mu_grid;
    report = to_json(example_b_analysis(sys.graph(), sys.p(), sys.q(), grid, cfg.tol));
  }
  report["example"] = spec.example;
  return {dump(envelope("thresholds", cfg, report)), 0};
}

Result limits(const RunConfig& cfg) {
  format_for(cfg, "json", false);
  const LimitsSpec spec = cfg.limits.value_or(LimitsSpec{});
  const PatchSystem sys = cfg.system();
  int code = 0;
  Json small;
  try {
    const State lim = small_mu_limit(sys.p(), sys.q());
    Json probes = Json::array();
    for (double mu : spec.small_mu) probes.push_back(to_json(small_mu_probe(sys.graph(), sys.p(), sys.q(), mu)));
    small = Json{{"limit", state_to_json(lim)}, {"probes", probes}};
  } catch (const Error& e) {
    small = Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
    code = 1;
  }
  Json probes = Json::array();
  for (double mu : spec.large_mu) probes.push_back(to_json(large_mu_probe(sys.graph(), sys.p(), mu)));
  const Json large{{"limit", vector_to_json(large_mu_limit(sys.graph(), sys.p()))}, {"probes", probes}};
  return {dump(envelope("limits", cfg, Json{{"small_mu", small}, {"large_mu", large}})), code};
}

RunConfig load(const Flags& flags) {
  std::ifstream in(flags.config);
  if (!in) invalid("cannot read config file " + flags.config);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  RunConfig cfg = config_from_json(doc);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.tol) {
    if (!(*flags.tol > 0.0)) invalid("--tol must be positive");
    cfg.tol = *flags.tol;
  }
  if (flags.verify) cfg.verify = true;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (flags.out) cfg.output.path = *flags.out;
  if (flags.format) cfg.output.format = *flags.format;
  return cfg;
}

int emit(const RunConfig& cfg, const Result& result) {
  if (cfg.output.path) {
    std::ofstream out(*cfg.output.path, std::ios::binary);
    if (!out) invalid("cannot write " + *cfg.output.path);
    out << result.body;
  } else {
    std::cout << result.body;
  }
  return result.code;
}

void report_error(const Error& e, bool json) {
  if (json) {
    std::cerr << Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
  } else {
    std::cerr << "error: " << e.what() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species Lotka-Volterra competition on patch networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", flags.out, "output file (default stdout)");
  app.add_option("--format", flags.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", flags.seed, "RNG seed");
  app.add_option("--tol", flags.tol, "classification tolerance");
  app.add_flag("--verify", flags.verify, "integrate sampled sweep cells to confirm the predicted outcome");
  app.add_option("--jobs", flags.jobs, "sweep workers (fallback: PATCHLV_JOBS)")->check(CLI::PositiveNumber);

  using Command = Result (*)(const RunConfig&);
  const std::pair<const char*, Command> commands[] = {
      {"check-graph", check_graph}, {"identity", identity}, {"simulate", simulate},
      {"classify", classify},       {"sweep", sweep_command}, {"thresholds", thresholds},
      {"limits", limits}};
  const char* help[] = {"connectivity and cycle-balance report",
                        "Tree-Cycle identity on random tables",
                        "integrate the model and write the trajectory",
                        "region and global outcome for one parameter point",
                        "classify a grid of dispersal or competition values",
                        "competition thresholds or dispersal crossings",
                        "small- and large-dispersal limit probes"};
  for (std::size_t k = 0; k < std::size(commands); ++k) app.add_subcommand(commands[k].first, help[k]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  bool json_errors = flags.format.value_or("json") == "json";
  try {
    const RunConfig cfg = load(flags);
    const std::string name = app.get_subcommands().front()->get_name();
    for (const auto& [cmd, fn] : commands) {
      if (name != cmd) continue;
      const bool csv_default = name == "simulate" || name == "sweep";
      json_errors = cfg.output.format.value_or(csv_default ? "csv" : "json") == "json";
      return emit(cfg, fn(cfg));
    }
    return 2;
  } catch (const Error& e) {
    report_error(e, json_errors);
    return e.kind() == ErrorKind::InvalidInput ? 2 : 1;
  } catch (const std::exception& e) {
    report_error(Error(ErrorKind::InvalidInput, e.what()), json_errors);
    return 2;
  }
}
