#include "patchlv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "patchlv/error.hpp"

namespace patchlv {

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::InvalidInput, message); }

double number(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_number()) invalid(where + "." + key + " must be a number");
  return v.get<double>();
}

std::optional<double> optional_number(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return number(obj, key, where);
}

long long integer(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) invalid(where + "." + key + " must be an integer");
  return v.get<long long>();
}

bool boolean(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_boolean()) invalid(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string text(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = obj.at(key);
  if (!v.is_string()) invalid(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const Json& j, const std::string& where) {
  if (!j.is_array()) invalid(where + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) invalid(where + " must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json optional_to_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

std::string error_kind_of(const std::string& message) { return message.substr(0, message.find(':')); }

Json cycle_to_json(const DirectedCycle<double>& cycle) {
  Json vertices = Json::array();
  for (Index v : cycle.vertices) vertices.push_back(v + 1);
  return Json{{"cycle", vertices}, {"weight", cycle.weight}, {"reverse_weight", cycle.reverse_weight}};
}

AxisSpec axis_from_json(const Json& j, const std::string& where) {
  require_keys(j, {"lo", "hi", "count", "log"}, {"lo", "hi", "count"}, where);
  AxisSpec axis;
  axis.lo = number(j, "lo", where);
  axis.hi = number(j, "hi", where);
  axis.count = static_cast<int>(integer(j, "count", where));
  if (j.contains("log")) axis.log = boolean(j, "log", where);
  axis.values();  // validates range and count
  return axis;
}

void require_positive(double x, const std::string& what) {
  if (!(x > 0.0) || !std::isfinite(x)) invalid(what + " must be positive");
}

void require_sorted_positive(const std::vector<double>& xs, const std::string& what) {
  if (xs.empty()) invalid(what + " must be nonempty");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    require_positive(xs[k], what);
    if (k > 0 && xs[k] <= xs[k - 1]) invalid(what + " must be strictly increasing");
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void require_keys(const Json& obj, const std::vector<std::string>& allowed, const std::vector<std::string>& required,
                  const std::string& where) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      invalid("unknown key \"" + item.key() + "\" in " + where);
    }
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) invalid("missing key \"" + key + "\" in " + where);
  }
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& where) {
  const auto xs = number_list(j, where);
  return Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size()));
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) invalid(where + " must be an array of rows");
  const Index rows = static_cast<Index>(j.size());
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(i)], where);
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) invalid(where + " rows must have equal length");
    m.row(i) = row.transpose();
  }
  return m;
}

Digraph graph_from_json(const Json& j) {
  require_keys(j, {"n", "arcs"}, {"n", "arcs"}, "graph");
  const long long n = integer(j, "n", "graph");
  if (n < 2 || n > 100000) invalid("graph.n must be at least 2");
  const Json& arcs = j.at("arcs");
  if (!arcs.is_array()) invalid("graph.arcs must be an array");
  std::vector<Digraph::Arc> list;
  for (const auto& arc : arcs) {
    require_keys(arc, {"from", "to", "weight"}, {"from", "to", "weight"}, "graph.arcs[]");
    const long long from = integer(arc, "from", "arc");
    const long long to = integer(arc, "to", "arc");
    if (from < 1 || from > n || to < 1 || to > n) invalid("arc endpoints must lie in 1..n");
    const double w = number(arc, "weight", "arc");
    if (!(w > 0.0) || !std::isfinite(w)) invalid("arc weights must be positive");
    list.push_back({static_cast<Index>(from - 1), static_cast<Index>(to - 1), w});
  }
  return Digraph::from_arcs(static_cast<Index>(n), list);
}

Json graph_to_json(const Digraph& g) {
  Json arcs = Json::array();
  for (const auto& arc : g.arcs()) arcs.push_back({{"from", arc.from + 1}, {"to", arc.to + 1}, {"weight", arc.weight}});
  return Json{{"n", g.size()}, {"arcs", arcs}};
}

PatchSystem model_from_json(const Digraph& g, const Json& j) {
  require_keys(j, {"p", "q", "b", "c", "mu_u", "mu_v"}, {"p", "q", "b", "c", "mu_u", "mu_v"}, "model");
  return PatchSystem(g, vector_from_json(j.at("p"), "p"), vector_from_json(j.at("q"), "q"), number(j, "b", "model"),
                     number(j, "c", "model"), number(j, "mu_u", "model"), number(j, "mu_v", "model"));
}

PatchSystem system_from_json(const Json& j) {
  require_keys(j, {"graph", "p", "q", "b", "c", "mu_u", "mu_v"}, {"graph", "p", "q", "b", "c", "mu_u", "mu_v"},
               "system");
  Json model = j;
  model.erase("graph");
  return model_from_json(graph_from_json(j.at("graph")), model);
}

Json system_to_json(const PatchSystem& sys) {
  return Json{{"graph", graph_to_json(sys.graph())}, {"p", vector_to_json(sys.p())}, {"q", vector_to_json(sys.q())},
              {"b", sys.b()}, {"c", sys.c()}, {"mu_u", sys.mu_u()}, {"mu_v", sys.mu_v()}};
}

Json state_to_json(const State& s) { return Json{{"u", vector_to_json(s.u)}, {"v", vector_to_json(s.v)}}; }

State state_from_json(const Json& j, const std::string& where) {
  require_keys(j, {"u", "v"}, {"u", "v"}, where);
  State s{vector_from_json(j.at("u"), where + ".u"), vector_from_json(j.at("v"), where + ".v")};
  if (s.u.size() != s.v.size()) invalid(where + ".u and .v must have equal length");
  return s;
}

Json to_json(const CycleBalanceCertificate<double>& cert) {
  Json out{{"balanced", cert.balanced}};
  if (cert.balanced) out["potential"] = vector_to_json(cert.potential);
  if (cert.violation) out["violation"] = cycle_to_json(*cert.violation);
  return out;
}

CycleBalanceCertificate<double> certificate_from_json(const Json& j) {
  require_keys(j, {"balanced", "potential", "violation"}, {"balanced"}, "certificate");
  CycleBalanceCertificate<double> cert;
  cert.balanced = boolean(j, "balanced", "certificate");
  if (cert.balanced) {
    if (!j.contains("potential") || j.contains("violation")) invalid("a balanced certificate carries a potential");
    cert.potential = vector_from_json(j.at("potential"), "certificate.potential");
    if (cert.potential.size() < 2 || (cert.potential.array() <= 0.0).any()) {
      invalid("certificate.potential must be positive");
    }
  } else {
    if (!j.contains("violation") || j.contains("potential")) invalid("an unbalanced certificate carries a violation");
    const Json& v = j.at("violation");
    require_keys(v, {"cycle", "weight", "reverse_weight"}, {"cycle", "weight", "reverse_weight"}, "violation");
    DirectedCycle<double> cycle;
    for (const auto& x : v.at("cycle")) {
      if (!x.is_number_integer() || x.get<long long>() < 1) invalid("violation.cycle must list 1-indexed vertices");
      cycle.vertices.push_back(static_cast<Index>(x.get<long long>() - 1));
    }
    if (cycle.vertices.size() < 2) invalid("violation.cycle must have at least two vertices");
    cycle.weight = number(v, "weight", "violation");
    cycle.reverse_weight = number(v, "reverse_weight", "violation");
    cert.violation = cycle;
  }
  return cert;
}

Json to_json(const SpectralReport<double>& report) {
  return Json{{"bound", report.bound},
              {"right_vec", vector_to_json(report.right_vec)},
              {"left_vec", vector_to_json(report.left_vec)},
              {"residual", report.residual},
              {"iterations", report.iterations}};
}

SpectralReport<double> spectral_report_from_json(const Json& j) {
  const std::vector<std::string> keys{"bound", "right_vec", "left_vec", "residual", "iterations"};
  require_keys(j, keys, keys, "spectral report");
  SpectralReport<double> r;
  r.bound = number(j, "bound", "spectral report");
  r.right_vec = vector_from_json(j.at("right_vec"), "right_vec");
  r.left_vec = vector_from_json(j.at("left_vec"), "left_vec");
  if (r.right_vec.size() != r.left_vec.size()) invalid("Perron vectors must have equal length");
  r.residual = number(j, "residual", "spectral report");
  r.iterations = static_cast<int>(integer(j, "iterations", "spectral report"));
  return r;
}

EquilibriumKind equilibrium_kind_from_string(const std::string& name) {
  for (auto k : {EquilibriumKind::Trivial, EquilibriumKind::SemitrivialU, EquilibriumKind::SemitrivialV,
                 EquilibriumKind::Coexistence}) {
    if (to_string(k) == name) return k;
  }
  invalid("unknown equilibrium kind \"" + name + "\"");
}

Verdict verdict_from_string(const std::string& name) {
  for (auto v : {Verdict::Stable, Verdict::NeutrallyStable, Verdict::Unstable}) {
    if (to_string(v) == name) return v;
  }
  invalid("unknown verdict \"" + name + "\"");
}

ThresholdKind threshold_kind_from_string(const std::string& name) {
  for (auto k : {ThresholdKind::ExampleA_bstar, ThresholdKind::ExampleA_cstar, ThresholdKind::ExampleB_mu}) {
    if (to_string(k) == name) return k;
  }
  invalid("unknown threshold kind \"" + name + "\"");
}

Json to_json(const EquilibriumReport& report) {
  return Json{{"kind", to_string(report.kind)},
              {"point", state_to_json(report.point)},
              {"residual", report.residual},
              {"jacobian_spectral_bound", report.jacobian_spectral_bound},
              {"lambda", report.lambda},
              {"k_cone_bound", optional_to_json(report.k_cone_bound)},
              {"verdict", to_string(report.verdict)},
              {"weak_competition", report.weak_competition},
              {"degenerate", report.degenerate}};
}

EquilibriumReport equilibrium_report_from_json(const Json& j) {
  const std::vector<std::string> keys{"kind",   "point",        "residual", "jacobian_spectral_bound",
                                      "lambda", "k_cone_bound", "verdict",  "weak_competition",
                                      "degenerate"};
  require_keys(j, keys, keys, "equilibrium report");
  EquilibriumReport r;
  r.kind = equilibrium_kind_from_string(text(j, "kind", "equilibrium report"));
  r.point = state_from_json(j.at("point"), "point");
  r.residual = number(j, "residual", "equilibrium report");
  r.jacobian_spectral_bound = number(j, "jacobian_spectral_bound", "equilibrium report");
  r.lambda = number(j, "lambda", "equilibrium report");
  r.k_cone_bound = optional_number(j, "k_cone_bound", "equilibrium report");
  r.verdict = verdict_from_string(text(j, "verdict", "equilibrium report"));
  r.weak_competition = boolean(j, "weak_competition", "equilibrium report");
  r.degenerate = boolean(j, "degenerate", "equilibrium report");
  return r;
}

Json to_json(const ContinuumFamily& family) {
  Json points = Json::array();
  for (const auto& p : family.points) points.push_back(state_to_json(p));
  return Json{{"rho_grid", family.rho_grid},
              {"base", vector_to_json(family.base)},
              {"c", family.c},
              {"points", points},
              {"residuals", family.residuals}};
}

ContinuumFamily continuum_family_from_json(const Json& j) {
  const std::vector<std::string> keys{"rho_grid", "base", "c", "points", "residuals"};
  require_keys(j, keys, keys, "continuum family");
  ContinuumFamily f;
  f.rho_grid = number_list(j.at("rho_grid"), "rho_grid");
  f.base = vector_from_json(j.at("base"), "base");
  f.c = number(j, "c", "continuum family");
  if (!j.at("points").is_array()) invalid("points must be an array");
  for (const auto& p : j.at("points")) f.points.push_back(state_from_json(p, "points[]"));
  f.residuals = number_list(j.at("residuals"), "residuals");
  if (f.points.size() != f.rho_grid.size() || f.residuals.size() != f.rho_grid.size()) {
    invalid("continuum family arrays must have equal length");
  }
  return f;
}

Json to_json(const Classification& result) {
  return Json{{"region", to_string(result.label.region)},
              {"lambda_u", result.label.lambda_u},
              {"lambda_v", result.label.lambda_v},
              {"tol", result.label.tol},
              {"outcome", to_string(result.outcome.outcome)},
              {"u_star", vector_to_json(result.u_star)},
              {"v_star", vector_to_json(result.v_star)},
              {"degenerate_pair", result.degenerate_pair},
              {"equilibrium", result.outcome.equilibrium ? to_json(*result.outcome.equilibrium) : Json(nullptr)},
              {"family", result.outcome.family ? to_json(*result.outcome.family) : Json(nullptr)}};
}

Classification classification_from_json(const Json& j) {
  const std::vector<std::string> keys{"region", "lambda_u", "lambda_v",        "tol",         "outcome",
                                      "u_star", "v_star",   "degenerate_pair", "equilibrium", "family"};
  require_keys(j, keys, keys, "classification");
  Classification c;
  c.label.region = region_from_string(text(j, "region", "classification"));
  c.label.lambda_u = number(j, "lambda_u", "classification");
  c.label.lambda_v = number(j, "lambda_v", "classification");
  c.label.tol = number(j, "tol", "classification");
  c.outcome.outcome = outcome_from_string(text(j, "outcome", "classification"));
  c.u_star = vector_from_json(j.at("u_star"), "u_star");
  c.v_star = vector_from_json(j.at("v_star"), "v_star");
  c.degenerate_pair = boolean(j, "degenerate_pair", "classification");
  if (!j.at("equilibrium").is_null()) c.outcome.equilibrium = equilibrium_report_from_json(j.at("equilibrium"));
  if (!j.at("family").is_null()) c.outcome.family = continuum_family_from_json(j.at("family"));
  if ((c.outcome.outcome == Outcome::Continuum) != c.outcome.family.has_value()) {
    invalid("a continuum family accompanies exactly the Continuum outcome");
  }
  return c;
}

Json to_json(const ThresholdReport& report) {
  Json out{{"kind", to_string(report.kind)},
           {"value", report.value},
           {"bracket", {report.bracket.first, report.bracket.second}},
           {"sign_table", {report.sign_table.first, report.sign_table.second}},
           {"iterations", report.iterations}};
  if (!report.which.empty()) out["which"] = report.which;
  return out;
}

ThresholdReport threshold_report_from_json(const Json& j) {
  require_keys(j, {"kind", "value", "bracket", "sign_table", "iterations", "which"},
               {"kind", "value", "bracket", "sign_table", "iterations"}, "threshold report");
  ThresholdReport r;
  r.kind = threshold_kind_from_string(text(j, "kind", "threshold report"));
  r.value = number(j, "value", "threshold report");
  const auto bracket = number_list(j.at("bracket"), "bracket");
  const auto signs = number_list(j.at("sign_table"), "sign_table");
  if (bracket.size() != 2 || signs.size() != 2) invalid("bracket and sign_table hold two numbers");
  if (!(bracket[0] <= r.value && r.value <= bracket[1])) invalid("threshold value lies outside its bracket");
  r.bracket = {bracket[0], bracket[1]};
  r.sign_table = {signs[0], signs[1]};
  r.iterations = static_cast<int>(integer(j, "iterations", "threshold report"));
  if (j.contains("which")) r.which = text(j, "which", "threshold report");
  return r;
}

Json to_json(const ExampleAThresholds& report) {
  return Json{{"b_star", to_json(report.b_star)}, {"c_star", to_json(report.c_star)}};
}

Json to_json(const ExampleBReport& report) {
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json r{{"mu", row.mu}};
    if (row.error) {
      r["error"] = *row.error;
    } else {
      r["region"] = to_string(row.label.region);
      r["lambda_u"] = row.label.lambda_u;
      r["lambda_v"] = row.label.lambda_v;
      r["outcome"] = to_string(row.outcome);
    }
    rows.push_back(r);
  }
  Json crossings = Json::array();
  for (const auto& t : report.crossings) crossings.push_back(to_json(t));
  return Json{{"dominance", report.dominance}, {"theta_gap", report.theta_gap}, {"rows", rows},
              {"crossings", crossings}};
}

Json to_json(const LimitProbe& probe) {
  return Json{{"mu", probe.mu}, {"distance", probe.found ? Json(probe.distance) : Json(nullptr)},
              {"found", probe.found}};
}

std::string trajectory_csv(const Trajectory& traj, std::optional<std::uint64_t> seed) {
  std::ostringstream out;
  if (seed) out << "# seed=" << *seed << '\n';
  if (traj.failure) out << "# partial: " << *traj.failure << '\n';
  const Index n = traj.states.empty() ? 0 : traj.states.front().u.size();
  out << 't';
  for (Index i = 1; i <= n; ++i) out << ",u_" << i;
  for (Index i = 1; i <= n; ++i) out << ",v_" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << format_double(traj.times[k]);
    for (Index i = 0; i < n; ++i) out << ',' << format_double(traj.states[k].u(i));
    for (Index i = 0; i < n; ++i) out << ',' << format_double(traj.states[k].v(i));
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows, SweepPlane plane, bool verify,
                      std::optional<std::uint64_t> seed) {
  std::ostringstream out;
  if (seed) out << "# seed=" << *seed << '\n';
  out << (plane == SweepPlane::Dispersal ? "mu_u,mu_v" : "b,c") << ",lambda_u,lambda_v,region,outcome";
  if (verify) out << ",verified";
  out << '\n';
  for (const auto& row : rows) {
    out << format_double(row.x) << ',' << format_double(row.y) << ',';
    if (row.label) {
      out << format_double(row.label->lambda_u) << ',' << format_double(row.label->lambda_v) << ','
          << to_string(row.label->region) << ',';
    } else {
      out << "nan,nan,error,";
    }
    out << (row.outcome ? to_string(*row.outcome) : row.error ? error_kind_of(*row.error) : "error");
    if (verify) out << ',' << (row.verified ? (*row.verified ? "true" : "false") : "");
    out << '\n';
  }
  return out.str();
}

CsvTable parse_csv(const std::string& text_in) {
  CsvTable table;
  std::istringstream in(text_in);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
    } else if (table.header.empty()) {
      table.header = split(line);
    } else {
      table.rows.push_back(split(line));
      if (table.rows.back().size() != table.header.size()) invalid("csv row width differs from the header");
    }
  }
  return table;
}

PatchSystem RunConfig::system() const {
  if (!graph) invalid("config has no graph block");
  if (!model) invalid("config has no model block");
  return model_from_json(*graph, *model);
}

RunConfig config_from_json(const Json& j) {
  require_keys(j,
               {"graph", "model", "identity", "simulate", "sweep", "thresholds", "limits", "seed", "tol", "verify",
                "jobs", "output"},
               {}, "config");
  RunConfig cfg;
  if (j.contains("graph")) cfg.graph = graph_from_json(j.at("graph"));
  if (j.contains("model")) {
    if (!cfg.graph) invalid("config.model requires config.graph");
    // Schema only: connectivity and positivity are checked by the commands.
    const Json& m = j.at("model");
    require_keys(m, {"p", "q", "b", "c", "mu_u", "mu_v"}, {"p", "q", "b", "c", "mu_u", "mu_v"}, "model");
    for (const char* key : {"p", "q"}) {
      if (vector_from_json(m.at(key), key).size() != cfg.graph->size()) {
        invalid(std::string("model.") + key + " must have length n");
      }
    }
    for (const char* key : {"b", "c", "mu_u", "mu_v"}) number(m, key, "model");
    cfg.model = m;
  }
  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) {
      invalid("config.seed must be a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("tol")) {
    cfg.tol = number(j, "tol", "config");
    require_positive(cfg.tol, "config.tol");
  }
  if (j.contains("verify")) cfg.verify = boolean(j, "verify", "config");
  if (j.contains("jobs")) {
    const long long jobs = integer(j, "jobs", "config");
    if (jobs < 1) invalid("config.jobs must be positive");
    cfg.jobs = static_cast<int>(std::min(jobs, 1024LL));
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    require_keys(o, {"path", "format"}, {}, "output");
    if (o.contains("path")) cfg.output.path = text(o, "path", "output");
    if (o.contains("format")) {
      cfg.output.format = text(o, "format", "output");
      if (*cfg.output.format != "csv" && *cfg.output.format != "json") invalid("output.format must be csv or json");
    }
  }
  if (j.contains("identity")) {
    const Json& b = j.at("identity");
    require_keys(b, {"tables", "scale", "zero"}, {}, "identity");
    IdentitySpec spec;
    if (b.contains("tables")) spec.tables = static_cast<int>(integer(b, "tables", "identity"));
    if (spec.tables < 1) invalid("identity.tables must be positive");
    if (b.contains("scale")) spec.scale = number(b, "scale", "identity");
    require_positive(spec.scale, "identity.scale");
    if (b.contains("zero")) spec.zero = boolean(b, "zero", "identity");
    cfg.identity = spec;
  }
  if (j.contains("simulate")) {
    const Json& b = j.at("simulate");
    require_keys(b, {"init", "t_end", "sample_times", "samples", "dt"}, {"t_end"}, "simulate");
    SimulateSpec spec;
    spec.t_end = number(b, "t_end", "simulate");
    require_positive(spec.t_end, "simulate.t_end");
    if (b.contains("init") && !(b.at("init").is_string() && b.at("init").get<std::string>() == "random")) {
      spec.init = state_from_json(b.at("init"), "simulate.init");
      if (cfg.graph && spec.init->u.size() != cfg.graph->size()) invalid("simulate.init has the wrong length");
      if ((spec.init->u.array() < 0.0).any() || (spec.init->v.array() < 0.0).any()) {
        invalid("simulate.init must be nonnegative");
      }
    }
    if (b.contains("sample_times")) {
      spec.sample_times = number_list(b.at("sample_times"), "simulate.sample_times");
      if (spec.sample_times.empty()) invalid("simulate.sample_times must be nonempty");
      for (std::size_t k = 0; k < spec.sample_times.size(); ++k) {
        const double t = spec.sample_times[k];
        if (!(t >= 0.0 && t <= spec.t_end) || (k > 0 && t <= spec.sample_times[k - 1])) {
          invalid("simulate.sample_times must be increasing within [0, t_end]");
        }
      }
    }
    if (b.contains("samples")) spec.samples = static_cast<int>(integer(b, "samples", "simulate"));
    if (spec.samples < 2) invalid("simulate.samples must be at least 2");
    if (b.contains("dt")) {
      spec.dt = number(b, "dt", "simulate");
      require_positive(spec.dt, "simulate.dt");
    }
    cfg.simulate = spec;
  }
  if (j.contains("sweep")) {
    const Json& b = j.at("sweep");
    require_keys(b, {"plane", "x", "y", "verify"}, {"x", "y"}, "sweep");
    SweepConfig spec;
    if (b.contains("plane")) {
      const std::string plane = text(b, "plane", "sweep");
      if (plane == "dispersal") {
        spec.plane = SweepPlane::Dispersal;
      } else if (plane == "competition") {
        spec.plane = SweepPlane::Competition;
      } else {
        invalid("sweep.plane must be dispersal or competition");
      }
    }
    spec.x = axis_from_json(b.at("x"), "sweep.x");
    spec.y = axis_from_json(b.at("y"), "sweep.y");
    if (b.contains("verify")) {
      const Json& v = b.at("verify");
      require_keys(v, {"stride", "initial_states", "t_end", "dt", "tol"}, {}, "sweep.verify");
      auto& s = spec.verify_settings;
      if (v.contains("stride")) s.stride = static_cast<int>(integer(v, "stride", "sweep.verify"));
      if (v.contains("initial_states")) s.initial_states = static_cast<int>(integer(v, "initial_states", "sweep.verify"));
      if (s.stride < 1 || s.initial_states < 1) invalid("sweep.verify stride and initial_states must be positive");
      if (v.contains("t_end")) s.t_end = number(v, "t_end", "sweep.verify");
      require_positive(s.t_end, "sweep.verify.t_end");
      if (v.contains("dt")) {
        s.dt = number(v, "dt", "sweep.verify");
        require_positive(s.dt, "sweep.verify.dt");
      }
      if (v.contains("tol")) s.tol = number(v, "tol", "sweep.verify");
      require_positive(s.tol, "sweep.verify.tol");
    }
    cfg.sweep = spec;
  }
  if (j.contains("thresholds")) {
    const Json& b = j.at("thresholds");
    require_keys(b, {"example", "mu_grid"}, {"example"}, "thresholds");
    ThresholdsSpec spec;
    spec.example = text(b, "example", "thresholds");
    if (spec.example != "A" && spec.example != "B") invalid("thresholds.example must be A or B");
    if (b.contains("mu_grid")) {
      spec.mu_grid = number_list(b.at("mu_grid"), "thresholds.mu_grid");
      require_sorted_positive(spec.mu_grid, "thresholds.mu_grid");
    }
    cfg.thresholds = spec;
  }
  if (j.contains("limits")) {
    const Json& b = j.at("limits");
    require_keys(b, {"small_mu", "large_mu"}, {}, "limits");
    LimitsSpec spec;
    if (b.contains("small_mu")) spec.small_mu = number_list(b.at("small_mu"), "limits.small_mu");
    if (b.contains("large_mu")) spec.large_mu = number_list(b.at("large_mu"), "limits.large_mu");
    for (double mu : spec.small_mu) require_positive(mu, "limits.small_mu");
    for (double mu : spec.large_mu) require_positive(mu, "limits.large_mu");
    cfg.limits = spec;
  }
  return cfg;
}

}  // namespace patchlv
