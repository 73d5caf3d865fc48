#ifndef PATCHLV_IO_HPP
#define PATCHLV_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchlv/classify.hpp"
#include "patchlv/digraph.hpp"
#include "patchlv/dynamics.hpp"
#include "patchlv/spectral.hpp"

namespace patchlv {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough to re-parse to the same double.
std::string format_double(double x);

/// Throws InvalidInput when `obj` is not an object or has a key outside `allowed`.
void require_keys(const Json& obj, const std::vector<std::string>& allowed, const std::vector<std::string>& required,
                  const std::string& where);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& where);
/// Row-major nested arrays.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where);

/// {"n": int, "arcs": [{"from": j, "to": i, "weight": a_ij}, ...]} with 1-indexed patches.
Digraph graph_from_json(const Json& j);
Json graph_to_json(const Digraph& g);

/// {"graph": {...}, "p": [...], "q": [...], "b": x, "c": x, "mu_u": x, "mu_v": x}.
PatchSystem system_from_json(const Json& j);
Json system_to_json(const PatchSystem& sys);

/// The model block of a run configuration, the system fields without "graph".
PatchSystem model_from_json(const Digraph& g, const Json& j);

Json state_to_json(const State& s);
State state_from_json(const Json& j, const std::string& where);

Json to_json(const CycleBalanceCertificate<double>& cert);
Json to_json(const SpectralReport<double>& report);
Json to_json(const EquilibriumReport& report);
Json to_json(const ContinuumFamily& family);
Json to_json(const Classification& result);
Json to_json(const ThresholdReport& report);
Json to_json(const ExampleAThresholds& report);
Json to_json(const ExampleBReport& report);
Json to_json(const LimitProbe& probe);

// Validators: re-parse an emitted report, rejecting missing or unknown keys.
CycleBalanceCertificate<double> certificate_from_json(const Json& j);
SpectralReport<double> spectral_report_from_json(const Json& j);
EquilibriumReport equilibrium_report_from_json(const Json& j);
ContinuumFamily continuum_family_from_json(const Json& j);
Classification classification_from_json(const Json& j);
ThresholdReport threshold_report_from_json(const Json& j);

EquilibriumKind equilibrium_kind_from_string(const std::string& name);
Verdict verdict_from_string(const std::string& name);
ThresholdKind threshold_kind_from_string(const std::string& name);

/// `t,u_1..u_n,v_1..v_n` rows after a `# seed=N` comment line.
std::string trajectory_csv(const Trajectory& traj, std::optional<std::uint64_t> seed);

/// `mu_u,mu_v,...` or `b,c,...` rows followed by `lambda_u,lambda_v,region,outcome[,verified]`.
/// Failed cells carry nan eigenvalues, region "error" and the error kind as outcome.
std::string sweep_csv(const std::vector<SweepRow>& rows, SweepPlane plane, bool verify,
                      std::optional<std::uint64_t> seed);

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text);

struct OutputSpec {
  std::optional<std::string> path;
  std::optional<std::string> format;  // "csv" or "json"
};

struct IdentitySpec {
  int tables = 100;
  double scale = 1.0;  // entries of F drawn uniformly from [-scale, scale]
  bool zero = false;   // F = 0
};

struct SimulateSpec {
  std::optional<State> init;  // absent: random interior state from the seed
  double t_end = 100.0;
  std::vector<double> sample_times;  // empty: `samples` evenly spaced points on [0, t_end]
  int samples = 101;
  double dt = 0.0;
};

struct SweepConfig {
  SweepPlane plane = SweepPlane::Dispersal;
  AxisSpec x;
  AxisSpec y;
  VerifySettings verify_settings;
};

struct ThresholdsSpec {
  std::string example = "A";   // "A": r = p, thresholds b*, c*; "B": crossings along mu
  std::vector<double> mu_grid;  // Example B; empty: default grid
};

struct LimitsSpec {
  std::vector<double> small_mu{1e-2, 1e-3, 1e-4};
  std::vector<double> large_mu{1e1, 1e2, 1e3, 1e4};
};

struct RunConfig {
  std::optional<Digraph> graph;
  std::optional<Json> model;  // validated lazily against the graph
  std::optional<IdentitySpec> identity;
  std::optional<SimulateSpec> simulate;
  std::optional<SweepConfig> sweep;
  std::optional<ThresholdsSpec> thresholds;
  std::optional<LimitsSpec> limits;
  std::uint64_t seed = 0;
  double tol = kClassifyTol;
  bool verify = false;
  std::optional<int> jobs;
  OutputSpec output;

  /// Graph plus model; throws InvalidInput when either block is missing.
  PatchSystem system() const;
};

/// Schema-checks the whole document before returning; unknown keys are errors.
RunConfig config_from_json(const Json& j);

}  // namespace patchlv

#endif  // PATCHLV_IO_HPP
