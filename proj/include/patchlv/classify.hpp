#ifndef PATCHLV_CLASSIFY_HPP
#define PATCHLV_CLASSIFY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchlv/dynamics.hpp"

namespace patchlv {

inline constexpr double kClassifyTol = 1e-7;

enum class Region { S_u, S_v, S_minus, S_u0, S_v0, S_00 };
enum class Outcome { E1_GAS, E2_GAS, Coexistence_GAS, Continuum };

std::string to_string(Region region);
std::string to_string(Outcome outcome);
Region region_from_string(const std::string& name);
Outcome outcome_from_string(const std::string& name);

struct RegionLabel {
  Region region = Region::S_minus;
  double lambda_u = 0.0;  // lambda_1(mu_v, q - b w*(mu_u, p)); > 0 means v cannot invade E1
  double lambda_v = 0.0;  // lambda_1(mu_u, p - c w*(mu_v, q)); > 0 means u cannot invade E2
  double tol = kClassifyTol;
};

/// Region from the two principal eigenvalues. Throws InvariantViolated when
/// both exceed tol, which the theory rules out under weak competition.
RegionLabel label_region(double lambda_u, double lambda_v, double tol = kClassifyTol);

struct GlobalOutcome {
  Outcome outcome = Outcome::Coexistence_GAS;
  std::optional<EquilibriumReport> equilibrium;  // E1, E2 or the coexistence point
  std::optional<ContinuumFamily> family;         // Continuum only
};

struct Classification {
  RegionLabel label;
  GlobalOutcome outcome;
  Vector u_star;  // w*(mu_u, p)
  Vector v_star;  // w*(mu_v, q)
  bool degenerate_pair = false;  // |bc - 1| <= tol and ||u* - c v*|| <= tol ||u*||
};

/// Requires mu_u, mu_v > 0, a cycle-balanced network and bc <= 1.
Classification classify_point(const PatchSystem& sys, double tol = kClassifyTol);

/// Throws AssumptionViolated unless the system satisfies the classifier's hypotheses.
void require_classifiable(const PatchSystem& sys);

struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
  bool log = true;

  std::vector<double> values() const;
};

enum class SweepPlane { Dispersal, Competition };

std::string to_string(SweepPlane plane);

struct VerifySettings {
  int stride = 5;         // every stride-th cell along both axes is sampled
  int initial_states = 5;
  double t_end = 2000.0;
  double dt = 0.0;        // 0 picks min(0.05, 0.25 / maxrate)
  double tol = 1e-4;
};

struct SweepSpec {
  SweepPlane plane = SweepPlane::Dispersal;
  std::vector<double> x;  // mu_u or b
  std::vector<double> y;  // mu_v or c
  double tol = kClassifyTol;
  bool verify = false;
  VerifySettings verify_settings;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct SweepRow {
  double x = 0.0;
  double y = 0.0;
  std::optional<RegionLabel> label;
  std::optional<Outcome> outcome;
  std::optional<bool> verified;  // present on sampled cells when verification is on
  std::optional<std::string> error;
};

/// One row per grid cell in row-major order (x outer, y inner). Cells are
/// classified concurrently on `jobs` workers; a failing cell records its
/// error and the sweep continues.
std::vector<SweepRow> sweep(const PatchSystem& base, const SweepSpec& spec);

struct VerifyReport {
  bool ok = false;
  double max_distance = 0.0;
  std::vector<double> distances;
};

/// Integrates from random interior states and measures the distance of each
/// end state to the predicted attractor (a point, or the continuum segment).
VerifyReport verify_outcome(const PatchSystem& sys, const Classification& result, std::uint64_t seed,
                            const VerifySettings& settings);

/// Distance from `state` to the segment {(rho w, (1 - rho) w / c) : rho in [0, 1]}
/// and the minimizing rho.
std::pair<double, double> distance_to_continuum(const State& state, const Vector& w, double c);

enum class ThresholdKind { ExampleA_bstar, ExampleA_cstar, ExampleB_mu };

std::string to_string(ThresholdKind kind);

struct ThresholdReport {
  ThresholdKind kind = ThresholdKind::ExampleA_bstar;
  double value = 0.0;
  std::pair<double, double> bracket;
  std::pair<double, double> sign_table;  // lambda_1 at the bracket ends
  int iterations = 0;
  std::string which;  // ExampleB_mu: "lambda_u" or "lambda_v"
};

struct ExampleAThresholds {
  ThresholdReport b_star;
  ThresholdReport c_star;
};

/// b* is the zero of b -> lambda_1(mu_v, r - b w*(mu_u, r)) and c* the zero of
/// c -> lambda_1(mu_u, r - c w*(mu_v, r)), both by bisection. Equal dispersal
/// rates give b* = c* = 1.
ExampleAThresholds example_a_thresholds(const Digraph& graph, const Vector& r, double mu_u, double mu_v,
                                        double rel_width = 1e-12);

struct ExampleBRow {
  double mu = 0.0;
  RegionLabel label;
  Outcome outcome = Outcome::Coexistence_GAS;
  std::optional<std::string> error;
};

struct ExampleBReport {
  std::vector<ExampleBRow> rows;
  std::vector<ThresholdReport> crossings;  // every sign change of lambda_u and lambda_v
  int dominance = 0;  // +1 when p > q componentwise, -1 when p < q, 0 otherwise
  double theta_gap = 0.0;  // sum_j theta_j (p_j - q_j)
};

/// 60 log-spaced values on [1e-3, 1e3].
std::vector<double> default_mu_grid();

/// b = c = 1 and mu_u = mu_v = mu along the grid.
ExampleBReport example_b_analysis(const Digraph& graph, const Vector& p, const Vector& q,
                                  const std::vector<double>& mu_grid, double tol = kClassifyTol);

/// (u0, v0): u0 = p on {p > q}, v0 = q on {p < q}, zero elsewhere.
State small_mu_limit(const Vector& p, const Vector& q);

struct LimitProbe {
  double mu = 0.0;
  double distance = 0.0;
  bool found = true;
};

/// Distance from the coexistence equilibrium at dispersal mu (b = c = 1) to (u0, v0).
LimitProbe small_mu_probe(const Digraph& graph, const Vector& p, const Vector& q, double mu);

/// (sum theta_i p_i / sum theta_i^2) theta, the large-dispersal limit of w*(mu, p).
Vector large_mu_limit(const Digraph& graph, const Vector& p);

/// ||w*(mu, p) - large_mu_limit||_inf.
LimitProbe large_mu_probe(const Digraph& graph, const Vector& p, double mu);

/// Worker count from an explicit value, else PATCHLV_JOBS, else 1.
int resolve_jobs(std::optional<int> requested);

}  // namespace patchlv

#endif  // PATCHLV_CLASSIFY_HPP
