#include "patchlv/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "patchlv/error.hpp"
#include "patchlv/spectral.hpp"

namespace patchlv {

namespace {

double inf_norm(const Vector& x) { return x.cwiseAbs().maxCoeff(); }

double state_distance(const State& a, const State& b) {
  return std::max(inf_norm(a.u - b.u), inf_norm(a.v - b.v));
}

template <typename F>
ThresholdReport bisect(F&& f, double lo, double hi, ThresholdKind kind, double rel_width, bool log_scale) {
  ThresholdReport report;
  report.kind = kind;
  double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi >= 0.0) && !(flo >= 0.0 && fhi < 0.0)) {
    throw Error(ErrorKind::InvariantViolated, "threshold bracket does not straddle a sign change");
  }
  const bool rising = flo < 0.0;
  int it = 0;
  for (; it < 200 && hi - lo > rel_width * std::abs(hi); ++it) {
    const double mid = log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == rising) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  report.value = log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
  report.bracket = {lo, hi};
  report.sign_table = {flo, fhi};
  report.iterations = it;
  return report;
}

Classification classify_checked(const PatchSystem& sys, double tol) {
  Classification out;
  const Matrix& L = sys.L();
  out.u_star = single_equilibrium(sys.graph(), sys.mu_u(), sys.p());
  out.v_star = single_equilibrium(sys.graph(), sys.mu_v(), sys.q());
  const Vector hu = sys.q() - sys.b() * out.u_star;
  const Vector hv = sys.p() - sys.c() * out.v_star;
  out.label = label_region(lambda1(sys.mu_v(), hu, L), lambda1(sys.mu_u(), hv, L), tol);
  out.degenerate_pair = std::abs(sys.b() * sys.c() - 1.0) <= tol &&
                        inf_norm(out.u_star - sys.c() * out.v_star) <= tol * inf_norm(out.u_star);

  const Index n = sys.size();
  switch (out.label.region) {
    case Region::S_u:
    case Region::S_u0:
      out.outcome.outcome = Outcome::E1_GAS;
      out.outcome.equilibrium =
          assess_equilibrium(sys, EquilibriumKind::SemitrivialU, {out.u_star, Vector::Zero(n)});
      break;
    case Region::S_v:
    case Region::S_v0:
      out.outcome.outcome = Outcome::E2_GAS;
      out.outcome.equilibrium =
          assess_equilibrium(sys, EquilibriumKind::SemitrivialV, {Vector::Zero(n), out.v_star});
      break;
    case Region::S_minus: {
      out.outcome.outcome = Outcome::Coexistence_GAS;
      auto eq = coexistence_equilibrium(sys);
      if (!eq) throw Error(ErrorKind::NonConvergence, "no coexistence equilibrium found in S_minus");
      out.outcome.equilibrium = std::move(*eq);
      break;
    }
    case Region::S_00:
      out.outcome.outcome = Outcome::Continuum;
      out.outcome.family = continuum_family(sys, rho_grid(11));
      break;
  }
  return out;
}

}  // namespace

std::string to_string(Region region) {
  switch (region) {
    case Region::S_u: return "S_u";
    case Region::S_v: return "S_v";
    case Region::S_minus: return "S_minus";
    case Region::S_u0: return "S_u0";
    case Region::S_v0: return "S_v0";
    case Region::S_00: return "S_00";
  }
  return "Unknown";
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::E1_GAS: return "E1_GAS";
    case Outcome::E2_GAS: return "E2_GAS";
    case Outcome::Coexistence_GAS: return "Coexistence_GAS";
    case Outcome::Continuum: return "Continuum";
  }
  return "Unknown";
}

Region region_from_string(const std::string& name) {
  for (Region r : {Region::S_u, Region::S_v, Region::S_minus, Region::S_u0, Region::S_v0, Region::S_00}) {
    if (to_string(r) == name) return r;
  }
  throw Error(ErrorKind::InvalidInput, "unknown region '" + name + "'");
}

Outcome outcome_from_string(const std::string& name) {
  for (Outcome o : {Outcome::E1_GAS, Outcome::E2_GAS, Outcome::Coexistence_GAS, Outcome::Continuum}) {
    if (to_string(o) == name) return o;
  }
  throw Error(ErrorKind::InvalidInput, "unknown outcome '" + name + "'");
}

std::string to_string(SweepPlane plane) { return plane == SweepPlane::Dispersal ? "dispersal" : "competition"; }

std::string to_string(ThresholdKind kind) {
  switch (kind) {
    case ThresholdKind::ExampleA_bstar: return "ExampleA_bstar";
    case ThresholdKind::ExampleA_cstar: return "ExampleA_cstar";
    case ThresholdKind::ExampleB_mu: return "ExampleB_mu";
  }
  return "Unknown";
}

RegionLabel label_region(double lambda_u, double lambda_v, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "classification tolerance must be positive");
  RegionLabel label;
  label.lambda_u = lambda_u;
  label.lambda_v = lambda_v;
  label.tol = tol;
  const bool u_pos = lambda_u > tol, v_pos = lambda_v > tol;
  const bool u_zero = std::abs(lambda_u) <= tol, v_zero = std::abs(lambda_v) <= tol;
  if (u_pos && v_pos) {
    throw Error(ErrorKind::InvariantViolated, "both semitrivial equilibria are linearly stable");
  }
  if (u_pos) {
    label.region = Region::S_u;
  } else if (v_pos) {
    label.region = Region::S_v;
  } else if (u_zero && v_zero) {
    label.region = Region::S_00;
  } else if (u_zero) {
    label.region = Region::S_u0;
  } else if (v_zero) {
    label.region = Region::S_v0;
  } else {
    label.region = Region::S_minus;
  }
  return label;
}

void require_classifiable(const PatchSystem& sys) {
  if (!(sys.mu_u() > 0.0 && sys.mu_v() > 0.0)) {
    throw Error(ErrorKind::AssumptionViolated, "classification needs mu_u, mu_v > 0");
  }
  if (!sys.cycle_balanced()) throw Error(ErrorKind::AssumptionViolated, "patch network is not cycle-balanced");
  if (sys.b() * sys.c() > 1.0 + 1e-12) {
    throw Error(ErrorKind::AssumptionViolated, "classification needs weak competition bc <= 1");
  }
}

Classification classify_point(const PatchSystem& sys, double tol) {
  require_classifiable(sys);
  return classify_checked(sys, tol);
}

std::vector<double> AxisSpec::values() const {
  if (count < 1) throw Error(ErrorKind::InvalidInput, "axis needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::InvalidInput, "axis bounds must satisfy 0 < lo <= hi");
  }
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) {
    const double s = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out[k] = log ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
  }
  out.back() = count == 1 ? lo : hi;
  return out;
}

std::pair<double, double> distance_to_continuum(const State& state, const Vector& w, double c) {
  // x(rho) = a + rho d with a = (0, w / c) and d = (w, -w / c).
  const double dd = w.squaredNorm() * (1.0 + 1.0 / (c * c));
  const double proj = (state.u.dot(w) - (state.v - w / c).dot(w / c)) / dd;
  const double rho = std::clamp(proj, 0.0, 1.0);
  const State on{rho * w, (1.0 - rho) * w / c};
  return {state_distance(state, on), rho};
}

VerifyReport verify_outcome(const PatchSystem& sys, const Classification& result, std::uint64_t seed,
                            const VerifySettings& settings) {
  std::mt19937_64 rng(seed);
  const double scale = std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
  std::uniform_real_distribution<double> draw(0.05 * scale, 1.5 * scale);
  const Index n = sys.size();

  StepControl control;
  control.dt = settings.dt > 0.0 ? settings.dt : std::min(0.05, 0.25 / max_rate(sys));

  VerifyReport report;
  for (int k = 0; k < settings.initial_states; ++k) {
    State init{Vector(n), Vector(n)};
    for (Index i = 0; i < n; ++i) init.u(i) = draw(rng);
    for (Index i = 0; i < n; ++i) init.v(i) = draw(rng);
    const State end = integrate(sys, init, settings.t_end, control).states.back();
    double d = 0.0;
    if (result.outcome.outcome == Outcome::Continuum) {
      d = distance_to_continuum(end, result.u_star, sys.c()).first;
    } else {
      d = state_distance(end, result.outcome.equilibrium->point);
    }
    report.distances.push_back(d);
    report.max_distance = std::max(report.max_distance, d);
  }
  report.ok = report.max_distance <= settings.tol;
  return report;
}

std::vector<SweepRow> sweep(const PatchSystem& base, const SweepSpec& spec) {
  if (spec.x.empty() || spec.y.empty()) throw Error(ErrorKind::InvalidInput, "sweep axes must be nonempty");
  for (const auto* axis : {&spec.x, &spec.y}) {
    for (std::size_t k = 0; k < axis->size(); ++k) {
      if (!((*axis)[k] > 0.0) || (k > 0 && (*axis)[k] < (*axis)[k - 1])) {
        throw Error(ErrorKind::InvalidInput, "sweep axes must be positive and sorted");
      }
    }
  }
  require_classifiable(spec.plane == SweepPlane::Dispersal ? base.with_dispersal(spec.x.front(), spec.y.front())
                                                           : base.with_competition(spec.x.front(), spec.y.front()));

  const std::size_t nx = spec.x.size(), ny = spec.y.size(), total = nx * ny;
  std::vector<SweepRow> rows(total);

  auto run_cell = [&](std::size_t k) {
    const std::size_t i = k / ny, j = k % ny;
    SweepRow& row = rows[k];
    row.x = spec.x[i];
    row.y = spec.y[j];
    try {
      const PatchSystem sys = spec.plane == SweepPlane::Dispersal ? base.with_dispersal(row.x, row.y)
                                                                  : base.with_competition(row.x, row.y);
      require_classifiable(sys);
      const auto result = classify_checked(sys, spec.tol);
      row.label = result.label;
      row.outcome = result.outcome.outcome;
      const int stride = std::max(1, spec.verify_settings.stride);
      if (spec.verify && i % stride == 0 && j % stride == 0) {
        row.verified = verify_outcome(sys, result, spec.seed + k, spec.verify_settings).ok;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) run_cell(k);
  };
  const int jobs = std::clamp(spec.jobs, 1, static_cast<int>(total));
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

ExampleAThresholds example_a_thresholds(const Digraph& graph, const Vector& r, double mu_u, double mu_v,
                                        double rel_width) {
  if (!(mu_u > 0.0 && mu_v > 0.0)) throw Error(ErrorKind::InvalidInput, "dispersal rates must be positive");
  if (r.size() != graph.size() || (r.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidInput, "r must be positive with one entry per patch");
  }
  const Matrix L = connection_matrix(graph);
  const Vector th = theta(L);
  if (inf_norm(r / r.sum() - th) <= 1e-8) {
    throw Error(ErrorKind::ProportionalResource, "r is proportional to theta; the thresholds are undefined");
  }

  ExampleAThresholds out;
  out.b_star.kind = ThresholdKind::ExampleA_bstar;
  out.c_star.kind = ThresholdKind::ExampleA_cstar;
  if (mu_u == mu_v) {
    for (auto* t : {&out.b_star, &out.c_star}) {
      t->value = 1.0;
      t->bracket = {1.0, 1.0};
      t->sign_table = {0.0, 0.0};
    }
    return out;
  }

  const Vector wu = single_equilibrium(graph, mu_u, r);
  const Vector wv = single_equilibrium(graph, mu_v, r);
  auto lambda_b = [&](double b) { return lambda1(mu_v, Vector(r - b * wu), L); };
  auto lambda_c = [&](double c) { return lambda1(mu_u, Vector(r - c * wv), L); };
  out.b_star = bisect(lambda_b, 0.0, 2.0 * r.maxCoeff() / wu.minCoeff(), ThresholdKind::ExampleA_bstar, rel_width,
                      false);
  out.c_star = bisect(lambda_c, 0.0, 2.0 * r.maxCoeff() / wv.minCoeff(), ThresholdKind::ExampleA_cstar, rel_width,
                      false);
  return out;
}

std::vector<double> default_mu_grid() { return AxisSpec{1e-3, 1e3, 60, true}.values(); }

ExampleBReport example_b_analysis(const Digraph& graph, const Vector& p, const Vector& q,
                                  const std::vector<double>& mu_grid, double tol) {
  if (mu_grid.empty()) throw Error(ErrorKind::InvalidInput, "mu grid must be nonempty");
  const PatchSystem base(graph, p, q, 1.0, 1.0, mu_grid.front(), mu_grid.front());
  require_classifiable(base);

  ExampleBReport report;
  const Vector gap = p - q;
  if (gap.minCoeff() > 0.0) report.dominance = 1;
  if (gap.maxCoeff() < 0.0) report.dominance = -1;
  report.theta_gap = theta(base.L()).dot(gap);

  for (const double mu : mu_grid) {
    ExampleBRow row;
    row.mu = mu;
    try {
      const PatchSystem sys = base.with_dispersal(mu, mu);
      require_classifiable(sys);
      if (report.dominance != 0) {
        const Vector u = single_equilibrium(graph, mu, p);
        const Vector v = single_equilibrium(graph, mu, q);
        row.label = label_region(lambda1(mu, Vector(q - u), base.L()), lambda1(mu, Vector(p - v), base.L()), tol);
        row.outcome = report.dominance > 0 ? Outcome::E1_GAS : Outcome::E2_GAS;
      } else {
        const auto result = classify_checked(sys, tol);
        row.label = result.label;
        row.outcome = result.outcome.outcome;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }

  auto lambda_u = [&](double mu) {
    return lambda1(mu, Vector(q - single_equilibrium(graph, mu, p)), base.L());
  };
  auto lambda_v = [&](double mu) {
    return lambda1(mu, Vector(p - single_equilibrium(graph, mu, q)), base.L());
  };
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    const auto& a = report.rows[k - 1];
    const auto& b = report.rows[k];
    if (a.error || b.error) continue;
    if ((a.label.lambda_u < 0.0) != (b.label.lambda_u < 0.0)) {
      auto t = bisect(lambda_u, a.mu, b.mu, ThresholdKind::ExampleB_mu, 1e-10, true);
      t.which = "lambda_u";
      report.crossings.push_back(t);
    }
    if ((a.label.lambda_v < 0.0) != (b.label.lambda_v < 0.0)) {
      auto t = bisect(lambda_v, a.mu, b.mu, ThresholdKind::ExampleB_mu, 1e-10, true);
      t.which = "lambda_v";
      report.crossings.push_back(t);
    }
  }
  return report;
}

State small_mu_limit(const Vector& p, const Vector& q) {
  if (p.size() != q.size() || p.size() == 0) throw Error(ErrorKind::InvalidInput, "p and q must have equal length");
  if (((p - q).array() == 0.0).any()) {
    throw Error(ErrorKind::TiedResources, "p_i = q_i in some patch; the small-dispersal limit needs strict ordering");
  }
  const auto u_wins = (p.array() > q.array());
  if (!u_wins.any() || u_wins.all()) {
    throw Error(ErrorKind::OneSidedResources, "one species has more resources everywhere");
  }
  State limit{Vector::Zero(p.size()), Vector::Zero(p.size())};
  for (Index i = 0; i < p.size(); ++i) {
    if (u_wins(i)) {
      limit.u(i) = p(i);
    } else {
      limit.v(i) = q(i);
    }
  }
  return limit;
}

LimitProbe small_mu_probe(const Digraph& graph, const Vector& p, const Vector& q, double mu) {
  const State limit = small_mu_limit(p, q);
  const PatchSystem sys(graph, p, q, 1.0, 1.0, mu, mu);
  const double floor = std::max(mu, 1e-6) * std::max(p.maxCoeff(), q.maxCoeff());
  const State seed{limit.u.cwiseMax(floor), limit.v.cwiseMax(floor)};
  LimitProbe probe;
  probe.mu = mu;
  const auto eq = coexistence_equilibrium(sys, {seed});
  probe.found = eq.has_value();
  probe.distance = eq ? state_distance(eq->point, limit) : std::numeric_limits<double>::infinity();
  return probe;
}

Vector large_mu_limit(const Digraph& graph, const Vector& p) {
  if (p.size() != graph.size()) throw Error(ErrorKind::InvalidInput, "p has the wrong length");
  const Vector th = theta(connection_matrix(graph));
  return (th.dot(p) / th.squaredNorm()) * th;
}

LimitProbe large_mu_probe(const Digraph& graph, const Vector& p, double mu) {
  LimitProbe probe;
  probe.mu = mu;
  probe.distance = inf_norm(single_equilibrium(graph, mu, p) - large_mu_limit(graph, p));
  return probe;
}

int resolve_jobs(std::optional<int> requested) {
  if (requested) return std::max(1, *requested);
  if (const char* env = std::getenv("PATCHLV_JOBS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(std::min(value, 1024L));
  }
  return 1;
}

}  // namespace patchlv
