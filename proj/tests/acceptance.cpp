// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "generators.hpp"
#include "instances.hpp"
#include "oracles.hpp"
#include "patchlv/classify.hpp"

using namespace patchlv;
using namespace patchlv::testing;

namespace {

struct Check {
  bool pass = true;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Digraph two_patch(double a12, double a21) {
  Matrix a(2, 2);
  a << 0, a12, a21, 0;
  return Digraph(a);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(uniform(rng, std::log(lo), std::log(hi))); }

double inf_dist(const State& a, const State& b) {
  return std::max((a.u - b.u).cwiseAbs().maxCoeff(), (a.v - b.v).cwiseAbs().maxCoeff());
}

// Right null vector of a connection matrix from a dense LU kernel, normalized to sum 1.
Vector null_vector_oracle(const Matrix& L) {
  Eigen::FullPivLU<Matrix> lu(L);
  lu.setThreshold(1e-10);
  Vector k = lu.kernel().col(0);
  return k / k.sum();
}

// Sum over spanning subgraphs in which every vertex takes one in-arc and a single
// cycle forms, of weight times the sum of F over the cycle arcs.
double unicyclic_oracle(const Digraph& g, const Matrix& F) {
  const Index n = g.size();
  std::vector<std::vector<Index>> in(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (g.weight(i, j) > 0.0) in[i].push_back(j);
  std::vector<std::size_t> pick(n, 0);
  double total = 0.0;
  while (true) {
    // parent[i] = tail of the arc entering i; cycles of the functional graph i -> parent[i].
    std::vector<int> state(n, 0);  // 0 unseen, 1 on the current walk, 2 done
    int cycles = 0;
    double along = 0.0;
    for (Index s = 0; s < n; ++s) {
      std::vector<Index> walk;
      Index x = s;
      while (state[x] == 0) {
        state[x] = 1;
        walk.push_back(x);
        x = in[x][pick[x]];
      }
      if (state[x] == 1) {
        ++cycles;
        Index y = x;
        do {
          along += F(y, in[y][pick[y]]);
          y = in[y][pick[y]];
        } while (y != x);
      }
      for (Index w : walk) state[w] = 2;
    }
    if (cycles == 1) {
      double w = 1.0;
      for (Index i = 0; i < n; ++i) w *= g.weight(i, in[i][pick[i]]);
      total += w * along;
    }
    Index pos = 0;
    while (pos < n && ++pick[pos] == in[pos].size()) pick[pos++] = 0;
    if (pos == n) break;
  }
  return total;
}

// 1. Tree-Cycle identity on random strongly connected graphs.
Check tree_cycle_identity_check() {
  Rng rng(101);
  double worst = 0.0, worst_oracle = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Index n = uniform_index(rng, 2, 6);
    const Digraph g = random_strongly_connected(rng, n, uniform(rng, 0.1, 0.9));
    const Matrix F = random_table(rng, n, -2, 2);
    const auto sides = tree_cycle_identity(g, F);
    double lhs_oracle = 0.0, scale = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double alpha = out_tree_weight(g, i);
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        lhs_oracle += alpha * g.weight(i, j) * F(i, j);
        scale += alpha * g.weight(i, j) * std::abs(F(i, j));
      }
    }
    scale = std::max(1.0, scale);
    const double rhs_oracle = unicyclic_oracle(g, F);
    worst = std::max(worst, std::abs(sides.lhs - sides.rhs) / scale);
    worst_oracle = std::max({worst_oracle, std::abs(sides.lhs - lhs_oracle) / scale,
                             std::abs(sides.rhs - rhs_oracle) / scale});
  }
  return {worst <= 1e-9 && worst_oracle <= 1e-9,
          "1000 graphs, max |lhs-rhs|/scale = " + sci(worst) + ", vs oracles " + sci(worst_oracle) + " (limit 1e-9)"};
}

// 2. Cycle-balance certifier against exhaustive cycle enumeration and the 3-cycle test.
Check cycle_balance_check() {
  Rng rng(202);
  int agree = 0, balanced = 0;
  for (int t = 0; t < 500; ++t) {
    const Index n = uniform_index(rng, 2, 5);
    Digraph g = (t % 4 == 0)   ? random_strongly_connected(rng, n, uniform(rng, 0.2, 1.0))
                : (t % 4 == 1) ? random_balanced(rng, n, uniform(rng, 0.0, 1.0))
                : (t % 4 == 2) ? random_bidirectional_tree(rng, n)
                               : perturb_one_arc(rng, random_balanced(rng, n, 0.8));
    const bool cert = certify_cycle_balance(g).balanced;
    agree += cert == balanced_by_enumeration(g);
    balanced += cert;
  }
  int agree3 = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = uniform_index(rng, 3, 6);
    Digraph g = potential_complete(random_vector(rng, n, 0.2, 4.0));
    if (t % 2 == 1) g = perturb_one_arc(rng, g);
    agree3 += check_3cycle_balance(g) == certify_cycle_balance(g).balanced;
  }
  return {agree == 500 && agree3 == 200,
          "enumeration agreement " + std::to_string(agree) + "/500 (" + std::to_string(balanced) +
              " balanced), complete-graph 3-cycle agreement " + std::to_string(agree3) + "/200"};
}

// 3. Symmetrized cofactor sums: nonnegative for pair-sum-nonnegative tables, zero for antisymmetric ones.
Check symmetrization_check() {
  Rng rng(303);
  double worst_neg = 0.0, worst_anti = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Index n = uniform_index(rng, 2, 6);
    const Digraph g = random_cycle_balanced(rng, n);
    const Vector x = random_vector(rng, n, 0.2, 3.0);
    const Matrix R = random_table(rng, n, -2, 2);
    Matrix F(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        switch (t % 3) {
          case 0: F(i, j) = 0.5 * (x(i) - x(j)) * (x(i) - x(j)); break;
          case 1: F(i, j) = x(i) / x(j) - 1.0 + std::log(x(j) / x(i)); break;
          default: F(i, j) = R(i, j) - R(j, i) + std::abs(R(i, j)); break;
        }
      }
    }
    const Matrix anti = R - R.transpose();
    const Vector alpha = laplacian_cofactors(g);
    auto scale_of = [&](const Matrix& T) {
      return std::max(1.0, (alpha.asDiagonal() * g.weights()).cwiseProduct(T).cwiseAbs().sum());
    };
    worst_neg = std::max(worst_neg, -symmetrized_sum(g, F) / scale_of(F));
    worst_anti = std::max(worst_anti, std::abs(symmetrized_sum(g, anti)) / scale_of(anti));
  }
  return {worst_neg <= 1e-10 && worst_anti <= 1e-10,
          "1000 balanced instances, worst negative part " + sci(std::max(0.0, worst_neg)) +
              ", worst antisymmetric |sum| " + sci(worst_anti) + " (relative, limit 1e-10)"};
}

// 4. Coexistence equilibria are linearly stable; the tie construction is neutral.
Check coexistence_stability_check() {
  Rng rng(404);
  int found = 0, attempts = 0;
  double worst = -1e300;
  while (found < 120 && attempts < 2000) {
    ++attempts;
    const Index n = uniform_index(rng, 2, 5);
    const Digraph g = random_cycle_balanced(rng, n);
    const PatchSystem sys(g, random_vector(rng, n, 0.5, 2), random_vector(rng, n, 0.5, 2), uniform(rng, 0.05, 0.95),
                          uniform(rng, 0.05, 0.95), log_uniform(rng, 0.05, 20), log_uniform(rng, 0.05, 20));
    const auto eq = coexistence_equilibrium(sys);
    if (!eq) continue;
    ++found;
    const double dense = spectral_bound_dense(jacobian(sys, eq->point));
    worst = std::max({worst, dense, eq->jacobian_spectral_bound});
  }
  double worst_tie = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Index n = uniform_index(rng, 2, 5);
    const double c = uniform(rng, 0.5, 2.0);
    const double mu_v = uniform(rng, 0.2, 3.0);
    const PatchSystem sys =
        degenerate_system(random_cycle_balanced(rng, n), random_vector(rng, n, 0.5, 2), c, mu_v * uniform(rng, 0.3, c), mu_v);
    const auto eq = coexistence_equilibrium(sys);
    if (!eq) {
      worst_tie = 1e300;
      continue;
    }
    worst_tie = std::max(worst_tie, std::abs(spectral_bound_dense(jacobian(sys, eq->point))));
    for (const auto& p : continuum_family(sys, {0.25, 0.5, 0.75}).points) {
      worst_tie = std::max(worst_tie, std::abs(spectral_bound_dense(jacobian(sys, p))));
    }
  }
  return {found >= 100 && worst <= 1e-8 && worst_tie <= 1e-6,
          std::to_string(found) + " equilibria found in " + std::to_string(attempts) +
              " instances, max spectral bound " + sci(worst) + " (limit 1e-8); tie |bound| " + sci(worst_tie) +
              " (limit 1e-6)"};
}

// 5. Region labels on a dispersal sweep and their predicted long-time behavior.
Check region_behavior_check() {
  Matrix a = Matrix::Zero(5, 5);
  const double out[4] = {1.0, 0.5, 3.0, 2.5}, back[4] = {2.0, 1.5, 1.0, 0.5};
  for (Index k = 1; k < 5; ++k) {
    a(k, 0) = out[k - 1];
    a(0, k) = back[k - 1];
  }
  const Digraph g(a);
  const PatchSystem base(g, vec({1, 2, 1.5, 0.8, 1.2}), vec({1.5, 1, 1, 1.2, 0.9}), 0.9, 0.95, 1, 1);
  SweepSpec spec;
  spec.x = AxisSpec{0.01, 100, 20, true}.values();
  spec.y = AxisSpec{0.01, 100, 20, true}.values();
  spec.jobs = resolve_jobs(std::nullopt);
  const auto rows = sweep(base, spec);

  int errors = 0, both = 0;
  std::vector<std::vector<int>> region(20, std::vector<int>(20, -1));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!rows[k].label) {
      ++errors;
      continue;
    }
    both += rows[k].label->lambda_u > 1e-7 && rows[k].label->lambda_v > 1e-7;
    region[k / 20][k % 20] = static_cast<int>(rows[k].label->region);
  }

  // Sample 5 cells per region, preferring cells whose 8 neighbours share the region.
  VerifySettings settings;
  settings.initial_states = 3;
  settings.t_end = 2000;
  settings.tol = 1e-4;
  std::ostringstream detail;
  bool ok = errors == 0 && both == 0;
  int regions_seen = 0;
  double worst = 0.0;
  for (Region r : {Region::S_u, Region::S_v, Region::S_minus, Region::S_u0, Region::S_v0, Region::S_00}) {
    std::vector<std::pair<int, int>> inner, all;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        if (region[i][j] != static_cast<int>(r)) continue;
        all.emplace_back(i, j);
        bool interior = true;
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            const int a = i + di, b = j + dj;
            if (a >= 0 && a < 20 && b >= 0 && b < 20 && region[a][b] != static_cast<int>(r)) interior = false;
          }
        if (interior) inner.emplace_back(i, j);
      }
    }
    if (all.empty()) continue;
    ++regions_seen;
    const auto& pool = inner.size() >= 5 ? inner : all;
    const std::size_t take = std::min<std::size_t>(5, pool.size());
    int passed = 0;
    for (std::size_t s = 0; s < take; ++s) {
      const auto [i, j] = pool[take == 1 ? 0 : s * (pool.size() - 1) / (take - 1)];
      const PatchSystem sys = base.with_dispersal(spec.x[i], spec.y[j]);
      const auto result = classify_point(sys);
      const auto report = verify_outcome(sys, result, 500 + 20 * i + j, settings);
      worst = std::max(worst, report.max_distance);
      passed += report.ok;
    }
    ok = ok && passed == static_cast<int>(take) && take == 5;
    detail << to_string(r) << " " << passed << "/" << take << " (" << all.size() << " cells); ";
  }
  ok = ok && regions_seen >= 3;
  detail << "both-positive cells " << both << ", failed cells " << errors << ", max distance " << sci(worst)
         << " (limit 1e-4)";
  return {ok, detail.str()};
}

// 6. Proportional resources with b = c = 1/2: closed-form coexistence state.
Check closed_form_check() {
  Rng rng(606);
  double worst = 0.0;
  int missing = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = uniform_index(rng, 2, 6);
    const Digraph g = random_cycle_balanced(rng, n);
    const double b = 0.5, c = 0.5;
    const PatchSystem sys = proportional_system(g, uniform(rng, 0.5, 3), b, c, log_uniform(rng, 0.05, 20),
                                                log_uniform(rng, 0.05, 20));
    const auto eq = coexistence_equilibrium(sys);
    if (!eq) {
      ++missing;
      continue;
    }
    const State expected{(1 - c) / (1 - b * c) * sys.p(), (1 - b) / (1 - b * c) * sys.p()};
    worst = std::max(worst, inf_dist(eq->point, expected));
  }
  return {missing == 0 && worst <= 1e-8,
          "20 instances, max deviation " + sci(worst) + " (limit 1e-8), not found " + std::to_string(missing)};
}

// 7. Competition thresholds for unequal dispersal and the three-region (b, c) picture.
Check thresholds_check() {
  const Digraph g = two_patch(1, 1);
  const Vector r = vec({1, 2});
  const double mu_u = 0.5, mu_v = 2.0;
  const auto th = example_a_thresholds(g, r, mu_u, mu_v);
  const double bs = th.b_star.value, cs = th.c_star.value;

  const Matrix L = connection_matrix(g);
  const Vector wu = single_equilibrium(g, mu_u, r), wv = single_equilibrium(g, mu_v, r);
  auto lam = [&](double mu, const Vector& h) {
    Matrix M = mu * L;
    M.diagonal() += h;
    return -spectral_bound_dense(M);
  };
  const bool straddle = lam(mu_v, r - bs * (1 - 1e-4) * wu) < 0 && lam(mu_v, r - bs * (1 + 1e-4) * wu) > 0 &&
                        lam(mu_u, r - cs * (1 - 1e-4) * wv) < 0 && lam(mu_u, r - cs * (1 + 1e-4) * wv) > 0;

  SweepSpec spec;
  spec.plane = SweepPlane::Competition;
  spec.x = AxisSpec{0.05, 1.6, 20, false}.values();
  spec.y = AxisSpec{0.05, 1.6, 20, false}.values();
  spec.jobs = resolve_jobs(std::nullopt);
  const double step = spec.x[1] - spec.x[0];
  const auto rows = sweep(PatchSystem(g, r, r, 0.5, 0.5, mu_u, mu_v), spec);
  int mismatch = 0, counts[3] = {0, 0, 0};
  for (const auto& row : rows) {
    const double b = row.x, c = row.y;
    if (b * c > 1.0) {
      mismatch += !row.error.has_value();
      continue;
    }
    if (!row.outcome) {
      ++mismatch;
      continue;
    }
    const Outcome expected = b > bs ? Outcome::E1_GAS : c > cs ? Outcome::E2_GAS : Outcome::Coexistence_GAS;
    const bool near_line = std::abs(b - bs) < step || std::abs(c - cs) < step;
    if (*row.outcome != expected && !near_line) ++mismatch;
    ++counts[expected == Outcome::Coexistence_GAS ? 0 : expected == Outcome::E1_GAS ? 1 : 2];
  }
  const bool ok = bs < 1 && cs > 1 && bs * cs > 1 && straddle && mismatch == 0 && counts[0] > 0 && counts[1] > 0 &&
                  counts[2] > 0;
  return {ok, "b* = " + sci(bs) + ", c* = " + sci(cs) + ", b*c* = " + sci(bs * cs) +
                  (straddle ? ", straddles zero" : ", no straddle") + "; sweep cells coexistence/E1/E2 = " +
                  std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" + std::to_string(counts[2]) +
                  ", off-boundary mismatches " + std::to_string(mismatch)};
}

// 8. More resources everywhere wins at every common dispersal rate.
Check dominance_check() {
  Rng rng(808);
  int wins = 0, total = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = uniform_index(rng, 2, 6);
    const Digraph g = random_cycle_balanced(rng, n);
    const Vector q = random_vector(rng, n, 0.5, 2);
    const Vector p = q + random_vector(rng, n, 0.02, 1);
    for (double mu : {0.01, 1.0, 100.0}) {
      ++total;
      wins += classify_point(PatchSystem(g, p, q, 1, 1, mu, mu)).outcome.outcome == Outcome::E1_GAS;
    }
  }
  return {wins == total, std::to_string(wins) + "/" + std::to_string(total) + " cells E1_GAS"};
}

// 9. Small- and large-dispersal limits.
Check limits_check() {
  Rng rng(909);
  bool ok = true;
  double worst_small = 0.0;
  std::vector<std::pair<Digraph, std::pair<Vector, Vector>>> cases{{two_patch(2, 3), {vec({2, 1}), vec({1, 2})}}};
  while (cases.size() < 6) {
    const Index n = uniform_index(rng, 2, 5);
    Vector p = random_vector(rng, n, 0.5, 2), q(n);
    for (Index i = 0; i < n; ++i) q(i) = p(i) + (i % 2 == 0 ? -1 : 1) * uniform(rng, 0.2, 0.5);
    cases.push_back({random_cycle_balanced(rng, n), {p, q}});
  }
  for (const auto& [g, pq] : cases) {
    const auto& [p, q] = pq;
    const State lim = small_mu_limit(p, q);
    for (Index i = 0; i < p.size(); ++i) {
      const bool u_side = p(i) > q(i);
      ok = ok && lim.u(i) == (u_side ? p(i) : 0.0) && lim.v(i) == (u_side ? 0.0 : q(i));
    }
    const double size = std::max(lim.u.maxCoeff(), lim.v.maxCoeff());
    double prev = 1e300;
    for (double mu : {1e-2, 1e-3, 1e-4}) {
      const auto probe = small_mu_probe(g, p, q, mu);
      ok = ok && probe.found && probe.distance < prev;
      prev = probe.distance;
    }
    ok = ok && prev <= 0.01 * size;
    worst_small = std::max(worst_small, prev / size);
  }

  double worst_large = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Index n = uniform_index(rng, 2, 6);
    const Digraph g = random_cycle_balanced(rng, n);
    const Vector p = random_vector(rng, n, 0.5, 2);
    const Vector th = null_vector_oracle(connection_matrix(g));
    const Vector lim = th.dot(p) / th.squaredNorm() * th;
    ok = ok && (large_mu_limit(g, p) - lim).cwiseAbs().maxCoeff() <= 1e-12;
    double prev = 1e300;
    for (double mu : {1e1, 1e2, 1e3, 1e4}) {
      const double d = (single_equilibrium(g, mu, p) - lim).cwiseAbs().maxCoeff();
      ok = ok && d < prev;
      prev = d;
    }
    ok = ok && prev <= 1e-3 * p.maxCoeff();
    worst_large = std::max(worst_large, prev / p.maxCoeff());
  }

  const Vector hand = vec({10.0 / 13.0, 15.0 / 13.0});
  const Digraph g2 = two_patch(2, 3);
  const double hand_err = std::max((large_mu_limit(g2, vec({1, 1})) - hand).cwiseAbs().maxCoeff(),
                                   (single_equilibrium(g2, 1e6, vec({1, 1})) - hand).cwiseAbs().maxCoeff());
  ok = ok && hand_err <= 1e-6;
  return {ok, "small-mu final distance/size " + sci(worst_small) + " (limit 0.01), large-mu final " +
                  sci(worst_large) + " (limit 1e-3), two-patch hand value error " + sci(hand_err) + " (limit 1e-6)"};
}

// 10. Tie construction: continuum of equilibria attracts ordered trajectories to distinct points.
Check continuum_check() {
  Rng rng(1010);
  const Digraph g = random_balanced(rng, 3);
  const double c = 1.25;
  const PatchSystem sys = degenerate_system(g, random_vector(rng, 3, 0.5, 2), c, 0.8, 1.6);
  const auto family = continuum_family(sys, rho_grid(11));
  double worst_res = 0.0;
  for (double res : family.residuals) worst_res = std::max(worst_res, res);

  const Vector w = family.base;
  StepControl control;
  control.dt = std::min(0.05, 0.25 / max_rate(sys));
  std::vector<double> rhos;
  double worst_dist = 0.0;
  for (double s : {0.2, 0.5, 0.8}) {
    const State init{(s + 0.1) * w, (1.1 - s) * w / c};
    const State end = integrate(sys, init, 5000.0, control).states.back();
    const auto [d, rho] = distance_to_continuum(end, w, c);
    worst_dist = std::max(worst_dist, d);
    rhos.push_back(rho);
  }
  const bool distinct = rhos[1] - rhos[0] > 1e-3 && rhos[2] - rhos[1] > 1e-3;
  return {worst_res <= 1e-10 && worst_dist <= 1e-3 && distinct,
          "max residual " + sci(worst_res) + " (limit 1e-10), max distance " + sci(worst_dist) +
              " (limit 1e-3), limiting rho " + sci(rhos[0]) + " < " + sci(rhos[1]) + " < " + sci(rhos[2])};
}

// 11. The flow preserves the competitive order.
Check order_preservation_check() {
  Rng rng(1111);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = uniform_index(rng, 2, 5);
    const PatchSystem sys(random_cycle_balanced(rng, n), random_vector(rng, n, 0.5, 2), random_vector(rng, n, 0.5, 2),
                          uniform(rng, 0.1, 1.0), uniform(rng, 0.1, 1.0), log_uniform(rng, 0.05, 10),
                          log_uniform(rng, 0.05, 10));
    const State a{random_vector(rng, n, 0.05, 2), random_vector(rng, n, 0.05, 2)};
    State b = a;
    for (Index i = 0; i < n; ++i) {
      if (uniform(rng, 0, 1) < 0.7) b.u(i) += uniform(rng, 0, 0.5);
      if (uniform(rng, 0, 1) < 0.7) b.v(i) *= uniform(rng, 0, 1);
    }
    StepControl control;
    control.dt = std::min(0.01, 0.1 / max_rate(sys));
    for (int k = 0; k <= 100; ++k) control.sample_times.push_back(0.5 * k);
    const auto ta = integrate(sys, a, 50.0, control);
    const auto tb = integrate(sys, b, 50.0, control);
    for (std::size_t k = 0; k < ta.states.size(); ++k) {
      worst = std::max({worst, (ta.states[k].u - tb.states[k].u).maxCoeff(),
                        (tb.states[k].v - ta.states[k].v).maxCoeff()});
    }
  }
  return {worst <= 1e-9, "50 ordered pairs, 101 samples each, max order violation " + sci(std::max(0.0, worst)) +
                             " (limit 1e-9)"};
}

// 12. Principal eigenvalue identities, limits and monotonicity in the dispersal rate.
Check spectral_check() {
  Rng rng(1212);
  double worst_id = 0.0, worst_exact = 0.0, worst_far = 0.0;
  bool monotone = true;
  std::vector<double> grid;
  for (int k = 0; k <= 24; ++k) grid.push_back(std::pow(10.0, -4.0 + k / 3.0));
  for (int t = 0; t < 40; ++t) {
    const Index n = uniform_index(rng, 2, 7);
    const Matrix L = connection_matrix(random_strongly_connected(rng, n, uniform(rng, 0.1, 0.9)));
    const double mu = log_uniform(rng, 1e-3, 1e3);
    const double k = uniform(rng, -3, 3);
    worst_id = std::max({worst_id, std::abs(lambda1(mu, Vector::Zero(n), L)),
                         std::abs(lambda1(mu, Vector::Constant(n, k), L) + k)});

    const Vector d = random_vector(rng, n, 1, 3);
    const Vector eta = null_vector_oracle(L);
    const double far_expected = eta.dot(d) / eta.sum();
    const auto limits = spectral_limits(L, d);
    worst_exact = std::max({worst_exact, std::abs(limits.limit_zero - d.maxCoeff()),
                            std::abs(limits.limit_infinity - far_expected)});
    const auto path = spectral_path(L, d, grid);
    worst_far = std::max({worst_far, std::abs(path.front() - d.maxCoeff()) / d.maxCoeff(),
                          std::abs(path.back() - far_expected) / far_expected});
    monotone = monotone && is_nonincreasing(path, 1e-12 * d.maxCoeff());
  }
  for (int t = 0; t < 10; ++t) {
    // General essentially nonnegative A shifted so that s(A) = 0; limit weights are left times right null vectors.
    const Index n = uniform_index(rng, 2, 6);
    Matrix A = random_strongly_connected(rng, n, uniform(rng, 0.3, 0.9)).weights();
    A.diagonal() = random_vector(rng, n, -2, 2);
    A.diagonal().array() -= spectral_bound_dense(A);
    const Vector eta = null_vector_oracle(A), xi = null_vector_oracle(A.transpose());
    const Vector d = random_vector(rng, n, 1, 3);
    const double far_expected = (xi.cwiseProduct(eta)).dot(d) / xi.dot(eta);
    const auto path = spectral_path(A, d, grid);
    worst_far = std::max({worst_far, std::abs(path.front() - d.maxCoeff()) / d.maxCoeff(),
                          std::abs(path.back() - far_expected) / far_expected});
  }
  return {worst_id <= 1e-10 && worst_exact <= 1e-8 && worst_far <= 0.05 && monotone,
          "identity error " + sci(worst_id) + " (limit 1e-10), exact limits " + sci(worst_exact) +
              " (limit 1e-8), endpoint relative gap " + sci(worst_far) + " (limit 0.05), " +
              (monotone ? "nonincreasing on all 40 trials" : "monotonicity violated")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"tree-cycle identity", tree_cycle_identity_check},
      {"cycle-balance oracle equivalence", cycle_balance_check},
      {"symmetrized sum sign", symmetrization_check},
      {"coexistence stability", coexistence_stability_check},
      {"region behavior on a dispersal sweep", region_behavior_check},
      {"proportional-resource closed form", closed_form_check},
      {"competition thresholds and regions", thresholds_check},
      {"more resources wins", dominance_check},
      {"dispersal limits", limits_check},
      {"continuum of equilibria", continuum_check},
      {"order preservation", order_preservation_check},
      {"principal eigenvalue", spectral_check},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Check v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("%s %2zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
