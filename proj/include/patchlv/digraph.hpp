#ifndef PATCHLV_DIGRAPH_HPP
#define PATCHLV_DIGRAPH_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "patchlv/error.hpp"
#include "patchlv/laplacian.hpp"
#include "patchlv/types.hpp"

namespace patchlv {

using Index = Eigen::Index;

/// Patch network. Entry (i, j) of the weight matrix is a_ij, the rate of
/// movement from patch j to patch i, so a positive a_ij is the arc j -> i.
/// Patches are 0-indexed in the library; the JSON layer is 1-indexed.
template <typename Scalar>
class WeightedDigraph {
 public:
  struct Arc {
    Index from;
    Index to;
    Scalar weight;
  };

  explicit WeightedDigraph(MatrixX<Scalar> weights) : weights_(std::move(weights)) {
    if (weights_.rows() != weights_.cols()) {
      throw Error(ErrorKind::InvalidInput, "weight matrix must be square");
    }
    if (weights_.rows() < 2) {
      throw Error(ErrorKind::InvalidInput, "a patch network needs at least two patches");
    }
    for (Index i = 0; i < size(); ++i) {
      for (Index j = 0; j < size(); ++j) {
        const Scalar w = weights_(i, j);
        if (!std::isfinite(static_cast<double>(w)) || w < Scalar(0)) {
          throw Error(ErrorKind::InvalidInput, "arc weights must be finite and nonnegative");
        }
        if (i == j && w != Scalar(0)) {
          throw Error(ErrorKind::InvalidInput, "self-loops are not allowed (a_ii must be 0)");
        }
      }
    }
  }

  static WeightedDigraph from_arcs(Index n, const std::vector<Arc>& arcs) {
    if (n < 2) throw Error(ErrorKind::InvalidInput, "a patch network needs at least two patches");
    MatrixX<Scalar> a = MatrixX<Scalar>::Zero(n, n);
    for (const Arc& arc : arcs) {
      if (arc.from < 0 || arc.from >= n || arc.to < 0 || arc.to >= n) {
        throw Error(ErrorKind::InvalidInput, "arc endpoint out of range");
      }
      if (arc.from == arc.to) throw Error(ErrorKind::InvalidInput, "self-loops are not allowed");
      if (a(arc.to, arc.from) != Scalar(0)) {
        throw Error(ErrorKind::InvalidInput, "duplicate arc");
      }
      a(arc.to, arc.from) = arc.weight;
    }
    return WeightedDigraph(std::move(a));
  }

  Index size() const { return weights_.rows(); }
  const MatrixX<Scalar>& weights() const { return weights_; }
  Scalar weight(Index i, Index j) const { return weights_(i, j); }

  /// True when the arc from -> to is present.
  bool has_arc(Index from, Index to) const { return weights_(to, from) > Scalar(0); }

  Index arc_count() const { return (weights_.array() > Scalar(0)).count(); }

  std::vector<Arc> arcs() const {
    std::vector<Arc> out;
    for (Index j = 0; j < size(); ++j) {
      for (Index i = 0; i < size(); ++i) {
        if (weights_(i, j) > Scalar(0)) out.push_back({j, i, weights_(i, j)});
      }
    }
    return out;
  }

 private:
  MatrixX<Scalar> weights_;
};

using Digraph = WeightedDigraph<double>;

template <typename Scalar>
MatrixX<Scalar> connection_matrix(const WeightedDigraph<Scalar>& g) {
  return connection_matrix_from_weights(g.weights());
}

template <typename Scalar>
MatrixX<Scalar> row_laplacian(const WeightedDigraph<Scalar>& g) {
  return row_laplacian_from_weights(g.weights());
}

namespace detail {

// Vertices reachable from `start` following arcs forward (or backward).
template <typename Scalar>
std::vector<bool> reachable(const WeightedDigraph<Scalar>& g, Index start, bool forward) {
  std::vector<bool> seen(g.size(), false);
  std::deque<Index> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const Index x = queue.front();
    queue.pop_front();
    for (Index y = 0; y < g.size(); ++y) {
      const bool arc = forward ? g.has_arc(x, y) : g.has_arc(y, x);
      if (arc && !seen[y]) {
        seen[y] = true;
        queue.push_back(y);
      }
    }
  }
  return seen;
}

template <typename Scalar>
bool close_relative(Scalar x, Scalar y, Scalar tol) {
  using std::abs;
  using std::max;
  return abs(x - y) <= tol * max(abs(x), abs(y));
}

}  // namespace detail

/// Directed paths join every ordered pair of patches (irreducibility of A).
template <typename Scalar>
bool is_strongly_connected(const WeightedDigraph<Scalar>& g) {
  const auto fwd = detail::reachable(g, 0, true);
  const auto bwd = detail::reachable(g, 0, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

template <typename Scalar>
bool is_sign_pattern_symmetric(const WeightedDigraph<Scalar>& g) {
  for (Index i = 0; i < g.size(); ++i) {
    for (Index j = i + 1; j < g.size(); ++j) {
      if ((g.weight(i, j) > Scalar(0)) != (g.weight(j, i) > Scalar(0))) return false;
    }
  }
  return true;
}

/// A simple directed cycle v0 -> v1 -> ... -> v_{k-1} -> v0, listed starting
/// at its smallest vertex.
template <typename Scalar>
struct DirectedCycle {
  std::vector<Index> vertices;
  Scalar weight{};          // product of the forward arc weights
  Scalar reverse_weight{};  // product of the reversed arc weights; 0 when a reverse arc is absent
};

template <typename Scalar>
DirectedCycle<Scalar> make_cycle(const WeightedDigraph<Scalar>& g, std::vector<Index> vertices) {
  const auto smallest = std::min_element(vertices.begin(), vertices.end());
  std::rotate(vertices.begin(), smallest, vertices.end());
  DirectedCycle<Scalar> cycle{std::move(vertices), Scalar(1), Scalar(1)};
  const std::size_t k = cycle.vertices.size();
  for (std::size_t m = 0; m < k; ++m) {
    const Index from = cycle.vertices[m];
    const Index to = cycle.vertices[(m + 1) % k];
    cycle.weight *= g.weight(to, from);
    cycle.reverse_weight *= g.weight(from, to);
  }
  return cycle;
}

inline constexpr Index kDefaultCycleEnumCap = 8;
inline constexpr Index kDefaultUnicyclicEnumCap = 7;
inline constexpr double kDefaultBalanceTol = 1e-9;

/// All simple directed cycles of length >= 2 in lexicographic order of their
/// vertex sequences. Exponential; intended as an oracle for small graphs.
template <typename Scalar>
std::vector<DirectedCycle<Scalar>> enumerate_cycles(const WeightedDigraph<Scalar>& g,
                                                    Index cap = kDefaultCycleEnumCap) {
  const Index n = g.size();
  if (n > cap) {
    throw Error(ErrorKind::CapExceeded,
                "cycle enumeration limited to n <= " + std::to_string(cap));
  }
  std::vector<DirectedCycle<Scalar>> cycles;
  std::vector<Index> path;
  std::vector<bool> on_path(n, false);

  // Depth-first search from `start` through vertices larger than `start`.
  auto dfs = [&](auto&& self, Index start, Index x) -> void {
    for (Index y = 0; y < n; ++y) {
      if (!g.has_arc(x, y)) continue;
      if (y == start && path.size() >= 2) {
        cycles.push_back(make_cycle(g, path));
      } else if (y > start && !on_path[y]) {
        path.push_back(y);
        on_path[y] = true;
        self(self, start, y);
        on_path[y] = false;
        path.pop_back();
      }
    }
  };
  for (Index s = 0; s < n; ++s) {
    path = {s};
    on_path[s] = true;
    dfs(dfs, s, s);
    on_path[s] = false;
  }
  std::sort(cycles.begin(), cycles.end(),
            [](const auto& a, const auto& b) { return a.vertices < b.vertices; });
  return cycles;
}

template <typename Scalar>
struct CycleBalanceCertificate {
  bool balanced = false;
  VectorX<Scalar> potential;  // detailed-balance witness, empty when unbalanced
  std::optional<DirectedCycle<Scalar>> violation;
};

/// Cycle-balance via a detailed-balance potential: sign-pattern symmetry plus
/// a positive s with a_ij s_j = a_ji s_i on every arc. The potential is built
/// along a breadth-first spanning tree and checked on every remaining arc; a
/// failing arc closes a violating cycle with the tree path between its ends.
template <typename Scalar>
CycleBalanceCertificate<Scalar> certify_cycle_balance(const WeightedDigraph<Scalar>& g,
                                                      std::type_identity_t<Scalar> tol = Scalar(kDefaultBalanceTol)) {
  if (!is_strongly_connected(g)) {
    throw Error(ErrorKind::NotStronglyConnected, "cycle balance requires a strongly connected graph");
  }
  const Index n = g.size();
  CycleBalanceCertificate<Scalar> cert;

  // An arc j -> i without its reverse lies on some cycle whose reverse is missing.
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (g.has_arc(j, i) && !g.has_arc(i, j)) {
        std::vector<Index> parent(n, -1);
        std::deque<Index> queue{i};
        parent[i] = i;
        while (!queue.empty() && parent[j] < 0) {
          const Index x = queue.front();
          queue.pop_front();
          for (Index y = 0; y < n; ++y) {
            if (g.has_arc(x, y) && parent[y] < 0) {
              parent[y] = x;
              queue.push_back(y);
            }
          }
        }
        std::vector<Index> path;
        for (Index x = j; x != i; x = parent[x]) path.push_back(x);
        path.push_back(i);
        std::reverse(path.begin(), path.end());  // i -> ... -> j, closed by j -> i
        cert.violation = make_cycle(g, std::move(path));
        return cert;
      }
    }
  }

  VectorX<Scalar> s = VectorX<Scalar>::Zero(n);
  std::vector<Index> parent(n, -1);
  std::vector<Index> depth(n, 0);
  std::deque<Index> queue{0};
  s(0) = Scalar(1);
  parent[0] = 0;
  while (!queue.empty()) {
    const Index x = queue.front();
    queue.pop_front();
    for (Index y = 0; y < n; ++y) {
      if (g.has_arc(x, y) && parent[y] < 0) {
        parent[y] = x;
        depth[y] = depth[x] + 1;
        s(y) = s(x) * g.weight(y, x) / g.weight(x, y);
        queue.push_back(y);
      }
    }
  }

  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (!g.has_arc(j, i)) continue;
      const Scalar forward = g.weight(i, j) * s(j);
      const Scalar backward = g.weight(j, i) * s(i);
      if (std::abs(forward - backward) <= tol * (forward + backward)) continue;

      // Tree path i -> ... -> j through the lowest common ancestor.
      std::vector<Index> up_from_i{i};
      std::vector<Index> up_from_j{j};
      Index x = i;
      Index y = j;
      while (depth[x] > depth[y]) up_from_i.push_back(x = parent[x]);
      while (depth[y] > depth[x]) up_from_j.push_back(y = parent[y]);
      while (x != y) {
        up_from_i.push_back(x = parent[x]);
        up_from_j.push_back(y = parent[y]);
      }
      up_from_j.pop_back();  // common ancestor already in up_from_i
      std::vector<Index> path = up_from_i;
      path.insert(path.end(), up_from_j.rbegin(), up_from_j.rend());
      cert.violation = make_cycle(g, std::move(path));
      return cert;
    }
  }

  cert.balanced = true;
  cert.potential = s;
  return cert;
}

/// Balance of every 3-cycle; equivalent to full cycle balance on complete graphs.
template <typename Scalar>
bool check_3cycle_balance(const WeightedDigraph<Scalar>& g, Scalar tol = Scalar(kDefaultBalanceTol)) {
  const Index n = g.size();
  if (n < 3 || g.arc_count() != n * (n - 1)) {
    throw Error(ErrorKind::NotComplete, "3-cycle test needs a complete graph on at least 3 patches");
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      for (Index k = j + 1; k < n; ++k) {
        const Scalar one_way = g.weight(i, j) * g.weight(j, k) * g.weight(k, i);
        const Scalar other_way = g.weight(i, k) * g.weight(k, j) * g.weight(j, i);
        if (!detail::close_relative(one_way, other_way, tol)) return false;
      }
    }
  }
  return true;
}

/// Spanning subgraph in which every vertex receives exactly one arc and a
/// single directed cycle exists. Arcs are (tail, head) pairs.
template <typename Scalar>
struct UnicyclicSubdigraph {
  std::vector<std::pair<Index, Index>> arcs;
  std::vector<std::pair<Index, Index>> cycle_arcs;
  Scalar weight{};
};

/// Enumerates in-neighbour assignments (one positive in-arc per vertex) and
/// keeps the ones forming a single weak component, i.e. a single cycle.
template <typename Scalar>
std::vector<UnicyclicSubdigraph<Scalar>> enumerate_spanning_unicyclic(
    const WeightedDigraph<Scalar>& g, Index cap = kDefaultUnicyclicEnumCap) {
  const Index n = g.size();
  if (n > cap) {
    throw Error(ErrorKind::CapExceeded,
                "unicyclic enumeration limited to n <= " + std::to_string(cap));
  }
  std::vector<std::vector<Index>> in_neighbours(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (g.has_arc(j, i)) in_neighbours[i].push_back(j);
    }
    if (in_neighbours[i].empty()) return {};
  }

  std::vector<UnicyclicSubdigraph<Scalar>> result;
  std::vector<std::size_t> choice(n, 0);
  std::vector<Index> parent(n);
  std::vector<int> state(n);
  std::vector<Index> cycle;
  while (true) {
    for (Index i = 0; i < n; ++i) parent[i] = in_neighbours[i][choice[i]];

    // Follow parent pointers; each fresh walk that closes on itself adds a cycle.
    std::fill(state.begin(), state.end(), 0);
    int cycles = 0;
    for (Index start = 0; start < n && cycles <= 1; ++start) {
      if (state[start] != 0) continue;
      std::vector<Index> walk;
      Index x = start;
      while (state[x] == 0) {
        state[x] = 1;
        walk.push_back(x);
        x = parent[x];
      }
      if (state[x] == 1) {
        ++cycles;
        cycle.assign(std::find(walk.begin(), walk.end(), x), walk.end());
      }
      for (Index w : walk) state[w] = 2;
    }

    if (cycles == 1) {
      UnicyclicSubdigraph<Scalar> q;
      q.weight = Scalar(1);
      for (Index i = 0; i < n; ++i) {
        q.arcs.emplace_back(parent[i], i);
        q.weight *= g.weight(i, parent[i]);
      }
      for (Index v : cycle) q.cycle_arcs.emplace_back(parent[v], v);
      std::sort(q.cycle_arcs.begin(), q.cycle_arcs.end());
      result.push_back(std::move(q));
    }

    Index pos = 0;
    while (pos < n && ++choice[pos] == in_neighbours[pos].size()) {
      choice[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return result;
}

/// alpha_i = cofactor of the (i, i) entry of the row Laplacian; positive for
/// strongly connected graphs and a left null vector of the row Laplacian.
template <typename Scalar>
VectorX<Scalar> laplacian_cofactors(const WeightedDigraph<Scalar>& g) {
  if (!is_strongly_connected(g)) {
    throw Error(ErrorKind::NotStronglyConnected, "cofactors vanish on graphs that are not strongly connected");
  }
  const Index n = g.size();
  const MatrixX<Scalar> lap = row_laplacian(g);
  VectorX<Scalar> alpha(n);
  MatrixX<Scalar> minor(n - 1, n - 1);
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0, mr = 0; r < n; ++r) {
      if (r == i) continue;
      for (Index c = 0, mc = 0; c < n; ++c) {
        if (c == i) continue;
        minor(mr, mc++) = lap(r, c);
      }
      ++mr;
    }
    alpha(i) = minor.determinant();
  }
  return alpha;
}

template <typename Scalar>
struct IdentitySides {
  Scalar lhs{};
  Scalar rhs{};
};

namespace detail {

template <typename Scalar>
void check_table(const WeightedDigraph<Scalar>& g, const MatrixX<Scalar>& F) {
  if (F.rows() != g.size() || F.cols() != g.size()) {
    throw Error(ErrorKind::InvalidInput, "F table must be n x n");
  }
}

template <typename Scalar>
Scalar cofactor_weighted_sum(const WeightedDigraph<Scalar>& g, const VectorX<Scalar>& alpha,
                             const MatrixX<Scalar>& F) {
  Scalar sum = Scalar(0);
  for (Index i = 0; i < g.size(); ++i) {
    for (Index j = 0; j < g.size(); ++j) {
      if (i != j) sum += alpha(i) * g.weight(i, j) * F(i, j);
    }
  }
  return sum;
}

}  // namespace detail

/// Both sides of the Tree-Cycle identity: the cofactor-weighted double sum
/// over arcs, and the sum over spanning unicyclic subgraphs of their weight
/// times F restricted to the cycle. F(i, j) pairs with the arc j -> i, the
/// arc whose weight is a_ij.
template <typename Scalar>
IdentitySides<Scalar> tree_cycle_identity(const WeightedDigraph<Scalar>& g, const std::type_identity_t<MatrixX<Scalar>>& F,
                                          Index cap = kDefaultUnicyclicEnumCap) {
  detail::check_table(g, F);
  IdentitySides<Scalar> sides;
  sides.lhs = detail::cofactor_weighted_sum(g, laplacian_cofactors(g), F);
  for (const auto& q : enumerate_spanning_unicyclic(g, cap)) {
    Scalar along_cycle = Scalar(0);
    for (const auto& [tail, head] : q.cycle_arcs) along_cycle += F(head, tail);
    sides.rhs += q.weight * along_cycle;
  }
  return sides;
}

/// Cofactor-weighted double sum for cycle-balanced graphs; nonnegative when
/// every pair sum F_ij + F_ji is nonnegative.
template <typename Scalar>
Scalar symmetrized_sum(const WeightedDigraph<Scalar>& g, const std::type_identity_t<MatrixX<Scalar>>& F,
                       std::type_identity_t<Scalar> tol = Scalar(kDefaultBalanceTol)) {
  detail::check_table(g, F);
  if (!certify_cycle_balance(g, tol).balanced) {
    throw Error(ErrorKind::NotCycleBalanced, "symmetrized sum requires a cycle-balanced graph");
  }
  const Scalar scale = std::max(Scalar(1), F.cwiseAbs().maxCoeff());
  for (Index i = 0; i < g.size(); ++i) {
    for (Index j = i + 1; j < g.size(); ++j) {
      if (F(i, j) + F(j, i) < -Scalar(1e-12) * scale) {
        throw Error(ErrorKind::PairSumNegative,
                    "F_ij + F_ji < 0 for pair (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
      }
    }
  }
  return detail::cofactor_weighted_sum(g, laplacian_cofactors(g), F);
}

}  // namespace patchlv

#endif  // PATCHLV_DIGRAPH_HPP
