// Model instances built on top of the dynamics layer.
#ifndef PATCHLV_TESTS_INSTANCES_HPP
#define PATCHLV_TESTS_INSTANCES_HPP

#include "generators.hpp"
#include "patchlv/dynamics.hpp"
#include "patchlv/spectral.hpp"

namespace patchlv::testing {

inline Digraph random_cycle_balanced(Rng& rng, Index n) {
  return uniform(rng, 0, 1) < 0.5 ? random_balanced(rng, n) : random_bidirectional_tree(rng, n);
}

/// Both species on the resource r = delta * theta.
inline PatchSystem proportional_system(const Digraph& g, double delta, double b, double c, double mu_u,
                                       double mu_v) {
  const Vector r = delta * theta(connection_matrix(g));
  return PatchSystem(g, r, r, b, c, mu_u, mu_v);
}

/// bc = 1 with w*(mu_u, p) = c w*(mu_v, q): picks p = c v* + (mu_u / mu_v)(q - v*),
/// which makes c v* stationary for the u-equation.
inline PatchSystem degenerate_system(const Digraph& g, const Vector& q, double c, double mu_u, double mu_v) {
  const Vector v = single_equilibrium(g, mu_v, q);
  const Vector p = c * v + (mu_u / mu_v) * (q - v);
  return PatchSystem(g, p, q, 1.0 / c, c, mu_u, mu_v);
}

}  // namespace patchlv::testing

#endif  // PATCHLV_TESTS_INSTANCES_HPP
