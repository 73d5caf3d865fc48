#ifndef PATCHLV_SPECTRAL_HPP
#define PATCHLV_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "patchlv/digraph.hpp"
#include "patchlv/error.hpp"
#include "patchlv/types.hpp"

namespace patchlv {

/// Perron data of a quasi-positive irreducible matrix M.
template <typename Scalar>
struct SpectralReport {
  Scalar bound{};            // s(M), the largest real part over the spectrum
  VectorX<Scalar> right_vec;  // positive, sums to 1
  VectorX<Scalar> left_vec;   // positive, sums to 1
  Scalar residual{};         // max-norm of M v - s v for the right vector
  int iterations = 0;
};

inline constexpr int kPowerIterationBudget = 100000;

namespace detail {

template <typename Derived>
void require_quasi_positive_irreducible(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw Error(ErrorKind::InvalidInput, "spectral bound needs a non-empty square matrix");
  }
  if (!M.allFinite()) throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
  const Index n = M.rows();
  if (n == 1) return;
  MatrixX<Scalar> pattern = MatrixX<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (M(i, j) < Scalar(0)) {
        throw Error(ErrorKind::NotQuasiPositive, "off-diagonal entries must be nonnegative");
      }
      pattern(i, j) = M(i, j);
    }
  }
  if (!is_strongly_connected(WeightedDigraph<Scalar>(std::move(pattern)))) {
    throw Error(ErrorKind::NotIrreducible, "matrix is reducible");
  }
}

template <typename Scalar>
struct PerronVector {
  Scalar root{};
  VectorX<Scalar> vec;
  int iterations = 0;
};

// Collatz-Wielandt bracket: min_i (Mv)_i/v_i <= s(M) <= max_i (Mv)_i/v_i for v >> 0.
template <typename Scalar>
void collatz_wielandt(const MatrixX<Scalar>& M, const VectorX<Scalar>& v, Scalar& lo, Scalar& hi) {
  const VectorX<Scalar> ratios = (M * v).cwiseQuotient(v);
  lo = ratios.minCoeff();
  hi = ratios.maxCoeff();
}

// Right Perron vector. A few shifted power steps warm up a positive iterate,
// then Noda iteration (inverse iteration with the Collatz-Wielandt upper bound
// as shift) converges superlinearly. Shifted power iteration alone stalls when
// the two leading eigenvalues are close, which happens at small dispersal.
template <typename Scalar>
PerronVector<Scalar> perron_right(const MatrixX<Scalar>& M) {
  using std::abs;
  const Index n = M.rows();
  PerronVector<Scalar> out;
  if (n == 1) {
    out.root = M(0, 0);
    out.vec = VectorX<Scalar>::Ones(1);
    return out;
  }
  const Scalar shift = M.diagonal().cwiseAbs().maxCoeff() + Scalar(1);
  const Scalar scale = std::max(Scalar(1), M.cwiseAbs().rowwise().sum().maxCoeff());
  const Scalar target = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale;

  VectorX<Scalar> v = VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  Scalar lo{}, hi{};
  int it = 0;

  const MatrixX<Scalar> shifted = M + shift * MatrixX<Scalar>::Identity(n, n);
  for (; it < 50; ++it) {
    VectorX<Scalar> w = shifted * v;
    v = w / w.sum();
  }

  Scalar best_width = std::numeric_limits<Scalar>::infinity();
  VectorX<Scalar> best = v;
  int stalled = 0;
  bool use_power = false;
  for (; it < kPowerIterationBudget; ++it) {
    collatz_wielandt(M, v, lo, hi);
    const Scalar width = hi - lo;
    if (width < best_width) {
      best_width = width;
      best = v;
      stalled = 0;
    } else if (++stalled >= 3) {
      break;
    }
    if (width <= target) break;

    VectorX<Scalar> y;
    if (!use_power) {
      const Scalar sigma = hi + std::max(width * Scalar(1e-3), std::numeric_limits<Scalar>::min());
      MatrixX<Scalar> system = -M;
      system.diagonal().array() += sigma;
      y = system.partialPivLu().solve(v);
      if (!y.allFinite() || (y.array() <= Scalar(0)).any()) {
        use_power = true;
        y = shifted * v;
      }
    } else {
      y = shifted * v;
    }
    v = y / y.sum();
  }

  collatz_wielandt(M, best, lo, hi);
  out.root = (lo + hi) / Scalar(2);
  out.vec = best;
  out.iterations = it;
  return out;
}

}  // namespace detail

/// Spectral bound of a quasi-positive irreducible matrix with both Perron
/// vectors normalized to sum 1. Deterministic: iteration starts from all-ones.
template <typename Derived>
SpectralReport<typename Derived::Scalar> spectral_bound(const Eigen::MatrixBase<Derived>& M_in) {
  using Scalar = typename Derived::Scalar;
  detail::require_quasi_positive_irreducible(M_in);
  const MatrixX<Scalar> M = M_in;
  const auto right = detail::perron_right<Scalar>(M);
  const auto left = detail::perron_right<Scalar>(M.transpose());

  SpectralReport<Scalar> report;
  report.bound = right.root;
  report.right_vec = right.vec;
  report.left_vec = left.vec;
  report.iterations = right.iterations + left.iterations;
  report.residual = (M * right.vec - right.root * right.vec).cwiseAbs().maxCoeff();

  const Scalar norm = std::max(Scalar(1), M.cwiseAbs().rowwise().sum().maxCoeff());
  using std::abs;
  if (!(report.residual <= Scalar(1e-10) * (Scalar(1) + abs(report.bound)) * norm)) {
    throw Error(ErrorKind::NonConvergence,
                "Perron iteration budget exhausted, residual " + std::to_string(static_cast<double>(report.residual)));
  }
  return report;
}

/// s(M) only; skips the left vector.
template <typename Derived>
typename Derived::Scalar perron_root(const Eigen::MatrixBase<Derived>& M_in) {
  using Scalar = typename Derived::Scalar;
  detail::require_quasi_positive_irreducible(M_in);
  return detail::perron_right<Scalar>(MatrixX<Scalar>(M_in)).root;
}

/// Principal eigenvalue lambda_1(mu, h) = -s(mu L + diag(h)); positive means the
/// mode decays. mu = 0 returns the a -> 0 limit -max_i h_i.
template <typename DerivedH, typename DerivedL>
typename DerivedL::Scalar lambda1(typename DerivedL::Scalar mu, const Eigen::MatrixBase<DerivedH>& h,
                                  const Eigen::MatrixBase<DerivedL>& L) {
  using Scalar = typename DerivedL::Scalar;
  if (!(mu >= Scalar(0))) throw Error(ErrorKind::InvalidInput, "dispersal rate must be nonnegative");
  if (h.size() != L.rows()) throw Error(ErrorKind::InvalidInput, "h has the wrong length");
  if (mu == Scalar(0)) return -h.maxCoeff();
  MatrixX<Scalar> M = mu * L;
  M.diagonal() += h;
  return -perron_root(M);
}

/// Positive right null vector of a connection matrix, normalized to sum 1.
/// Solved directly: one (redundant) row of L is replaced by the normalization.
template <typename Derived>
VectorX<typename Derived::Scalar> theta(const Eigen::MatrixBase<Derived>& L) {
  using Scalar = typename Derived::Scalar;
  detail::require_quasi_positive_irreducible(L);
  const Index n = L.rows();
  MatrixX<Scalar> system = L;
  system.row(n - 1).setOnes();
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n);
  rhs(n - 1) = Scalar(1);
  VectorX<Scalar> t = system.fullPivLu().solve(rhs);
  if (!t.allFinite() || (t.array() <= Scalar(0)).any()) {
    throw Error(ErrorKind::NotIrreducible, "connection matrix has no positive null vector");
  }
  return t / t.sum();
}

template <typename Scalar>
struct SpectralLimits {
  Scalar limit_zero{};      // lim_{a->0} s(aA + D) = max_i d_i
  Scalar limit_infinity{};  // lim_{a->inf} s(aA + D)
  VectorX<Scalar> eta;      // right null vector of A, sums to 1
  VectorX<Scalar> xi;       // left null vector of A, sums to 1
};

/// End-point limits of a -> s(aA + D) for quasi-positive irreducible A with
/// s(A) = 0. The large-a limit is the eta/xi-weighted mean of d, which is the
/// eta-average sum eta_i d_i / sum eta_i whenever A has zero column sums
/// (xi constant), as for connection matrices.
template <typename DerivedA, typename DerivedD>
SpectralLimits<typename DerivedA::Scalar> spectral_limits(const Eigen::MatrixBase<DerivedA>& A,
                                                          const Eigen::MatrixBase<DerivedD>& d) {
  using Scalar = typename DerivedA::Scalar;
  using std::abs;
  if (d.size() != A.rows()) throw Error(ErrorKind::InvalidInput, "d has the wrong length");
  const auto report = spectral_bound(A);
  const Scalar norm = std::max(Scalar(1), A.cwiseAbs().rowwise().sum().maxCoeff());
  if (abs(report.bound) > Scalar(1e-10) * norm) {
    throw Error(ErrorKind::SpectralBoundNotZero,
                "s(A) = " + std::to_string(static_cast<double>(report.bound)) + ", expected 0");
  }
  SpectralLimits<Scalar> out;
  out.eta = report.right_vec;
  out.xi = report.left_vec;
  out.limit_zero = d.maxCoeff();
  const VectorX<Scalar> weights = out.xi.cwiseProduct(out.eta);
  out.limit_infinity = weights.dot(d) / weights.sum();
  return out;
}

/// Samples a -> s(aA + D) along `grid`.
template <typename DerivedA, typename DerivedD>
std::vector<typename DerivedA::Scalar> spectral_path(const Eigen::MatrixBase<DerivedA>& A,
                                                     const Eigen::MatrixBase<DerivedD>& d,
                                                     const std::vector<typename DerivedA::Scalar>& grid) {
  using Scalar = typename DerivedA::Scalar;
  std::vector<Scalar> out;
  out.reserve(grid.size());
  for (const Scalar a : grid) {
    MatrixX<Scalar> M = a * A;
    M.diagonal() += d;
    out.push_back(perron_root(M));
  }
  return out;
}

template <typename Scalar>
bool is_nonincreasing(const std::vector<Scalar>& samples, Scalar tol) {
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (samples[k] > samples[k - 1] + tol) return false;
  }
  return true;
}

}  // namespace patchlv

#endif  // PATCHLV_SPECTRAL_HPP
