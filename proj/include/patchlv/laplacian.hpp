#ifndef PATCHLV_LAPLACIAN_HPP
#define PATCHLV_LAPLACIAN_HPP

#include "patchlv/types.hpp"

namespace patchlv {

// Both builders take the raw weight matrix a_ij (movement from patch j to
// patch i, zero diagonal) so the graph type can use them without a cycle.

/// Connection matrix: L_ij = a_ij off the diagonal, L_ii = -sum_{k != i} a_ki.
/// Every column sums to zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> connection_matrix_from_weights(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> L = a;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    L(i, i) = Scalar(0);
    Scalar column = Scalar(0);
    for (Eigen::Index k = 0; k < L.rows(); ++k) {
      if (k != i) column += a(k, i);
    }
    L(i, i) = -column;
  }
  return L;
}

/// Row Laplacian: diagonal sum_{k != i} a_ik, off-diagonal -a_ij. Every row sums to zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> row_laplacian_from_weights(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> R = -a;
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    Scalar row = Scalar(0);
    for (Eigen::Index k = 0; k < R.cols(); ++k) {
      if (k != i) row += a(i, k);
    }
    R(i, i) = row;
  }
  return R;
}

}  // namespace patchlv

#endif  // PATCHLV_LAPLACIAN_HPP
