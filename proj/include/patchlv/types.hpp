#ifndef PATCHLV_TYPES_HPP
#define PATCHLV_TYPES_HPP

#include <Eigen/Dense>

namespace patchlv {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

}  // namespace patchlv

#endif  // PATCHLV_TYPES_HPP
