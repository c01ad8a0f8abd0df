#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace modescope {

using Index = Eigen::Index;

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// Dense column-major complex matrix/vector over a real scalar type.
template <typename Scalar>
using CMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative singular-value cutoff shared by every pseudoinverse and rank
/// decision in the library.
inline constexpr double pinv_rel_tol = 1e-12;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace modescope
