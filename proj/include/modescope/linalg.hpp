#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "modescope/types.hpp"

namespace modescope {

/// base^k by repeated squaring; avoids the exp/log path of std::pow so that
/// powers of eigenvalues are plain product chains.
template <typename Scalar>
Complex<Scalar> pow_int(Complex<Scalar> base, long long k) {
  if (k < 0) return Complex<Scalar>(1) / pow_int(base, -k);
  Complex<Scalar> out(1);
  while (k > 0) {
    if (k & 1) out *= base;
    base *= base;
    k >>= 1;
  }
  return out;
}

/// Geometric column [1, lambda, ..., lambda^{n-1}].
template <typename Scalar>
CVec<Scalar> vandermonde_vector(Complex<Scalar> lambda, Index n) {
  require(n >= 1, "vandermonde_vector: n must be positive");
  CVec<Scalar> v(n);
  v(0) = Complex<Scalar>(1);
  for (Index i = 1; i < n; ++i) v(i) = v(i - 1) * lambda;
  return v;
}

/// n-row Vandermonde matrix with one geometric column per node.
template <typename Scalar>
CMat<Scalar> vandermonde_matrix(const CVec<Scalar>& nodes, Index n) {
  CMat<Scalar> V(n, nodes.size());
  for (Index j = 0; j < nodes.size(); ++j)
    V.col(j) = vandermonde_vector<Scalar>(nodes(j), n);
  return V;
}

/// Unstacks a length-(D*L) block vector into a D x L matrix, one block per
/// column (lag index runs over columns).
template <typename Scalar>
CMat<Scalar> reshape_blocks(const CVec<Scalar>& v, Index D, Index L) {
  require(D >= 1 && L >= 1, "reshape_blocks: D and L must be positive");
  require(v.size() == D * L, "reshape_blocks: length must be D*L");
  return Eigen::Map<const CMat<Scalar>>(v.data(), D, L);
}

/// Full thin SVD, A = U diag(sigma) V^H with U, V having min(rows, cols)
/// columns. Shared between the truncated decomposition and pseudoinverse
/// applications so one factorization serves both.
template <typename Scalar>
struct ThinSvd {
  CMat<Scalar> U;
  CMat<Scalar> V;
  RVec<Scalar> sigma;  // nonincreasing, >= 0

  Index rank() const {
    if (sigma.size() == 0 || sigma(0) <= Scalar(0)) return 0;
    const Scalar cut = Scalar(pinv_rel_tol) * sigma(0);
    Index r = 0;
    while (r < sigma.size() && sigma(r) > cut) ++r;
    return r;
  }
};

template <typename Scalar>
ThinSvd<Scalar> thin_svd(const CMat<Scalar>& A) {
  Eigen::BDCSVD<CMat<Scalar>> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

/// Least-squares / minimum-norm solve min ||A X - B||_F through the SVD,
/// discarding directions with sigma_i <= pinv_rel_tol * sigma_1.
template <typename Scalar>
CMat<Scalar> pinv_solve(const ThinSvd<Scalar>& svd, const CMat<Scalar>& rhs) {
  const Index r = svd.rank();
  CMat<Scalar> y = svd.U.leftCols(r).adjoint() * rhs;
  for (Index i = 0; i < r; ++i) y.row(i) /= svd.sigma(i);
  return svd.V.leftCols(r) * y;
}

template <typename Scalar>
CMat<Scalar> pinv_solve(const CMat<Scalar>& A, const CMat<Scalar>& rhs) {
  return pinv_solve(thin_svd(A), rhs);
}

/// Moore-Penrose pseudoinverse with the shared cutoff. Builds the dense
/// inverse; intended for operator-sized (not trajectory-sized) matrices.
template <typename Scalar>
CMat<Scalar> pinv(const ThinSvd<Scalar>& svd) {
  const Index r = svd.rank();
  CMat<Scalar> scaled = svd.V.leftCols(r);
  for (Index i = 0; i < r; ++i) scaled.col(i) /= svd.sigma(i);
  return scaled * svd.U.leftCols(r).adjoint();
}

}  // namespace modescope
