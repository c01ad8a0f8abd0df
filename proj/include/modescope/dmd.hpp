#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "modescope/linalg.hpp"
#include "modescope/types.hpp"

namespace modescope {

/// Stacks L consecutive samples per column:
/// column k of the result is [x_k; x_{k+1}; ...; x_{k+L-1}], giving a
/// (D*L) x (N-L+1) matrix.
template <typename Derived>
CMat<typename Derived::RealScalar> delay_embed(
    const Eigen::MatrixBase<Derived>& samples, Index L) {
  using Scalar = typename Derived::RealScalar;
  const Index D = samples.rows();
  const Index N = samples.cols();
  require(L >= 1, "delay_embed: L must be >= 1");
  require(N > L, "delay_embed: need more than L samples");
  CMat<Scalar> out(D * L, N - L + 1);
  for (Index k = 0; k <= N - L; ++k)
    for (Index l = 0; l < L; ++l) out.col(k).segment(l * D, D) = samples.col(k + l);
  return out;
}

/// One-step-shifted snapshot matrices of the embedded trajectory.
/// x1.col(k) equals x0.col(k+1) for k < cols-1 by construction.
template <typename Scalar>
struct SnapshotPair {
  CMat<Scalar> x0;  // (D*L) x (N-L)
  CMat<Scalar> x1;  // (D*L) x (N-L)
  Index D = 0;
  Index L = 0;

  Index rows() const { return x0.rows(); }
  Index cols() const { return x0.cols(); }
  /// At least as many snapshot columns as embedded rows; the companion
  /// predictor is exactly recoverable in this regime.
  bool wide() const { return rows() <= cols(); }
};

template <typename Derived>
SnapshotPair<typename Derived::RealScalar> snapshot_pair(
    const Eigen::MatrixBase<Derived>& samples, Index L) {
  using Scalar = typename Derived::RealScalar;
  const Index N = samples.cols();
  require(L >= 1, "snapshot_pair: L must be >= 1");
  require(N - L >= 2, "snapshot_pair: need N - L >= 2 snapshot columns");
  CMat<Scalar> emb = delay_embed(samples, L);
  SnapshotPair<Scalar> pair;
  pair.D = samples.rows();
  pair.L = L;
  pair.x0 = emb.leftCols(N - L);
  pair.x1 = emb.rightCols(N - L);
  return pair;
}

/// Rank-M truncation of the snapshot SVD. full_sigma keeps the whole
/// spectrum for order-detection baselines.
template <typename Scalar>
struct TruncatedSvd {
  CMat<Scalar> U;        // leading M left singular vectors
  CMat<Scalar> V;        // leading M right singular vectors
  RVec<Scalar> sigma;    // leading M singular values
  RVec<Scalar> full_sigma;
};

template <typename Scalar>
TruncatedSvd<Scalar> truncate(const ThinSvd<Scalar>& svd, Index M) {
  require(M >= 1, "truncate: M must be >= 1");
  require(M <= svd.sigma.size(), "truncate: M exceeds the rank bound min(rows, cols)");
  require(svd.sigma(M - 1) > Scalar(pinv_rel_tol) * svd.sigma(0),
          "truncate: M exceeds the numerical rank of the snapshot matrix");
  return {svd.U.leftCols(M), svd.V.leftCols(M), svd.sigma.head(M), svd.sigma};
}

template <typename Scalar>
TruncatedSvd<Scalar> truncated_svd(const CMat<Scalar>& A, Index M) {
  return truncate(thin_svd(A), M);
}

/// Rank-M decomposition of the embedded pair. Eigenpairs are sorted by
/// descending |lambda| (ties by descending phase) and eigenvectors carry a
/// fixed gauge: unit norm with the first nonnegligible entry real positive.
template <typename Scalar>
struct DmdDecomposition {
  Index D = 0;
  Index L = 0;
  Index M = 0;
  TruncatedSvd<Scalar> svd;
  CMat<Scalar> reduced;          // A_M = U^H X1 V Sigma^{-1}, M x M
  CVec<Scalar> eigenvalues;      // M
  CMat<Scalar> eigenvectors;     // M x M, columns w_j
  CMat<Scalar> projected_modes;  // U w_j, unit norm
  CMat<Scalar> exact_modes;      // X1 V Sigma^{-1} w_j
  CVec<Scalar> amplitudes;       // least-squares fit to the first snapshot
  bool amplitudes_rank_deficient = false;
  bool wide_regime = false;  // snapshot matrix wider than tall
};

template <typename Scalar>
struct AmplitudeFit {
  CVec<Scalar> values;
  bool rank_deficient = false;
};

/// Least-squares amplitudes min ||modes * b - x0||. Rank-deficient mode
/// matrices yield the minimum-norm solution with a flag.
template <typename Scalar>
AmplitudeFit<Scalar> fit_amplitudes(const CMat<Scalar>& modes, const CVec<Scalar>& x0) {
  require(modes.rows() == x0.size(), "fit_amplitudes: dimension mismatch");
  const ThinSvd<Scalar> svd = thin_svd(modes);
  AmplitudeFit<Scalar> fit;
  fit.values = pinv_solve(svd, CMat<Scalar>(x0));
  fit.rank_deficient = svd.rank() < modes.cols();
  return fit;
}

template <typename Scalar>
AmplitudeFit<Scalar> fit_amplitudes(const DmdDecomposition<Scalar>& dec, const CVec<Scalar>& x0) {
  return fit_amplitudes(dec.exact_modes, x0);
}

namespace detail {

/// Deterministic eigenpair order: modulus descending, then phase descending.
template <typename Scalar>
std::vector<Index> eigen_sort_order(const CVec<Scalar>& lam) {
  std::vector<Index> idx(static_cast<size_t>(lam.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const Scalar ma = std::abs(lam(a));
    const Scalar mb = std::abs(lam(b));
    if (ma != mb) return ma > mb;
    return std::arg(lam(a)) > std::arg(lam(b));
  });
  return idx;
}

/// Unit norm, first entry with |w_i| > 1e-12 rotated to the positive real
/// axis. Pins the arbitrary eigenvector phase so repeated runs agree.
template <typename Scalar>
void fix_gauge(Eigen::Ref<CVec<Scalar>> w) {
  w.normalize();
  for (Index i = 0; i < w.size(); ++i) {
    const Scalar a = std::abs(w(i));
    if (a > Scalar(1e-12)) {
      w *= std::conj(w(i)) / a;
      break;
    }
  }
}

}  // namespace detail

template <typename Scalar>
DmdDecomposition<Scalar> decompose(const SnapshotPair<Scalar>& pair, Index M,
                                   const ThinSvd<Scalar>& svd_x0) {
  DmdDecomposition<Scalar> dec;
  dec.D = pair.D;
  dec.L = pair.L;
  dec.M = M;
  dec.wide_regime = pair.rows() <= pair.cols();
  dec.svd = truncate(svd_x0, M);

  // K = X1 V Sigma^{-1}; then A_M = U^H K and exact modes are K W.
  CMat<Scalar> K = pair.x1 * dec.svd.V;
  for (Index i = 0; i < M; ++i) K.col(i) /= dec.svd.sigma(i);
  dec.reduced = dec.svd.U.adjoint() * K;

  Eigen::ComplexEigenSolver<CMat<Scalar>> eig(dec.reduced);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error(
        "decompose: eigensolver failed to converge on the reduced operator "
        "(||A_M|| = " + std::to_string(dec.reduced.norm()) + ")");

  const std::vector<Index> order = detail::eigen_sort_order<Scalar>(eig.eigenvalues());
  dec.eigenvalues.resize(M);
  dec.eigenvectors.resize(M, M);
  for (Index j = 0; j < M; ++j) {
    dec.eigenvalues(j) = eig.eigenvalues()(order[static_cast<size_t>(j)]);
    dec.eigenvectors.col(j) = eig.eigenvectors().col(order[static_cast<size_t>(j)]);
    detail::fix_gauge<Scalar>(dec.eigenvectors.col(j));
  }

  dec.projected_modes = dec.svd.U * dec.eigenvectors;
  dec.exact_modes = K * dec.eigenvectors;

  const AmplitudeFit<Scalar> fit =
      fit_amplitudes(dec.exact_modes, CVec<Scalar>(pair.x0.col(0)));
  dec.amplitudes = fit.values;
  dec.amplitudes_rank_deficient = fit.rank_deficient;
  return dec;
}

template <typename Scalar>
DmdDecomposition<Scalar> decompose(const SnapshotPair<Scalar>& pair, Index M) {
  return decompose(pair, M, thin_svd(pair.x0));
}

/// State of the embedded system k steps after the first snapshot:
/// exact_modes * Lambda^k * amplitudes.
template <typename Scalar>
CVec<Scalar> reconstruct(const DmdDecomposition<Scalar>& dec, long long k) {
  require(k >= 0, "reconstruct: k must be nonnegative");
  CVec<Scalar> weighted(dec.M);
  for (Index j = 0; j < dec.M; ++j)
    weighted(j) = pow_int(dec.eigenvalues(j), k) * dec.amplitudes(j);
  return dec.exact_modes * weighted;
}

/// First D entries of the reconstruction: the predicted original-space
/// sample at index k.
template <typename Scalar>
CVec<Scalar> predict_original(const DmdDecomposition<Scalar>& dec, long long k) {
  return reconstruct(dec, k).head(dec.D);
}

}  // namespace modescope
