#pragma once

#include <cmath>
#include <limits>

#include "modescope/dmd.hpp"
#include "modescope/linalg.hpp"
#include "modescope/signal.hpp"
#include "modescope/types.hpp"

namespace modescope {

/// Block-companion propagator of the embedded system. Only the last block
/// row B (the one-step predictor of the newest sample from the current
/// window) is stored; the other rows are the exact block shift and are
/// applied implicitly.
template <typename Scalar>
struct BlockCompanion {
  Index D = 0;
  Index L = 0;
  CMat<Scalar> predictor;  // B: D x (D*L)

  void validate() const {
    require(D >= 1 && L >= 1, "BlockCompanion: D and L must be positive");
    require(predictor.rows() == D && predictor.cols() == D * L,
            "BlockCompanion: predictor must be D x (D*L)");
  }
};

/// Least-squares fit of the last block row: B = X1^{(L-1)} X0^+, the rows of
/// X1 holding the newest sample of each shifted window.
template <typename Scalar>
BlockCompanion<Scalar> fit_companion(const SnapshotPair<Scalar>& pair,
                                     const ThinSvd<Scalar>& svd_x0) {
  require(pair.x0.norm() > Scalar(0), "fit_companion: snapshot matrix is zero");
  BlockCompanion<Scalar> c;
  c.D = pair.D;
  c.L = pair.L;
  // B = X1_last * pinv(X0). Solved through B^H = (X0^H)^+ X1_last^H, whose
  // SVD is V Sigma U^H, so the trajectory-sized pseudoinverse is never
  // formed densely.
  CMat<Scalar> last = pair.x1.bottomRows(pair.D);
  ThinSvd<Scalar> svd_h{svd_x0.V, svd_x0.U, svd_x0.sigma};
  c.predictor = pinv_solve(svd_h, CMat<Scalar>(last.adjoint())).adjoint();
  c.validate();
  return c;
}

template <typename Scalar>
BlockCompanion<Scalar> fit_companion(const SnapshotPair<Scalar>& pair) {
  return fit_companion(pair, thin_svd(pair.x0));
}

/// Applies the companion operator without materializing it: shift the
/// window up by one block, predict the newest block with B.
template <typename Scalar>
CVec<Scalar> companion_matvec(const BlockCompanion<Scalar>& c, const CVec<Scalar>& v) {
  require(v.size() == c.D * c.L, "companion_matvec: length must be D*L");
  CVec<Scalar> out(c.D * c.L);
  if (c.L > 1) out.head(c.D * (c.L - 1)) = v.tail(c.D * (c.L - 1));
  out.tail(c.D) = c.predictor * v;
  return out;
}

/// Dense (D*L) x (D*L) companion matrix. Diagnostic use only; production
/// paths go through companion_matvec.
template <typename Scalar>
CMat<Scalar> companion_dense(const BlockCompanion<Scalar>& c) {
  const Index n = c.D * c.L;
  CMat<Scalar> full = CMat<Scalar>::Zero(n, n);
  if (c.L > 1)
    full.topRightCorner(c.D * (c.L - 1), c.D * (c.L - 1))
        .setIdentity();
  full.bottomRows(c.D) = c.predictor;
  return full;
}

/// Per-mode error of the finite-rank residual identity
///   (C_L - lambda_j I) phi_p_j = (I - U U^H) phi_e_j,
/// normalized by 1 + ||phi_e_j||.
template <typename Scalar>
RVec<Scalar> residual_identity_error(const DmdDecomposition<Scalar>& dec,
                                     const BlockCompanion<Scalar>& c) {
  require(c.D == dec.D && c.L == dec.L,
          "residual_identity_error: companion and decomposition disagree on D, L");
  RVec<Scalar> err(dec.M);
  for (Index j = 0; j < dec.M; ++j) {
    const CVec<Scalar> phi_p = dec.projected_modes.col(j);
    const CVec<Scalar> phi_e = dec.exact_modes.col(j);
    const CVec<Scalar> lhs = companion_matvec(c, phi_p) - dec.eigenvalues(j) * phi_p;
    const CVec<Scalar> rhs = phi_e - dec.svd.U * (dec.svd.U.adjoint() * phi_e);
    err(j) = (lhs - rhs).norm() / (Scalar(1) + phi_e.norm());
  }
  return err;
}

/// Distance of a length-(D*L) vector from the Kronecker-Vandermonde form
/// v_L(mu) (x) phi, relative to its own norm. The candidate spatial factor
/// is the first block (the reshaped first column, since v_L starts at 1).
template <typename Scalar>
Scalar kv_form_error(const CVec<Scalar>& eigvec, Complex<Scalar> eigval,
                     Index L, Index D) {
  require(L >= 1 && D >= 1, "kv_form_error: D and L must be positive");
  require(eigvec.size() == D * L, "kv_form_error: length must be D*L");
  const Scalar nrm = eigvec.norm();
  require(nrm > Scalar(0), "kv_form_error: zero vector");
  const CMat<Scalar> reshaped = reshape_blocks(eigvec, D, L);
  const CVec<Scalar> v = vandermonde_vector<Scalar>(eigval, L);
  const CMat<Scalar> kv = reshaped.col(0) * v.transpose();
  return (reshaped - kv).norm() / nrm;
}

/// First-order bound on the sine of the largest principal angle between the
/// noisy leading singular subspace and the clean signal subspace:
///   eta = ||E|| / (sigma_m(Phi) min|b| sigma_m(V_L) sigma_m(V_{N-L}) - ||E||).
/// Returns +infinity when the denominator is not positive (bound breakdown).
template <typename Scalar>
Scalar subspace_deviation_bound(const SignalSpec<Scalar>& spec, Index L,
                                Scalar noise_norm) {
  spec.validate();
  require(L >= 1 && spec.N - L >= 1, "subspace_deviation_bound: invalid L");
  require(noise_norm >= Scalar(0), "subspace_deviation_bound: negative noise norm");
  const CVec<Scalar> lam = spec.eigenvalues();
  for (Index i = 0; i < spec.m; ++i)
    for (Index j = i + 1; j < spec.m; ++j)
      require(std::abs(lam(i) - lam(j)) > Scalar(1e-12),
              "subspace_deviation_bound: repeated eigenvalues collapse the Vandermonde rank");

  auto smallest_sv = [](const CMat<Scalar>& A) {
    Eigen::BDCSVD<CMat<Scalar>> svd(A);
    return svd.singularValues()(svd.singularValues().size() - 1);
  };
  const Scalar s_phi = smallest_sv(spec.modes);
  const Scalar s_vl = smallest_sv(vandermonde_matrix<Scalar>(lam, L));
  const Scalar s_vt = smallest_sv(vandermonde_matrix<Scalar>(lam, spec.N - L));
  const Scalar b_min = spec.amplitudes.cwiseAbs().minCoeff();

  const Scalar denom = s_phi * b_min * s_vl * s_vt - noise_norm;
  if (denom <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return noise_norm / denom;
}

}  // namespace modescope
