#pragma once

#include <cmath>

#include "modescope/companion.hpp"
#include "modescope/dmd.hpp"
#include "modescope/linalg.hpp"
#include "modescope/selection.hpp"
#include "modescope/signal.hpp"
#include "modescope/types.hpp"

namespace modescope {

/// a (x) b, blocks of b scaled by the entries of a.
template <typename Scalar>
CVec<Scalar> kron_vec(const CVec<Scalar>& a, const CVec<Scalar>& b) {
  CVec<Scalar> out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Worst-mode error of P_U phi_e_j = lambda_j phi_p_j, relative to
/// 1 + ||phi_e_j||.
template <typename Scalar>
Scalar max_projection_identity_error(const DmdDecomposition<Scalar>& dec) {
  Scalar worst = 0;
  for (Index j = 0; j < dec.M; ++j) {
    const CVec<Scalar> phi_e = dec.exact_modes.col(j);
    const CVec<Scalar> proj = dec.svd.U * (dec.svd.U.adjoint() * phi_e);
    const Scalar err = (proj - dec.eigenvalues(j) * dec.projected_modes.col(j)).norm() /
                       (Scalar(1) + phi_e.norm());
    worst = std::max(worst, err);
  }
  return worst;
}

/// Worst-mode error of the orthogonal energy split
/// ||phi_e||^2 = |lambda|^2 + ||(I - P_U) phi_e||^2, relative to
/// max(1, ||phi_e||^2).
template <typename Scalar>
Scalar max_energy_split_error(const DmdDecomposition<Scalar>& dec) {
  Scalar worst = 0;
  for (Index j = 0; j < dec.M; ++j) {
    const CVec<Scalar> phi_e = dec.exact_modes.col(j);
    const CVec<Scalar> tail = phi_e - dec.svd.U * (dec.svd.U.adjoint() * phi_e);
    const Scalar total = phi_e.squaredNorm();
    const Scalar err =
        std::abs(total - std::norm(dec.eigenvalues(j)) - tail.squaredNorm()) /
        std::max(Scalar(1), total);
    worst = std::max(worst, err);
  }
  return worst;
}

/// Worst-mode gap between the closed-form residual score and the explicitly
/// projected residual energy.
template <typename Scalar>
Scalar max_esr_equivalence_error(const DmdDecomposition<Scalar>& dec) {
  const ModeScoreVector<Scalar> esr = esr_scores(dec);
  Scalar worst = 0;
  for (Index j = 0; j < dec.M; ++j) {
    const CVec<Scalar> phi_e = dec.exact_modes.col(j);
    const CVec<Scalar> tail = phi_e - dec.svd.U * (dec.svd.U.adjoint() * phi_e);
    const Scalar err = std::abs(esr.scores(j) - tail.squaredNorm()) /
                       std::max(Scalar(1), phi_e.squaredNorm());
    worst = std::max(worst, err);
  }
  return worst;
}

/// Worst deviation of the projected modes from unit norm.
template <typename Scalar>
Scalar max_unit_mode_error(const DmdDecomposition<Scalar>& dec) {
  Scalar worst = 0;
  for (Index j = 0; j < dec.M; ++j)
    worst = std::max(worst, std::abs(dec.projected_modes.col(j).norm() - Scalar(1)));
  return worst;
}

/// Frobenius error of the compression identity A_M = U^H C_L U, with the
/// companion applied column by column.
template <typename Scalar>
Scalar compression_error(const DmdDecomposition<Scalar>& dec,
                         const BlockCompanion<Scalar>& c) {
  CMat<Scalar> cu(dec.svd.U.rows(), dec.M);
  for (Index j = 0; j < dec.M; ++j)
    cu.col(j) = companion_matvec(c, CVec<Scalar>(dec.svd.U.col(j)));
  return (dec.reduced - dec.svd.U.adjoint() * cu).norm();
}

/// Frobenius error of the wide-regime identity: with full row rank and more
/// snapshot columns than embedded rows, the unreduced least-squares
/// propagator X1 X0^+ coincides with the companion. Dense; small problems
/// only.
template <typename Scalar>
Scalar wide_regime_operator_error(const SnapshotPair<Scalar>& pair,
                                  const BlockCompanion<Scalar>& c,
                                  const ThinSvd<Scalar>& svd_x0) {
  require(pair.wide(), "wide_regime_operator_error: pair is not wide");
  const CMat<Scalar> a_full = pair.x1 * pinv(svd_x0);
  return (a_full - companion_dense(c)).norm();
}

template <typename Scalar>
Scalar wide_regime_operator_error(const SnapshotPair<Scalar>& pair,
                                  const BlockCompanion<Scalar>& c) {
  return wide_regime_operator_error(pair, c, thin_svd(pair.x0));
}

/// Max entrywise deviation of a single-component embedded trajectory from
/// its Kronecker-Vandermonde closed form b (v_L(lambda) (x) phi) lambda^k.
template <typename Scalar>
Scalar data_side_kv_error(const SignalSpec<Scalar>& spec, Index L) {
  spec.validate();
  require(spec.m == 1, "data_side_kv_error: single-component specs only");
  require(spec.N >= L + 1, "data_side_kv_error: need N >= L + 1");
  const CMat<Scalar> emb = delay_embed(generate_clean(spec), L);
  const Complex<Scalar> lam = spec.eigenvalues()(0);
  const CVec<Scalar> lifted =
      kron_vec(vandermonde_vector<Scalar>(lam, L), CVec<Scalar>(spec.modes.col(0)));
  Scalar worst = 0;
  Complex<Scalar> power(1);
  for (Index k = 0; k < emb.cols(); ++k) {
    const CVec<Scalar> expected = spec.amplitudes(0) * power * lifted;
    worst = std::max(worst, (emb.col(k) - expected).template lpNorm<Eigen::Infinity>());
    power *= lam;
  }
  return worst;
}

/// Sine of the largest principal angle between two equal-dimension column
/// spaces, given as a (not necessarily orthonormal) spanning matrix and an
/// orthonormal basis.
template <typename Scalar>
Scalar subspace_sine(const CMat<Scalar>& spanning, const CMat<Scalar>& ortho) {
  require(spanning.cols() == ortho.cols(),
          "subspace_sine: subspace dimensions differ");
  Eigen::HouseholderQR<CMat<Scalar>> qr(spanning);
  const CMat<Scalar> q =
      qr.householderQ() * CMat<Scalar>::Identity(spanning.rows(), spanning.cols());
  const CMat<Scalar> resid = ortho - q * (q.adjoint() * ortho);
  Eigen::BDCSVD<CMat<Scalar>> svd(resid);
  return svd.singularValues()(0);
}

/// Spanning matrix of the clean embedded signal subspace: one lifted column
/// v_L(lambda_j) (x) phi_j per component.
template <typename Scalar>
CMat<Scalar> lifted_mode_matrix(const SignalSpec<Scalar>& spec, Index L) {
  CMat<Scalar> out(spec.D * L, spec.m);
  const CVec<Scalar> lam = spec.eigenvalues();
  for (Index j = 0; j < spec.m; ++j)
    out.col(j) = kron_vec(vandermonde_vector<Scalar>(lam(j), L),
                          CVec<Scalar>(spec.modes.col(j)));
  return out;
}

}  // namespace modescope
