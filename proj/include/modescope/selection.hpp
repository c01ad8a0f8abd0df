#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "modescope/dmd.hpp"
#include "modescope/linalg.hpp"
#include "modescope/types.hpp"

namespace modescope {

enum class Method {
  EsrEnergy,      // residual energy of the exact mode outside the POD subspace
  NestedKv,       // rank-1 lag-axis decomposition of the reshaped mode
  Fekvf,          // rank-1 KV fit at the mode's own eigenvalue
  Stc,            // median relative error of entrywise lag quotients
  ExactModeNorm,  // ||phi_e||, larger for signal modes in the expanding regime
  EigMagnitude,   // |lambda|, baseline separating damped spurious eigenvalues
  Bic,            // information-criterion order detector on the spectrum
  Gap             // largest singular-value gap order detector
};

inline bool is_order_only(Method m) { return m == Method::Bic || m == Method::Gap; }

/// Orientation of the per-mode score: true modes score low for residual
/// methods, high for magnitude methods.
inline bool method_smaller_is_true(Method m) {
  return m == Method::EsrEnergy || m == Method::NestedKv || m == Method::Fekvf ||
         m == Method::Stc;
}

inline const char* method_name(Method m) {
  switch (m) {
    case Method::EsrEnergy: return "ESR-Energy";
    case Method::NestedKv: return "NestedDMD";
    case Method::Fekvf: return "FEKVF";
    case Method::Stc: return "STC";
    case Method::ExactModeNorm: return "ExactModeNorm";
    case Method::EigMagnitude: return "EigenvalueMagnitude";
    case Method::Bic: return "BIC";
    case Method::Gap: return "GAP";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::erase_if(s, [](char c) { return c == '-' || c == '_'; });
  if (s == "esrenergy" || s == "esr") return Method::EsrEnergy;
  if (s == "nesteddmd" || s == "nestedkv" || s == "nested") return Method::NestedKv;
  if (s == "fekvf" || s == "fixedeigenvaluekvfit") return Method::Fekvf;
  if (s == "stc") return Method::Stc;
  if (s == "exactmodenorm" || s == "modenorm") return Method::ExactModeNorm;
  if (s == "eigenvaluemagnitude" || s == "eigmagnitude" || s == "eigmag")
    return Method::EigMagnitude;
  if (s == "bic") return Method::Bic;
  if (s == "gap") return Method::Gap;
  throw std::invalid_argument(
      "unknown method '" + std::string(name) +
      "' (valid: ESR-Energy, NestedDMD, FEKVF, STC, ExactModeNorm, "
      "EigenvalueMagnitude, BIC, GAP)");
}

/// Score used when a per-mode statistic is undefined (zero inner spectrum,
/// no gated entries, zero eigenvalue). Large enough to land in the spurious
/// cluster, finite so downstream transforms stay valid.
inline constexpr double score_sentinel = 1e300;

template <typename Scalar>
struct ModeScoreVector {
  Method method{};
  RVec<Scalar> scores;        // one per mode, finite
  bool smaller_is_true = true;
  Scalar epsilon = Scalar(1e-12);  // log offset for residual-type scores
  bool sentinel_used = false;
};

/// Energy of each exact mode outside the rank-M subspace:
/// R_j = ||phi_e_j||^2 - |lambda_j|^2, clamped at zero against roundoff.
template <typename Scalar>
ModeScoreVector<Scalar> esr_scores(const DmdDecomposition<Scalar>& dec) {
  ModeScoreVector<Scalar> out{Method::EsrEnergy, RVec<Scalar>(dec.M), true,
                              Scalar(1e-12), false};
  for (Index j = 0; j < dec.M; ++j) {
    const Scalar r =
        dec.exact_modes.col(j).squaredNorm() - std::norm(dec.eigenvalues(j));
    out.scores(j) = std::max(r, Scalar(0));
  }
  return out;
}

/// Nested rank-1 decomposition along the lag axis of each reshaped projected
/// mode. The mode is reshaped to D x L, a one-step rank-1 fit of its column
/// shift yields an inner pair (phi_tilde, lambda_tilde), and the score is the
/// mean squared deviation from the implied KV template
///   (phi_tilde phi_tilde^H y_0) v_L(lambda_tilde)^T,   y_0 = first column.
template <typename Scalar>
ModeScoreVector<Scalar> nested_kv_scores(const DmdDecomposition<Scalar>& dec) {
  require(dec.L >= 3, "nested_kv_scores: need L >= 3 for the inner one-step fit");
  ModeScoreVector<Scalar> out{Method::NestedKv, RVec<Scalar>(dec.M), true,
                              Scalar(1e-12), false};
  const Scalar denom = static_cast<Scalar>(dec.D * dec.L);
  for (Index j = 0; j < dec.M; ++j) {
    const CMat<Scalar> phi = reshape_blocks<Scalar>(dec.projected_modes.col(j), dec.D, dec.L);
    const CMat<Scalar> inner0 = phi.leftCols(dec.L - 1);
    const CMat<Scalar> inner1 = phi.rightCols(dec.L - 1);
    Eigen::JacobiSVD<CMat<Scalar>> svd(inner0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Scalar s1 = svd.singularValues()(0);
    if (!(s1 > Scalar(0))) {
      out.scores(j) = Scalar(score_sentinel);
      out.sentinel_used = true;
      continue;
    }
    const CVec<Scalar> u1 = svd.matrixU().col(0);
    const CVec<Scalar> v1 = svd.matrixV().col(0);
    const Complex<Scalar> lam_inner = u1.dot(inner1 * v1) / s1;
    const CVec<Scalar> spatial = u1 * u1.dot(phi.col(0));
    const CMat<Scalar> kv =
        spatial * vandermonde_vector<Scalar>(lam_inner, dec.L).transpose();
    out.scores(j) = (phi - kv).squaredNorm() / denom;
  }
  return out;
}

/// Rank-1 KV fit with the lag profile pinned to the mode's own eigenvalue:
/// minimizes ||Phi_j - u v_L(lambda_j)^T||_F over the spatial factor u alone.
template <typename Scalar>
ModeScoreVector<Scalar> fekvf_scores(const DmdDecomposition<Scalar>& dec) {
  ModeScoreVector<Scalar> out{Method::Fekvf, RVec<Scalar>(dec.M), true,
                              Scalar(1e-12), false};
  const Scalar denom = static_cast<Scalar>(dec.D * dec.L);
  for (Index j = 0; j < dec.M; ++j) {
    const CMat<Scalar> phi = reshape_blocks<Scalar>(dec.projected_modes.col(j), dec.D, dec.L);
    const CVec<Scalar> a = vandermonde_vector<Scalar>(dec.eigenvalues(j), dec.L);
    const CVec<Scalar> u = phi * a.conjugate() / a.squaredNorm();
    out.scores(j) = (phi - u * a.transpose()).squaredNorm() / denom;
  }
  return out;
}

namespace detail {

template <typename Scalar>
Scalar median_inplace(std::vector<Scalar>& v) {
  const size_t n = v.size();
  std::sort(v.begin(), v.end());
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / Scalar(2);
}

}  // namespace detail

/// Shift-consistency check on the reshaped mode: every entrywise quotient of
/// consecutive lag blocks should reproduce the eigenvalue. Scores the median
/// relative error over entries whose source magnitude clears a relative
/// gate, so zero coordinates of the spatial factor do not pollute the
/// statistic.
template <typename Scalar>
ModeScoreVector<Scalar> stc_scores(const DmdDecomposition<Scalar>& dec,
                                   Scalar relative_gate = Scalar(1e-6)) {
  require(dec.L >= 2, "stc_scores: need L >= 2 for lag quotients");
  ModeScoreVector<Scalar> out{Method::Stc, RVec<Scalar>(dec.M), true,
                              Scalar(1e-12), false};
  for (Index j = 0; j < dec.M; ++j) {
    const CMat<Scalar> phi = reshape_blocks<Scalar>(dec.projected_modes.col(j), dec.D, dec.L);
    const Complex<Scalar> lam = dec.eigenvalues(j);
    const Scalar lam_abs = std::abs(lam);
    const Scalar gate = relative_gate * phi.cwiseAbs().maxCoeff();
    if (!(lam_abs > Scalar(0))) {
      out.scores(j) = Scalar(score_sentinel);
      out.sentinel_used = true;
      continue;
    }
    std::vector<Scalar> rel;
    rel.reserve(static_cast<size_t>(dec.D * (dec.L - 1)));
    for (Index l = 0; l + 1 < dec.L; ++l)
      for (Index d = 0; d < dec.D; ++d) {
        if (std::abs(phi(d, l)) <= gate) continue;
        rel.push_back(std::abs(phi(d, l + 1) / phi(d, l) - lam) / lam_abs);
      }
    if (rel.empty()) {
      out.scores(j) = Scalar(score_sentinel);
      out.sentinel_used = true;
      continue;
    }
    out.scores(j) = detail::median_inplace(rel);
  }
  return out;
}

template <typename Scalar>
ModeScoreVector<Scalar> mode_norm_scores(const DmdDecomposition<Scalar>& dec) {
  ModeScoreVector<Scalar> out{Method::ExactModeNorm, RVec<Scalar>(dec.M), false,
                              Scalar(1e-12), false};
  for (Index j = 0; j < dec.M; ++j) out.scores(j) = dec.exact_modes.col(j).norm();
  return out;
}

template <typename Scalar>
ModeScoreVector<Scalar> eig_magnitude_scores(const DmdDecomposition<Scalar>& dec) {
  ModeScoreVector<Scalar> out{Method::EigMagnitude, RVec<Scalar>(dec.M), false,
                              Scalar(1e-12), false};
  for (Index j = 0; j < dec.M; ++j) out.scores(j) = std::abs(dec.eigenvalues(j));
  return out;
}

template <typename Scalar>
ModeScoreVector<Scalar> method_scores(Method m, const DmdDecomposition<Scalar>& dec) {
  switch (m) {
    case Method::EsrEnergy: return esr_scores(dec);
    case Method::NestedKv: return nested_kv_scores(dec);
    case Method::Fekvf: return fekvf_scores(dec);
    case Method::Stc: return stc_scores(dec);
    case Method::ExactModeNorm: return mode_norm_scores(dec);
    case Method::EigMagnitude: return eig_magnitude_scores(dec);
    default:
      throw std::invalid_argument("method_scores: order-only methods have no per-mode scores");
  }
}

/// Exact 1-D two-means split of the values in f: the partition into a lower
/// and an upper interval of the sorted order minimizing the within-cluster
/// sum of squares. Ties prefer the smaller lower cluster.
struct TwoMeansSplit {
  Index lower_count = 0;
  double lower_mean = 0;
  double upper_mean = 0;
  double wcss = 0;
};

inline TwoMeansSplit two_means_split(const Eigen::VectorXd& f) {
  const Index n = f.size();
  require(n >= 2, "two_means_split: need at least two values");
  std::vector<double> s(f.data(), f.data() + n);
  std::sort(s.begin(), s.end());
  std::vector<double> pre(static_cast<size_t>(n) + 1, 0.0);
  std::vector<double> pre2(static_cast<size_t>(n) + 1, 0.0);
  for (Index i = 0; i < n; ++i) {
    pre[i + 1] = pre[i] + s[static_cast<size_t>(i)];
    pre2[i + 1] = pre2[i] + s[static_cast<size_t>(i)] * s[static_cast<size_t>(i)];
  }
  TwoMeansSplit best;
  bool have = false;
  for (Index k = 1; k < n; ++k) {
    const double m1 = pre[k] / static_cast<double>(k);
    const double m2 = (pre[n] - pre[k]) / static_cast<double>(n - k);
    const double wcss = (pre2[k] - static_cast<double>(k) * m1 * m1) +
                        (pre2[n] - pre2[k] - static_cast<double>(n - k) * m2 * m2);
    if (!have || wcss < best.wcss) {
      best = {k, m1, m2, wcss};
      have = true;
    }
  }
  return best;
}

template <typename Scalar>
struct SelectionResult {
  std::vector<bool> is_true;  // per mode, original order
  Index m_hat = 0;
  Scalar true_mean = 0;      // mean of the transformed scores in the true cluster
  Scalar spurious_mean = 0;
  bool degenerate = false;   // all scores indistinguishable; everything kept
};

/// Splits the transformed scores into a true and a spurious cluster.
/// Residual-type (smaller-is-true) scores are log-scaled, f = log(score +
/// epsilon), provided they are all nonnegative; magnitude-type scores enter
/// negated. The cluster with the smaller transformed mean is the true one.
///
/// Two degenerate escapes return every mode as true (m_hat = M):
/// residual scores all below 100*epsilon (nothing left to reject), and a
/// transformed range below 1e-6 relative (no separation to cluster on).
template <typename Scalar>
SelectionResult<Scalar> binary_select(const ModeScoreVector<Scalar>& msv) {
  const Index M = msv.scores.size();
  require(M >= 2, "binary_select: need at least two modes");
  require(msv.scores.allFinite(), "binary_select: scores must be finite");

  SelectionResult<Scalar> res;
  res.is_true.assign(static_cast<size_t>(M), true);

  Eigen::VectorXd f(M);
  const bool log_scale =
      msv.smaller_is_true && msv.scores.minCoeff() >= Scalar(0);
  for (Index j = 0; j < M; ++j) {
    const double sj = static_cast<double>(msv.scores(j));
    if (log_scale)
      f(j) = std::log(sj + static_cast<double>(msv.epsilon));
    else
      f(j) = msv.smaller_is_true ? sj : -sj;
  }

  const bool all_negligible =
      msv.smaller_is_true && msv.scores.minCoeff() >= Scalar(0) &&
      msv.scores.maxCoeff() <= Scalar(100) * msv.epsilon;
  const double spread = f.maxCoeff() - f.minCoeff();
  if (all_negligible || spread <= 1e-6 * std::max(1.0, f.cwiseAbs().maxCoeff())) {
    res.m_hat = M;
    res.true_mean = res.spurious_mean = static_cast<Scalar>(f.mean());
    res.degenerate = true;
    return res;
  }

  const TwoMeansSplit split = two_means_split(f);

  // Membership by rank in f: the lower_count smallest transformed scores
  // form the true cluster. Ties across the boundary resolve by original
  // index, matching a stable sort of (value, index).
  std::vector<Index> idx(static_cast<size_t>(M));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return f(a) < f(b); });
  res.is_true.assign(static_cast<size_t>(M), false);
  for (Index r = 0; r < split.lower_count; ++r)
    res.is_true[static_cast<size_t>(idx[static_cast<size_t>(r)])] = true;
  res.m_hat = split.lower_count;
  res.true_mean = static_cast<Scalar>(split.lower_mean);
  res.spurious_mean = static_cast<Scalar>(split.upper_mean);
  return res;
}

/// Information-criterion order estimate from the snapshot spectrum
/// (Wax-Kailath form with a BIC penalty). Covariance eigenvalues are
/// sigma_i^2 / n_cols; the criterion for order k compares the geometric and
/// arithmetic means of the trailing p-k eigenvalues:
///   BIC(k) = -2 n_cols (p-k) log(g_k / a_k) + k (2p - k) log(n_cols).
template <typename Scalar>
Index bic_order(const TruncatedSvd<Scalar>& svd, Index n_cols, Index max_order) {
  const Index p = svd.full_sigma.size();
  require(n_cols >= 2, "bic_order: need at least two snapshot columns");
  require(max_order >= 1 && max_order < p, "bic_order: need 1 <= max_order < p");

  std::vector<double> log_ell(static_cast<size_t>(p));
  std::vector<double> ell(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) {
    const double s = static_cast<double>(svd.full_sigma(i));
    const double e = std::max(s * s / static_cast<double>(n_cols), 1e-300);
    ell[static_cast<size_t>(i)] = e;
    log_ell[static_cast<size_t>(i)] = std::log(e);
  }

  Index best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  // Suffix sums shrink as k grows; evaluate from the full tail downward.
  double tail_sum = 0, tail_log_sum = 0;
  std::vector<double> crit(static_cast<size_t>(max_order) + 1);
  for (Index i = p - 1; i >= 0; --i) {
    tail_sum += ell[static_cast<size_t>(i)];
    tail_log_sum += log_ell[static_cast<size_t>(i)];
    const Index k = i;  // trailing set starts at index k (0-based): size p-k
    if (k > max_order) continue;
    const double q = static_cast<double>(p - k);
    const double log_g = tail_log_sum / q;
    const double log_a = std::log(tail_sum / q);
    const double data = -2.0 * static_cast<double>(n_cols) * q * (log_g - log_a);
    const double pen = static_cast<double>(k) * static_cast<double>(2 * p - k) *
                       std::log(static_cast<double>(n_cols));
    crit[static_cast<size_t>(k)] = data + pen;
  }
  for (Index k = 0; k <= max_order; ++k)
    if (crit[static_cast<size_t>(k)] < best) {
      best = crit[static_cast<size_t>(k)];
      best_k = k;
    }
  return best_k;
}

/// Largest-ratio gap order estimate: argmax_j sigma_j / sigma_{j+1} for
/// 1 <= j <= max_order. A zero successor wins immediately; ties keep the
/// smallest j.
template <typename Scalar>
Index gap_order(const TruncatedSvd<Scalar>& svd, Index max_order) {
  const Index p = svd.full_sigma.size();
  require(max_order >= 1 && max_order <= p - 1,
          "gap_order: need 1 <= max_order <= p - 1");
  require(svd.full_sigma(0) > Scalar(0), "gap_order: zero spectrum");
  // Exact zeros (an SVD backend artifact) are floored at roundoff relative to
  // sigma_1, so the dominant gap lands where the signal ends rather than at
  // the first hard zero inside the junk tail.
  const double floor_val = std::numeric_limits<double>::epsilon() *
                           static_cast<double>(svd.full_sigma(0));
  Index best_j = 1;
  double best = -1;
  for (Index j = 1; j <= max_order; ++j) {
    const double hi =
        std::max(static_cast<double>(svd.full_sigma(j - 1)), floor_val);
    const double lo = std::max(static_cast<double>(svd.full_sigma(j)), floor_val);
    const double ratio = hi / lo;
    if (ratio > best) {
      best = ratio;
      best_j = j;
    }
  }
  return best_j;
}

}  // namespace modescope
