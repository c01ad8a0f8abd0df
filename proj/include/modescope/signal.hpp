#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "modescope/linalg.hpp"
#include "modescope/rng.hpp"
#include "modescope/types.hpp"

namespace modescope {

/// Ground truth for one synthetic trajectory: sample k is
///   s_k = sum_j amplitudes(j) * modes.col(j) * (rho(j) e^{i theta(j)})^k.
template <typename Scalar>
struct SignalSpec {
  Index m = 0;  // number of components
  Index D = 0;  // ambient dimension
  Index N = 0;  // trajectory length
  RVec<Scalar> rho;     // per-component moduli, in (0, 1]
  RVec<Scalar> theta;   // per-component phases, in [0, 2*pi)
  CMat<Scalar> modes;   // D x m, unit columns
  CVec<Scalar> amplitudes;  // m, nonzero

  CVec<Scalar> eigenvalues() const {
    CVec<Scalar> lam(m);
    for (Index j = 0; j < m; ++j) lam(j) = std::polar(rho(j), theta(j));
    return lam;
  }

  void validate() const {
    require(m >= 1, "SignalSpec: m must be >= 1");
    require(D >= 1 && N >= 1, "SignalSpec: D and N must be positive");
    require(rho.size() == m && theta.size() == m && amplitudes.size() == m,
            "SignalSpec: per-component arrays must have length m");
    require(modes.rows() == D && modes.cols() == m,
            "SignalSpec: modes must be D x m");
    for (Index j = 0; j < m; ++j) {
      require(rho(j) > Scalar(0) && rho(j) <= Scalar(1),
              "SignalSpec: rho must lie in (0, 1]");
      require(std::abs(amplitudes(j)) > Scalar(0),
              "SignalSpec: amplitudes must be nonzero");
      require(std::abs(modes.col(j).norm() - Scalar(1)) <= Scalar(1e-12),
              "SignalSpec: mode columns must be unit norm");
    }
  }
};

/// Smallest pairwise circular distance among phases (radians).
template <typename Scalar>
Scalar measure_delta_theta(const RVec<Scalar>& theta) {
  require(theta.size() >= 2, "measure_delta_theta: need at least two phases");
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < theta.size(); ++i)
    for (Index j = i + 1; j < theta.size(); ++j) {
      Scalar d = std::abs(theta(i) - theta(j));
      d = std::fmod(d, two_pi);
      best = std::min(best, std::min(d, two_pi - d));
    }
  return best;
}

/// Draws a spec with a common modulus, equally spaced phases whose minimal
/// circular gap is exactly delta_theta (random anchor), a log-linear
/// amplitude ramp from 1 to kappa_b, and iid complex-gaussian unit modes.
template <typename Scalar = double>
SignalSpec<Scalar> make_spec(Index m, Index D, Index N, Scalar rho_common,
                             Scalar delta_theta, Scalar kappa_b,
                             std::uint64_t seed) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  require(m >= 1, "make_spec: m must be >= 1");
  require(D >= 1 && N >= 1, "make_spec: D and N must be positive");
  require(rho_common > Scalar(0) && rho_common <= Scalar(1),
          "make_spec: rho_common must lie in (0, 1]");
  require(delta_theta > Scalar(0) && delta_theta <= two_pi / Scalar(m),
          "make_spec: delta_theta must lie in (0, 2*pi/m]");
  require(kappa_b >= Scalar(1), "make_spec: kappa_b must be >= 1");

  SeededRng rng(seed);
  SignalSpec<Scalar> spec;
  spec.m = m;
  spec.D = D;
  spec.N = N;
  spec.rho = RVec<Scalar>::Constant(m, rho_common);

  const Scalar anchor = two_pi * static_cast<Scalar>(rng.uniform01());
  spec.theta.resize(m);
  for (Index j = 0; j < m; ++j)
    spec.theta(j) = std::fmod(anchor + delta_theta * static_cast<Scalar>(j), two_pi);

  spec.modes.resize(D, m);
  for (Index j = 0; j < m; ++j) {
    for (Index d = 0; d < D; ++d)
      spec.modes(d, j) = Complex<Scalar>(rng.complex_gaussian());
    spec.modes.col(j).normalize();
  }

  spec.amplitudes.resize(m);
  for (Index j = 0; j < m; ++j) {
    const Scalar t = (m == 1) ? Scalar(0)
                              : static_cast<Scalar>(j) / static_cast<Scalar>(m - 1);
    spec.amplitudes(j) = std::pow(kappa_b, t);
  }

  spec.validate();
  return spec;
}

/// Noise-free trajectory, D x N, columns s_0 ... s_{N-1}.
template <typename Scalar>
CMat<Scalar> generate_clean(const SignalSpec<Scalar>& spec) {
  spec.validate();
  CMat<Scalar> out = CMat<Scalar>::Zero(spec.D, spec.N);
  const CVec<Scalar> lam = spec.eigenvalues();
  CVec<Scalar> power = CVec<Scalar>::Ones(spec.m);
  for (Index k = 0; k < spec.N; ++k) {
    for (Index j = 0; j < spec.m; ++j)
      out.col(k) += spec.amplitudes(j) * power(j) * spec.modes.col(j);
    power.array() *= lam.array();
  }
  return out;
}

/// Additive noise description. snr_db = +infinity disables the noise
/// entirely (bitwise passthrough); real_valued draws real gaussian entries
/// instead of circularly symmetric complex ones.
struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  bool real_valued = false;

  bool disabled() const {
    return std::isinf(snr_db) && snr_db > 0;
  }
};

/// Adds iid gaussian noise scaled so that
///   10*log10(mean_k ||s_k||^2 / (D sigma^2)) = snr_db.
template <typename Scalar>
CMat<Scalar> add_noise(const CMat<Scalar>& clean, const NoiseSpec& noise) {
  require(clean.size() > 0, "add_noise: clean signal must be nonempty");
  if (noise.disabled()) return clean;
  require(std::isfinite(noise.snr_db), "add_noise: snr_db must be finite or +inf");

  const Scalar entry_power =
      clean.squaredNorm() / static_cast<Scalar>(clean.size());
  require(entry_power > Scalar(0),
          "add_noise: all-zero signal has no finite-SNR noise level");
  const Scalar sigma2 =
      entry_power * std::pow(Scalar(10), Scalar(-noise.snr_db / 10.0));
  const Scalar scale = std::sqrt(sigma2);

  SeededRng rng(noise.seed);
  CMat<Scalar> out = clean;
  for (Index k = 0; k < out.cols(); ++k)
    for (Index d = 0; d < out.rows(); ++d) {
      if (noise.real_valued)
        out(d, k) += scale * static_cast<Scalar>(rng.gaussian());
      else
        out(d, k) += scale * Complex<Scalar>(rng.complex_gaussian());
    }
  return out;
}

}  // namespace modescope
