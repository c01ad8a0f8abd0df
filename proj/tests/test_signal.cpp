#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <modescope/modescope.hpp>

#include <cmath>
#include <complex>
#include <numbers>

using namespace modescope;
using Cd = std::complex<double>;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

TEST_CASE("split_seed is deterministic and decorrelates streams") {
  CHECK_EQ(split_seed(42, 0), split_seed(42, 0));
  CHECK_NE(split_seed(42, 0), split_seed(42, 1));
  CHECK_NE(split_seed(42, 0), split_seed(43, 0));
  // Nested splits used by the trial seeding stay distinct.
  const std::uint64_t trial = split_seed(7, 3);
  CHECK_NE(split_seed(trial, 0), split_seed(trial, 1));
}

TEST_CASE("SeededRng is reproducible and uniform01 lands in (0, 1]") {
  SeededRng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK_EQ(u, b.uniform01());
    CHECK_GT(u, 0.0);
    CHECK_LE(u, 1.0);
  }
  SeededRng c(123), d(123);
  for (int i = 0; i < 100; ++i) {
    CHECK_EQ(c.gaussian(), d.gaussian());
    CHECK_EQ(c.complex_gaussian(), d.complex_gaussian());
  }
}

TEST_CASE("make_spec single mode") {
  const auto spec = make_spec<double>(1, 3, 10, 1.0, 1.0, 1.0, 0);
  CHECK_EQ(spec.m, 1);
  CHECK_EQ(spec.D, 3);
  CHECK_EQ(spec.N, 10);
  CHECK_EQ(spec.rho(0), 1.0);
  CHECK_EQ(spec.amplitudes(0), Cd(1.0, 0.0));
  CHECK_LT(std::abs(spec.modes.col(0).norm() - 1.0), 1e-12);
}

TEST_CASE("make_spec at the default working point") {
  const auto spec = make_spec<double>(3, 45, 200, 0.98, 0.01, 1.0, 17);
  CHECK_EQ(spec.m, 3);
  CHECK_EQ(spec.D, 45);
  CHECK_EQ(spec.N, 200);
  for (Index j = 0; j < 3; ++j) {
    CHECK_EQ(spec.rho(j), 0.98);
    CHECK_EQ(spec.amplitudes(j), Cd(1.0, 0.0));
    CHECK_LT(std::abs(spec.modes.col(j).norm() - 1.0), 1e-12);
    CHECK_GE(spec.theta(j), 0.0);
    CHECK_LT(spec.theta(j), two_pi);
  }
  CHECK_LT(std::abs(measure_delta_theta<double>(spec.theta) - 0.01), 1e-12);
}

TEST_CASE("make_spec amplitude ramp reaches the requested heterogeneity") {
  const auto spec = make_spec<double>(2, 4, 20, 0.9, 0.5, 4.0, 5);
  CHECK_LT(std::abs(std::abs(spec.amplitudes(0)) - 1.0), 1e-12);
  CHECK_LT(std::abs(std::abs(spec.amplitudes(1)) - 4.0), 1e-12);
  const double ratio = spec.amplitudes.cwiseAbs().maxCoeff() /
                       spec.amplitudes.cwiseAbs().minCoeff();
  CHECK_LT(std::abs(ratio - 4.0), 1e-12);

  // Log-linear ramp: intermediate amplitudes are geometric.
  const auto spec3 = make_spec<double>(3, 4, 20, 0.9, 0.5, 9.0, 5);
  CHECK_LT(std::abs(std::abs(spec3.amplitudes(1)) - 3.0), 1e-12);
}

TEST_CASE("make_spec rejects invalid parameters") {
  CHECK_THROWS_AS(make_spec<double>(0, 3, 10, 0.9, 0.1, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_spec<double>(2, 3, 10, 1.5, 0.1, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_spec<double>(2, 3, 10, 0.0, 0.1, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_spec<double>(2, 3, 10, 0.9, 0.0, 1.0, 0), std::invalid_argument);
  // delta_theta above 2*pi/m cannot be realized with equal spacing.
  CHECK_THROWS_AS(make_spec<double>(2, 3, 10, 0.9, 3.5, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_spec<double>(2, 3, 10, 0.9, 0.1, 0.5, 0), std::invalid_argument);
}

TEST_CASE("generate_clean with unit eigenvalue repeats the mode") {
  SignalSpec<double> spec;
  spec.m = 1;
  spec.D = 3;
  spec.N = 6;
  spec.rho = RVec<double>::Constant(1, 1.0);
  spec.theta = RVec<double>::Zero(1);
  spec.modes = CMat<double>::Zero(3, 1);
  spec.modes(0, 0) = 1.0;
  spec.amplitudes = CVec<double>::Constant(1, Cd(1.0, 0.0));
  const CMat<double> traj = generate_clean(spec);
  for (Index k = 0; k < 6; ++k) {
    CHECK_EQ(traj(0, k), Cd(1.0, 0.0));
    CHECK_EQ(traj(1, k), Cd(0.0, 0.0));
    CHECK_EQ(traj(2, k), Cd(0.0, 0.0));
  }
}

TEST_CASE("generate_clean with damped eigenvalue decays geometrically") {
  SignalSpec<double> spec;
  spec.m = 1;
  spec.D = 2;
  spec.N = 8;
  spec.rho = RVec<double>::Constant(1, 0.5);
  spec.theta = RVec<double>::Zero(1);
  spec.modes = CMat<double>::Zero(2, 1);
  spec.modes(0, 0) = 1.0;
  spec.amplitudes = CVec<double>::Constant(1, Cd(1.0, 0.0));
  const CMat<double> traj = generate_clean(spec);
  double expected = 1.0;
  for (Index k = 0; k < 8; ++k) {
    CHECK_LT(std::abs(traj(0, k) - expected), 1e-15);
    CHECK_EQ(traj(1, k), Cd(0.0, 0.0));
    expected *= 0.5;
  }
}

TEST_CASE("generate_clean columns obey the one-step propagator") {
  const auto spec = make_spec<double>(2, 5, 30, 0.95, 0.7, 2.0, 11);
  const CMat<double> traj = generate_clean(spec);
  // A = Phi Lambda Phi^+ advances any state in the modal span.
  const CMat<double> lam_scaled =
      spec.modes * spec.eigenvalues().asDiagonal();
  const CMat<double> A = lam_scaled * pinv(thin_svd(CMat<double>(spec.modes)));
  double worst = 0;
  for (Index k = 0; k + 1 < spec.N; ++k)
    worst = std::max(worst, (traj.col(k + 1) - A * traj.col(k)).norm());
  CHECK_LT(worst, 1e-10);
}

TEST_CASE("add_noise passthrough, determinism, and validation") {
  const auto spec = make_spec<double>(2, 4, 25, 0.9, 0.4, 1.0, 3);
  const CMat<double> clean = generate_clean(spec);

  const CMat<double> same = add_noise(clean, NoiseSpec{});
  CHECK_EQ((same - clean).norm(), 0.0);

  const CMat<double> a = add_noise(clean, NoiseSpec{10.0, 99, false});
  const CMat<double> b = add_noise(clean, NoiseSpec{10.0, 99, false});
  CHECK_EQ((a - b).norm(), 0.0);
  CHECK_GT((a - clean).norm(), 0.0);

  const CMat<double> zero = CMat<double>::Zero(4, 25);
  CHECK_THROWS_AS(add_noise(zero, NoiseSpec{10.0, 0, false}), std::invalid_argument);
  CHECK_THROWS_AS(
      add_noise(clean, NoiseSpec{std::numeric_limits<double>::quiet_NaN(), 0, false}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      add_noise(clean, NoiseSpec{-std::numeric_limits<double>::infinity(), 0, false}),
      std::invalid_argument);
}

TEST_CASE("add_noise realizes the requested SNR on a large sample") {
  const auto spec = make_spec<double>(3, 100, 120, 0.99, 0.3, 1.0, 21);
  const CMat<double> clean = generate_clean(spec);
  for (const double target : {0.0, 10.0, 25.0}) {
    const CMat<double> noisy = add_noise(clean, NoiseSpec{target, 7, false});
    const CMat<double> noise = noisy - clean;
    const double realized =
        10.0 * std::log10(clean.squaredNorm() / noise.squaredNorm());
    CHECK_LT(std::abs(realized - target), 0.5);
  }
}

TEST_CASE("add_noise real-valued flag draws real perturbations") {
  const auto spec = make_spec<double>(2, 6, 30, 0.9, 0.4, 1.0, 3);
  const CMat<double> clean = generate_clean(spec);
  const CMat<double> noisy = add_noise(clean, NoiseSpec{10.0, 5, true});
  CHECK_EQ((noisy - clean).imag().norm(), 0.0);
}

TEST_CASE("measure_delta_theta handles wrap-around") {
  RVec<double> two(2);
  two << 0.0, std::numbers::pi;
  CHECK_LT(std::abs(measure_delta_theta<double>(two) - std::numbers::pi), 1e-15);

  RVec<double> three(3);
  three << 0.0, 0.01, 3.0;
  CHECK_LT(std::abs(measure_delta_theta<double>(three) - 0.01), 1e-15);

  RVec<double> wrap(2);
  wrap << 6.28, 0.01;
  // Circular distance crosses zero: 2*pi - 6.27.
  CHECK_LT(std::abs(measure_delta_theta<double>(wrap) - 0.013185307179586525), 1e-12);

  RVec<double> one(1);
  one << 0.5;
  CHECK_THROWS_AS(measure_delta_theta<double>(one), std::invalid_argument);
}

TEST_CASE("single-component embedding matches the lifted geometric form") {
  const auto spec = make_spec<double>(1, 5, 100, 0.95, 1.0, 1.0, 13);
  CHECK_LT(data_side_kv_error(spec, 64), 1e-12);
  CHECK_LT(data_side_kv_error(spec, 2), 1e-12);
}

TEST_CASE("clean embedding has numerical rank m") {
  const auto spec = make_spec<double>(3, 8, 60, 0.9, 0.5, 2.0, 9);
  const CMat<double> emb = delay_embed(generate_clean(spec), 10);
  const ThinSvd<double> svd = thin_svd(emb);
  CHECK_LT(svd.sigma(3), 1e-10 * svd.sigma(0));
  CHECK_GT(svd.sigma(2), 1e-10 * svd.sigma(0));
}

TEST_CASE("SignalSpec JSON round trip preserves every field") {
  const auto spec = make_spec<double>(3, 6, 40, 0.97, 0.2, 3.0, 31);
  const auto restored = signal_spec_from_json(to_json(spec));
  CHECK_EQ(restored.m, spec.m);
  CHECK_EQ(restored.D, spec.D);
  CHECK_EQ(restored.N, spec.N);
  CHECK_EQ((restored.rho - spec.rho).norm(), 0.0);
  CHECK_EQ((restored.theta - spec.theta).norm(), 0.0);
  CHECK_EQ((restored.modes - spec.modes).norm(), 0.0);
  CHECK_EQ((restored.amplitudes - spec.amplitudes).norm(), 0.0);
}
