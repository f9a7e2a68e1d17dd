#include <doctest.h>

#include <numbers>
#include <random>

#include "cwi/multiplier.hpp"

using namespace cwi;

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;

SpectralField random_field(const Grid3& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpectralField f(g);
  for (std::int64_t i = 0; i < g.size(); ++i) f.coeff[i] = {nd(rng), nd(rng)};
  enforce_hermitian(f);
  return f;
}
}  // namespace

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(MultiplierProfile(0.5, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierProfile(1.0, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierProfile(0.75, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(MultiplierProfile(0.75, 0.5), std::invalid_argument);
  CHECK_NOTHROW(MultiplierProfile(0.75, 16.0));
}

TEST_CASE("m equals 1 below N, the power law beyond 2N, monotone between") {
  MultiplierProfile prof(0.75, 8.0);
  CHECK(prof.m(0.0) == 1.0);
  CHECK(prof.m(7.99) == 1.0);
  CHECK(prof.m(8.0) == 1.0);  // m(N) = 1
  for (double r = 16.0; r < 4096.0; r *= 1.37)
    CHECK(prof.m(r) == doctest::Approx(std::pow(8.0 / r, 0.25)).epsilon(1e-14));
  // dense radial sweep: monotone nonincreasing, in (0, 1]
  double prev = 1.0;
  for (double r = 0.01; r < 300.0; r *= 1.01) {
    double v = prof.m(r);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  // continuity across the transition edges
  CHECK(prof.m(8.0 * (1 + 1e-9)) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(prof.m(16.0 * (1 - 1e-9)) ==
        doctest::Approx(std::pow(0.5, 0.25)).epsilon(1e-7));
}

TEST_CASE("radial multiplier: identity, single-mode |xi|, NaN rejection") {
  Grid3 g(16, kTau);
  SpectralField f = random_field(g, 1);
  SpectralField id = apply_radial_multiplier(f, [](double) { return 1.0; });
  CHECK((id.coeff - f.coeff).abs().maxCoeff() == 0.0);

  SpectralField one(g);
  one.at(1, 0, 0) = 0.5;
  one.at(-1, 0, 0) = 0.5;
  SpectralField d =
      apply_radial_multiplier(one, [](double r) { return r; }, 0.0);
  CHECK(d.at(1, 0, 0).real() == doctest::Approx(0.5 * g.xi_unit()));

  CHECK_THROWS_WITH_AS(
      apply_radial_multiplier(
          f, [](double) { return std::numeric_limits<double>::quiet_NaN(); }),
      doctest::Contains("NaN"), std::invalid_argument);
}

TEST_CASE("smoothing with N at or above the Nyquist is the identity") {
  Grid3 g(16, kTau);  // xi_max = 8, corner ~ 13.8
  SpectralField f = random_field(g, 2);
  MultiplierProfile prof(0.8, 16.0);
  SpectralField out = smoothing_I(f, prof);
  CHECK((out.coeff - f.coeff).abs().maxCoeff() == 0.0);
}

TEST_CASE("smoothing scales a single high mode by the exact power law") {
  Grid3 g(32, kTau);  // xi_max = 16
  MultiplierProfile prof(0.75, 4.0);
  SpectralField f(g);
  f.at(-16, 0, 0) = 1.0;  // |xi| = 16 = 4N, self-conjugate Nyquist mode
  SpectralField out = smoothing_I(f, prof);
  // (N/|xi|)^{1-s} = (1/4)^{1/4}
  CHECK(std::abs(out.at(-16, 0, 0)) ==
        doctest::Approx(std::pow(0.25, 0.25)).epsilon(1e-14));
}

TEST_CASE("smoothing contracts and leaves band-limited fields unchanged") {
  Grid3 g(16, kTau);
  MultiplierProfile prof(0.6, 4.0);
  SpectralField f = random_field(g, 3);
  SpectralField out = smoothing_I(f, prof);
  for (std::int64_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(out.coeff[i]) <= std::abs(f.coeff[i]) + 1e-300);

  SpectralField band(g);
  band.at(1, 1, 0) = {0.3, 0.1};
  band.at(-1, -1, 0) = {0.3, -0.1};
  band.at(2, 0, 0) = 0.2;
  band.at(-2, 0, 0) = 0.2;
  SpectralField same = smoothing_I(band, prof);  // |xi| <= 2sqrt(2) < N = 4
  CHECK((same.coeff - band.coeff).abs().maxCoeff() == 0.0);
}

TEST_CASE("fractional derivative: identity, single-mode scale, composition") {
  Grid3 g(16, kTau);
  SpectralField f = random_field(g, 4);

  SpectralField same = fractional_derivative(f, 0.0);
  CHECK((same.coeff - f.coeff).abs().maxCoeff() == 0.0);

  SpectralField one(g);
  one.at(1, 0, 0) = 0.5;
  one.at(-1, 0, 0) = 0.5;
  SpectralField d2 = fractional_derivative(one, 2.0);
  CHECK(d2.at(1, 0, 0).real() ==
        doctest::Approx(0.5 * g.xi_unit() * g.xi_unit()).epsilon(1e-14));

  // D^1 then D^-1 on a mean-zero field
  SpectralField mz = f;
  mz.coeff[0] = 0.0;
  SpectralField back =
      fractional_derivative(fractional_derivative(mz, 1.0), -1.0);
  double scale = mz.coeff.abs().maxCoeff();
  CHECK((back.coeff - mz.coeff).abs().maxCoeff() / scale < 1e-12);

  // negative order with nonzero mean is rejected without a zero-mode rule
  CHECK_THROWS_AS(fractional_derivative(f, -1.0), std::invalid_argument);
  CHECK_NOTHROW(fractional_derivative(f, -1.0, std::complex<double>(0.0)));

  // k = 0 output vanishes for positive order
  SpectralField dpos = fractional_derivative(f, 0.5);
  CHECK(std::abs(dpos.coeff[0]) == 0.0);
}

TEST_CASE("fractional derivative composes additively on mean-zero fields") {
  Grid3 g(16, kTau);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    SpectralField f = random_field(g, 100 + trial);
    f.coeff[0] = 0.0;
    double sig = ud(rng), tau = ud(rng);
    SpectralField lhs = fractional_derivative(
        fractional_derivative(f, sig, std::complex<double>(0.0)), tau,
        std::complex<double>(0.0));
    SpectralField rhs =
        fractional_derivative(f, sig + tau, std::complex<double>(0.0));
    double scale = rhs.coeff.abs().maxCoeff();
    CHECK((lhs.coeff - rhs.coeff).abs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("lp profile shape and complements") {
  CHECK(lp_phi(0.3) == 1.0);
  CHECK(lp_phi(1.0) == 1.0);
  CHECK(lp_phi(2.0) == 0.0);
  CHECK(lp_phi(5.0) == 0.0);
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 0.001) {
    double v = lp_phi(r);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }

  Grid3 g(16, kTau);
  SpectralField f = random_field(g, 6);
  SpectralField below = lp_project(f, {2.0}, LpMode::below);
  SpectralField above = lp_project(f, {2.0}, LpMode::above);
  CHECK((below.coeff + above.coeff - f.coeff).abs().maxCoeff() < 1e-15);
}

TEST_CASE("single mode below M is kept whole by the below-projection") {
  Grid3 g(16, kTau);
  SpectralField f(g);
  f.at(1, 0, 0) = 0.5;
  f.at(-1, 0, 0) = 0.5;
  SpectralField p = lp_project(f, {1.0}, LpMode::below);
  CHECK((p.coeff - f.coeff).abs().maxCoeff() == 0.0);
}

TEST_CASE("annuli above twice the corner frequency are empty") {
  Grid3 g(16, kTau);  // corner |xi| ~ 13.86
  SpectralField f = random_field(g, 7);
  SpectralField p = lp_project(f, {32.0}, LpMode::at);
  CHECK(p.coeff.abs().maxCoeff() == 0.0);
}

TEST_CASE("lattice shell list reconstructs any field to 1e-10") {
  for (double L : {kTau, 5.0, 17.3}) {
    Grid3 g(16, L);
    auto shells = lattice_shells(g);
    CHECK(shells.front().mode == LpMode::below);
    for (std::size_t i = 1; i < shells.size(); ++i) {
      CHECK(shells[i].mode == LpMode::at);
      CHECK(shells[i].shell.M == doctest::Approx(2.0 * shells[i - 1].shell.M));
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SpectralField f = random_field(g, 1000 + seed);
      Eigen::ArrayXcd sum = Eigen::ArrayXcd::Zero(g.size());
      for (const ShellEntry& e : shells)
        sum += lp_project(f, e.shell, e.mode).coeff;
      double rel =
          std::sqrt((sum - f.coeff).abs2().sum() / f.coeff.abs2().sum());
      CHECK(rel < 1e-10);
    }
  }
}

TEST_CASE("smoothing commutes with lp projection") {
  Grid3 g(16, kTau);
  MultiplierProfile prof(0.7, 2.0);
  SpectralField f = random_field(g, 8);
  SpectralField a = lp_project(smoothing_I(f, prof), {4.0}, LpMode::at);
  SpectralField b = smoothing_I(lp_project(f, {4.0}, LpMode::at), prof);
  double scale = f.coeff.abs().maxCoeff();
  CHECK((a.coeff - b.coeff).abs().maxCoeff() / scale < 1e-12);
}
