// Copyright 2026 The kacrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "kacrelax/metrics.hpp"

using namespace kacrelax;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> stable_samples(const StableLaw& law, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = law.sample(rng);
  return xs;
}

}  // namespace

TEST(Kolmogorov, SinglePointAtCentre) {
  const StableLaw law(1.0, 1.0);
  EXPECT_NEAR(kolmogorov_empirical({0.0}, law).value, 0.5, 1e-12);
}

TEST(Kolmogorov, NullDistribution) {
  for (double a : {0.7, 1.0, 1.6}) {
    const StableLaw law(a, 1.0);
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto r = kolmogorov_empirical(stable_samples(law, 10000, seed), law);
      EXPECT_LE(r.value, 1.95 / std::sqrt(10000.0)) << a << " " << seed;
      EXPECT_NEAR(r.band, 1.36 / 100.0, 1e-15);
    }
  }
}

TEST(Kolmogorov, EmpiricalAgainstItselfIsZero) {
  std::vector<double> xs{3.0, -1.0, 2.0, 2.0, 0.5};
  auto step = [&](double x, bool strict) {
    return std::count_if(xs.begin(), xs.end(), [&](double v) { return strict ? v < x : v <= x; }) /
           double(xs.size());
  };
  const auto r = kolmogorov_empirical(
      xs, [&](double x) { return step(x, false); }, [&](double x) { return step(x, true); });
  EXPECT_EQ(r.value, 0.0);
}

TEST(Kolmogorov, RejectsNaN) {
  const StableLaw law(1.0, 1.0);
  EXPECT_THROW(kolmogorov_empirical({0.0, std::nan("")}, law), domain_error);
  EXPECT_THROW(kolmogorov_empirical(std::vector<double>{}, law), domain_error);
}

TEST(Kolmogorov, InvariantUnderMonotoneMaps) {
  const StableLaw law(1.2, 1.0);
  const auto xs = stable_samples(law, 500, 8);
  std::vector<double> cubed(xs);
  for (auto& x : cubed) x = x * x * x;
  const double a = kolmogorov_empirical(xs, law).value;
  const double b =
      kolmogorov_empirical(cubed, [&](double y) { return law.fast_cdf(std::cbrt(y)); }).value;
  EXPECT_NEAR(a, b, 1e-14);
}

TEST(Kolmogorov, AtomsOfTheReference) {
  // Two-point reference, samples away from the atoms: the sup sits at the jumps.
  const auto d = make_two_point();
  const std::vector<double> xs{-0.5, 0.5};
  const auto atoms = d->atoms();
  const auto r = kolmogorov_empirical(
      xs, [&](double x) { return d->cdf(x); }, [&](double x) { return d->cdf_left(x); }, atoms);
  EXPECT_NEAR(r.value, 0.5, 1e-15);
}

TEST(Kolmogorov, DatumAgainstEquilibrium) {
  // Cauchy datum against a Cauchy law of another scale: closed form sup |atan|/pi difference.
  const auto d = make_stable_datum(1.0, 2.0);
  const StableLaw law(1.0, 1.0);
  const auto r = kolmogorov_datum(*d, law);
  // sup_x (atan(x) - atan(x/2))/pi, attained at x = sqrt(2).
  const double exact = (std::atan(std::sqrt(2.0)) - std::atan(std::sqrt(2.0) / 2.0)) / kPi;
  EXPECT_NEAR(r.value, exact, 1e-8);
  EXPECT_NEAR(std::abs(r.argmax), std::sqrt(2.0), 1e-3);
}

TEST(EmpiricalCf, Basics) {
  const std::vector<double> zeros(10, 0.0), xis{0.0, 1.0, 7.0};
  for (const auto& c : empirical_cf(zeros, xis)) EXPECT_EQ(c, std::complex<double>(1.0, 0.0));

  const StableLaw cauchy(1.0, 1.0);
  auto xs = stable_samples(cauchy, 100000, 4);
  const std::vector<double> one{1.0};
  EXPECT_NEAR(empirical_cf(xs, one)[0].real(), std::exp(-1.0), 6.0 / std::sqrt(1e5));

  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) xs.push_back(-xs[i]);
  for (const auto& c : empirical_cf(xs, xis)) EXPECT_NEAR(c.imag(), 0.0, 1e-12);
}

TEST(ChiS, ExactEquilibriumGivesZero) {
  const StableLaw law(1.0, 1.0);
  const auto d = make_stable_datum(1.0, 1.0);
  const auto sol = solve(d, 0.0, 1e-6);
  EXPECT_LT(chi_s(sol, law, 1.0).value, 1e-9 / 1e-3);
  EXPECT_THROW(chi_s(sol, law, 0.0), domain_error);
}

TEST(ChiS, ScaleMismatchAgainstScalarMaximization) {
  for (double a : {0.8, 1.0, 1.5}) {
    const double a0 = 1.0, eps = 0.05;
    const StableLaw law(a, a0);
    const auto d = make_stable_datum(a, a0 + eps);
    const auto r = chi_s_datum(*d, law, a, 1e-4, 40.0);
    const auto oracle = quad::scan_maximize(
        [&](double xi) {
          return (std::exp(-a0 * std::pow(xi, a)) - std::exp(-(a0 + eps) * std::pow(xi, a))) /
                 std::pow(xi, a);
        },
        1e-4, 40.0, 4001, true);
    EXPECT_NEAR(r.value, oracle.second, 1e-10) << a;
    // Wild solution at t = 0 agrees with the exact datum.
    const auto sol = solve(d, 0.0, 1e-6);
    EXPECT_NEAR(chi_s(sol, law, a, 1e-4, 40.0).value, oracle.second, 1e-8);
  }
}

TEST(ChiS, GrowsAsLowerLimitShrinksForLargeOrder) {
  const double a = 1.0;
  const StableLaw law(a, 1.0);
  const auto d = make_stable_datum(a, 1.1);  // |phi - g| ~ 0.1 xi near 0
  double prev = 0.0;
  for (double lo : {1e-1, 1e-2, 1e-3}) {
    const double v = chi_s_datum(*d, law, 1.5, lo, 10.0).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ChiS, WildStableSolutionStaysWithinTolerance) {
  for (double p : {0.5, 1.0, 3.0}) {
    const double a = 2.0 / (1.0 + p);
    const StableLaw law(a, 1.0);
    const auto sol = solve(make_stable_datum(a, 1.0), 1.0, 1e-6);
    for (double s : {0.5 * a, a, 1.5 * a}) {
      const double xi_min = 1e-2;
      EXPECT_LE(chi_s(sol, law, s, xi_min).value, (1e-6 + 1e-8) / std::pow(xi_min, s)) << p;
    }
  }
}

TEST(CrossValidate, ParetoAtTimeTwo) {
  const auto d = make_symmetric_pareto(1.0, 1.0);
  const auto sol = solve(d, 2.0, 1e-6, {.nodes = 2048, .K = 128});
  const auto batch = run_batch({2.0, 1.0, 100000, 21, {}, kDefaultNuCap, 0}, d.get());
  std::vector<double> xis;
  for (int k = 1; k <= 32; ++k) xis.push_back(0.25 * k);
  const auto c = cross_validate(sol, batch, xis);
  EXPECT_TRUE(c.consistent()) << c.discrepancy << " " << c.band;
  EXPECT_NEAR(c.band, 6.0 / std::sqrt(1e5) + sol.truncation_bound, 1e-15);
  const auto other = run_batch({1.0, 1.0, 10, 21, {}, kDefaultNuCap, 0}, d.get());
  EXPECT_THROW(cross_validate(sol, other, xis), structural_error);
}

TEST(Inversion, StableSumsAreStable) {
  // Sums of stable variables with weights summing to one in the alpha sense stay stable.
  for (double a : {0.8, 1.0, 1.5}) {
    const StableLaw law(a, 1.0);
    const std::vector<double> w(4, std::pow(4.0, -1.0 / a));
    const WeightedSum sum(make_stable_datum(a, 1.0), w);
    EXPECT_LT(kolmogorov_by_inversion(sum, law).value, 1e-7) << a;
  }
}

TEST(Inversion, ScaleMismatchClosedForm) {
  const double a = 1.0;
  const StableLaw law(a, 1.0), wider(a, 1.4);
  const std::vector<double> w(8, 1.0 / 8.0);
  const WeightedSum sum(make_stable_datum(a, 1.4), w);
  const auto r = kolmogorov_by_inversion(sum, law);
  const double exact =
      quad::scan_maximize([&](double x) { return law.cdf(x) - wider.cdf(x); }, 0.0, 5.0, 501)
          .second;
  EXPECT_NEAR(r.value, exact, 1e-7);
}

TEST(Inversion, AgreesWithMonteCarlo) {
  const auto d = make_symmetric_pareto(1.0, 1.0);
  const StableLaw law(1.0, d->a0());
  for (int n : {2, 8}) {
    const std::vector<double> w(n, 1.0 / n);
    const auto r = kolmogorov_by_inversion(WeightedSum(d, w), law);
    Rng rng(100 + n);
    std::vector<double> xs(100000);
    for (auto& x : xs) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += d->sample(rng) / n;
      x = s;
    }
    const auto mc = kolmogorov_empirical(xs, law);
    EXPECT_NEAR(r.value, mc.value, 1.63 / std::sqrt(1e5)) << n;
    EXPECT_LT(r.band, 1e-5);
  }
}
