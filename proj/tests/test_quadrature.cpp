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


#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "kacrelax/quadrature.hpp"

namespace kq = kacrelax::quad;

TEST(Quadrature, PolynomialIsExact) {
  const double v = kq::integral([](double x) { return x * x * x; }, 0.0, 2.0);
  EXPECT_NEAR(v, 4.0, 1e-14);
}

TEST(Quadrature, PeriodicMeanOfSinSquared) {
  const double v = kq::periodic_mean([](double t) { return std::sin(t) * std::sin(t); }, 64);
  EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Quadrature, WynnAcceleratesAlternatingHarmonic) {
  kq::WynnEpsilon w;
  double s = 0.0;
  for (int k = 1; k <= 20; ++k) {
    s += ((k % 2) ? 1.0 : -1.0) / k;
    w.push(s);
  }
  EXPECT_NEAR(w.estimate(), std::numbers::ln2, 1e-12);
}

TEST(Quadrature, OscillatoryDirichletIntegral) {
  const auto e = kq::oscillatory_tail([](double u) { return u > 0 ? 1.0 / u : 1.0; }, 0.0,
                                      1.0, kq::Trig::sine);
  EXPECT_NEAR(e.value, std::numbers::pi / 2.0, 1e-10);
}

TEST(Quadrature, OscillatoryCosineWithExponentialEnvelope) {
  // integral_0^inf exp(-u) cos(3u) du = 1 / (1 + 9)
  const auto e = kq::oscillatory_tail([](double u) { return std::exp(-u); }, 0.0, 3.0,
                                      kq::Trig::cosine);
  EXPECT_NEAR(e.value, 0.1, 1e-12);
}

TEST(Quadrature, OscillatoryTailFromInteriorPoint) {
  // Reference: direct integration over 1000 periods plus the leading
  // asymptotic term cos(L)/L^2 of the remainder.
  const auto e = kq::oscillatory_tail([](double u) { return 1.0 / (u * u); }, 2.0, 1.0,
                                      kq::Trig::sine);
  const double direct = kq::integral([](double u) { return std::sin(u) / (u * u); }, 2.0,
                                     2000.0 * std::numbers::pi, 1e-13) +
                        1.0 / std::pow(2000.0 * std::numbers::pi, 2);
  EXPECT_NEAR(e.value, direct, 1e-7);
}

TEST(Quadrature, ScanMaximizeFindsInteriorPeak) {
  const auto [x, v] = kq::scan_maximize([](double u) { return u * std::exp(-u); }, 0.0,
                                        10.0, 101);
  EXPECT_NEAR(x, 1.0, 1e-7);
  EXPECT_NEAR(v, std::exp(-1.0), 1e-14);
}

TEST(Quadrature, CompensatedSumKeepsSmallTerms) {
  kq::CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  EXPECT_DOUBLE_EQ(s.value(), 1.0 + 1e-13);
}
