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


#pragma once

// The symmetric alpha-stable equilibrium with characteristic function
// exp(-a0 |xi|^alpha): density and distribution function by Fourier
// inversion (with the convergent/asymptotic power series in the far tail),
// the Chambers-Mallows-Stuck sampler and the fixed-point residual of the
// smoothing transform.

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "kacrelax/errors.hpp"
#include "kacrelax/kernel.hpp"
#include "kacrelax/quadrature.hpp"
#include "kacrelax/rng.hpp"

namespace kacrelax {

namespace detail {

// Power series in y^-alpha for the unit-scale law (a0 = 1), y > 0:
//   pdf:     (1/pi) sum (-1)^(k+1) Gamma(k alpha + 1)/k! sin(k pi alpha/2) y^(-k alpha - 1)
//   1 - cdf: (1/pi) sum (-1)^(k+1) Gamma(k alpha)/k!     sin(k pi alpha/2) y^(-k alpha)
// Convergent for alpha < 1, asymptotic for alpha >= 1. Returns nothing when the
// terms do not fall below the tolerance before they start growing, or when
// cancellation would cost more than a digit. Terms with k < first are left out
// of the sum.
inline std::optional<double> stable_series(double y, double alpha, bool density,
                                           int first = 1) {
  const double ly = std::log(y);
  const double shift = density ? 1.0 : 0.0;
  double sum = 0.0, largest = 0.0, prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const double ka = k * alpha;
    const double mag = std::exp(std::lgamma(ka + shift) - std::lgamma(k + 1.0) -
                                ka * ly - shift * ly);
    if (k > 1 && mag > prev) return std::nullopt;
    if (k == 1 && mag > 0.5 * (density ? 1.0 / y : 1.0)) return std::nullopt;
    const double term = ((k % 2) ? 1.0 : -1.0) * mag * std::sin(ka * std::numbers::pi / 2.0);
    if (k >= first) {
      sum += term;
      largest = std::max(largest, std::abs(term));
    }
    if (k > first && mag <= 1e-17 * std::abs(sum)) {
      if (largest > 10.0 * std::abs(sum)) return std::nullopt;
      return sum / std::numbers::pi;
    }
    prev = mag;
  }
  return std::nullopt;
}

// integral_0^inf envelope(u) trig(y u) du for the unit-scale law. Short
// frequencies: panels between the zeros over the effective support. Long
// frequencies: half-period pieces with extrapolation.
template <class Env>
double stable_fourier(Env&& envelope, double y, double alpha, quad::Trig trig) {
  const double u_max = std::pow(40.0, 1.0 / alpha);  // exp(-u^alpha) < 5e-18
  auto integrand = [&](double u) {
    return envelope(u) * (trig == quad::Trig::sine ? std::sin(y * u) : std::cos(y * u));
  };
  if (y * u_max <= 200.0 * std::numbers::pi) {
    std::vector<double> breaks{0.0, u_max};
    const double shift = (trig == quad::Trig::sine) ? 0.0 : 0.5;
    for (double k = 1.0 - shift;; k += 1.0) {
      const double z = (k + shift) * std::numbers::pi / y;
      if (z >= u_max) break;
      if (z > 0.0) breaks.push_back(z);
    }
    for (int j = 1; j <= 10; ++j) breaks.push_back(u_max * std::ldexp(1.0, -j));
    std::sort(breaks.begin(), breaks.end());
    // The first panel carries the cusp of u^alpha at the origin.
    const double first = breaks[1];
    breaks.erase(breaks.begin());
    return quad::integrate_singular(integrand, 0.0, first).value +
           quad::integrate_panels(integrand, breaks, 1e-12).value;
  }
  const double first = std::min(u_max, std::numbers::pi / (2.0 * y));
  return quad::integrate_singular(integrand, 0.0, first).value +
         quad::oscillatory_tail(envelope, first, y, trig).value;
}

inline double unit_stable_pdf(double y, double alpha) {
  y = std::abs(y);
  if (y == 0.0) return std::tgamma(1.0 / alpha) / (std::numbers::pi * alpha);
  if (auto s = stable_series(y, alpha, true)) return *s;
  return stable_fourier([alpha](double u) { return std::exp(-std::pow(u, alpha)); }, y,
                        alpha, quad::Trig::cosine) /
         std::numbers::pi;
}

// Upper tail 1 - F(y) of the unit-scale law, y >= 0.
inline double unit_stable_sf(double y, double alpha) {
  if (y == 0.0) return 0.5;
  if (auto s = stable_series(y, alpha, false)) return *s;
  const double half_minus =
      stable_fourier([alpha](double u) { return std::exp(-std::pow(u, alpha)) / u; }, y, alpha,
                     quad::Trig::sine) /
      std::numbers::pi;
  return 0.5 - half_minus;
}

}  // namespace detail

/// Symmetric alpha-stable law with characteristic function exp(-a0 |xi|^alpha).
/// Copies share the lazily built lookup table used by fast_cdf.
class StableLaw {
 public:
  StableLaw(double alpha, double a0) : alpha_(alpha), a0_(a0) {
    detail::require(alpha > 0.0 && alpha < 2.0, "StableLaw: alpha must lie in (0, 2)");
    detail::require(a0 >= 0.0 && std::isfinite(a0), "StableLaw: a0 must be >= 0");
  }

  double alpha() const { return alpha_; }
  double a0() const { return a0_; }
  /// a0^(1/alpha): the law is scale() times the unit-scale law.
  double scale() const { return std::pow(a0_, 1.0 / alpha_); }

  double cf(double xi) const { return std::exp(-a0_ * std::pow(std::abs(xi), alpha_)); }

  double pdf(double x) const {
    require_nondegenerate("pdf");
    const double s = scale();
    return detail::unit_stable_pdf(x / s, alpha_) / s;
  }

  double cdf(double x) const {
    require_nondegenerate("cdf");
    const double sf = detail::unit_stable_sf(std::abs(x) / scale(), alpha_);
    return x >= 0.0 ? 1.0 - sf : sf;
  }

  /// Upper tail 1 - cdf(x), accurate far out.
  double sf(double x) const { return cdf(-x); }

  /// sup of the density, attained at 0.
  double density_sup() const {
    require_nondegenerate("density_sup");
    return std::tgamma(1.0 / alpha_) / (std::numbers::pi * alpha_ * scale());
  }

  /// One Chambers-Mallows-Stuck draw.
  double sample(Rng& rng) const {
    const double v = std::numbers::pi * (rng.uniform_open() - 0.5);
    if (alpha_ == 1.0) return a0_ * std::tan(v);
    const double w = rng.exponential();
    const double a = alpha_;
    const double x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
    return scale() * x;
  }

  /// Distribution function through a cubic Hermite table in asinh(x / scale)
  /// (4097 nodes on [0, asinh(1e6)], absolute error below 1e-9);
  /// falls back to cdf outside the table. Built on first use, thread safe.
  double fast_cdf(double x) const {
    const Table& t = table();
    const double y = std::abs(x) / t.scale;
    const double z = std::asinh(y);
    double F;
    if (z >= t.z_max) {
      F = 1.0 - detail::unit_stable_sf(y, alpha_);
    } else {
      const double pos = z / t.h;
      const std::size_t i = std::min(static_cast<std::size_t>(pos), t.F.size() - 2);
      const double u = pos - static_cast<double>(i);
      const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
      const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
      F = h00 * t.F[i] + h10 * t.h * t.dF[i] + h01 * t.F[i + 1] + h11 * t.h * t.dF[i + 1];
    }
    return x >= 0.0 ? F : 1.0 - F;
  }

 private:
  struct Table {
    double scale = 1.0, z_max = 0.0, h = 0.0;
    std::vector<double> F, dF;  // F and dF/dz at z_i = i h
  };
  struct Lazy {
    std::once_flag once;
    Table table;
  };

  void require_nondegenerate(const char* who) const {
    if (!(a0_ > 0.0))
      throw domain_error(std::string("StableLaw::") + who +
                         ": a0 = 0 is the point mass at 0; handle the step explicitly");
  }

  const Table& table() const {
    require_nondegenerate("fast_cdf");
    std::call_once(lazy_->once, [this] {
      Table& t = lazy_->table;
      constexpr int kNodes = 4097;
      t.scale = scale();
      t.z_max = std::asinh(1e6);
      t.h = t.z_max / (kNodes - 1);
      t.F.resize(kNodes);
      t.dF.resize(kNodes);
      for (int i = 0; i < kNodes; ++i) {
        const double z = i * t.h, y = std::sinh(z);
        t.F[i] = 1.0 - detail::unit_stable_sf(y, alpha_);
        t.dF[i] = detail::unit_stable_pdf(y, alpha_) * std::cosh(z);
      }
    });
    return lazy_->table;
  }

  double alpha_;
  double a0_;
  std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

/// sup over xis of |(1/2pi) integral phi(xi s(theta)) phi(xi c(theta)) dtheta - phi(xi)|
/// with the K-node trapezoid rule in theta; p is the inelasticity of the kernel.
template <class Phi>
double fixed_point_residual(Phi&& phi, double p, std::span<const double> xis, int K) {
  detail::require(K >= 64, "fixed_point_residual: need at least 64 theta nodes");
  double worst = 0.0;
  for (double xi : xis) {
    const double mean = quad::periodic_mean(
        [&](double th) { return phi(xi * kernel_s(th, p)) * phi(xi * kernel_c(th, p)); }, K);
    worst = std::max(worst, std::abs(mean - phi(xi)));
  }
  return worst;
}

inline double fixed_point_residual(const StableLaw& law, std::span<const double> xis, int K) {
  const double p = 2.0 / law.alpha() - 1.0;
  return fixed_point_residual([&](double xi) { return law.cf(xi); }, p, xis, K);
}

}  // namespace kacrelax
