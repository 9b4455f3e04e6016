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

// Closed-form special quantities shared by the bound evaluators: the circular
// moments A_m, the sine tail integral linking c0 and a0, the power-exponential
// maxima M_r and integrals N_l, the contraction radius d and the composite
// constants B_i, Bbar_i, k*.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "kacrelax/errors.hpp"
#include "kacrelax/quadrature.hpp"

namespace kacrelax {

/// Inelasticity p > 0 and the equilibrium scale a0 with slack eta.
/// The characteristic exponent is always recomputed from p.
struct ModelParams {
  double p = 1.0;
  double a0 = 0.0;
  double eta = 0.0;

  double alpha() const { return 2.0 / (1.0 + p); }

  /// eta defaults to a0 / 2.
  static ModelParams make(double p, double a0, std::optional<double> eta = {}) {
    detail::require(p > 0.0 && std::isfinite(p), "ModelParams: p must be positive");
    detail::require(a0 >= 0.0 && std::isfinite(a0), "ModelParams: a0 must be >= 0");
    ModelParams m{p, a0, eta.value_or(0.5 * a0)};
    if (a0 > 0.0)
      detail::require(m.eta > 0.0 && m.eta < a0, "ModelParams: eta must lie in (0, a0)");
    return m;
  }

  /// p corresponding to a characteristic exponent alpha in (0, 2).
  static double p_from_alpha(double alpha) {
    detail::require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2)");
    return 2.0 / alpha - 1.0;
  }
};

/// (1/2pi) * integral over a period of |sin|^m = Gamma(m/2+1/2) / (sqrt(pi) Gamma(m/2+1)).
inline double compute_A(double m) {
  detail::require(m >= 0.0 && std::isfinite(m), "compute_A: m must be >= 0");
  return std::exp(std::lgamma(0.5 * m + 0.5) - std::lgamma(0.5 * m + 1.0)) /
         std::sqrt(std::numbers::pi);
}

/// Decay rate 1 - 2 A_m of the circular moment of order m.
inline double rate(double m) { return 1.0 - 2.0 * compute_A(m); }

/// I(alpha) = integral_0^inf sin(x) / x^alpha dx for alpha in (0, 2).
inline double sine_tail_integral(double alpha) {
  detail::require(alpha > 0.0 && alpha < 2.0,
                  "sine_tail_integral: alpha must lie in (0, 2)");
  constexpr double pi = std::numbers::pi;
  // On [0, pi] remove the x^(1-alpha) leading behaviour and integrate it exactly.
  const double head =
      quad::integral([&](double x) { return (std::sin(x) - x) * std::pow(x, -alpha); },
                     0.0, pi, 1e-13) +
      std::pow(pi, 2.0 - alpha) / (2.0 - alpha);
  const auto tail = quad::oscillatory_tail(
      [&](double u) { return std::pow(u, -alpha); }, pi, 1.0, quad::Trig::sine,
      {.abs_tol = 1e-15, .rel_tol = 1e-13});
  return head + tail.value;
}

/// a0 = 2 c0 I(alpha).
inline double a0_from_c0(double c0, double alpha) {
  detail::require(c0 >= 0.0, "a0_from_c0: c0 must be >= 0");
  if (c0 == 0.0) return 0.0;
  return 2.0 * c0 * sine_tail_integral(alpha);
}

inline double c0_from_a0(double a0, double alpha) {
  detail::require(a0 >= 0.0, "c0_from_a0: a0 must be >= 0");
  if (a0 == 0.0) return 0.0;
  return a0 / (2.0 * sine_tail_integral(alpha));
}

namespace detail {
inline double damping(const ModelParams& prm, const char* who) {
  const double b = prm.a0 - prm.eta;
  if (!(b > 0.0)) throw domain_error(std::string(who) + ": requires a0 - eta > 0");
  return b;
}
}  // namespace detail

/// M_r = max_{x >= 0} x^(r alpha) exp(-(a0 - eta) x^alpha) = (r / ((a0 - eta) e))^r.
/// M_0 = 1 (limit r -> 0).
inline double compute_Mr(double r, const ModelParams& prm) {
  const double b = detail::damping(prm, "compute_Mr");
  detail::require(r >= 0.0, "compute_Mr: r must be >= 0");
  if (r == 0.0) return 1.0;
  return std::pow(r / (b * std::numbers::e), r);
}

/// N_l = integral_0^inf exp(-(a0 - eta) xi^alpha) xi^(l-1) d xi
///     = Gamma(l/alpha) / (alpha (a0 - eta)^(l/alpha)).
inline double compute_Nl(double l, const ModelParams& prm) {
  const double b = detail::damping(prm, "compute_Nl");
  detail::require(l > 0.0, "compute_Nl: l must be > 0");
  const double alpha = prm.alpha();
  return std::exp(std::lgamma(l / alpha) - (l / alpha) * std::log(b)) / alpha;
}

/// z_r = max{ int |n_r'|, (1/2) int x^2 |n_r'| } with n_r(x) = exp(-(a0-eta) x^alpha) x^r.
inline double compute_z(double r, const ModelParams& prm) {
  const double b = detail::damping(prm, "compute_z");
  detail::require(r >= 0.0, "compute_z: r must be >= 0");
  const double alpha = prm.alpha();
  auto dn = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double xa = std::pow(x, alpha);
    return std::exp(-b * xa) * std::pow(x, r - 1.0) * (r - b * alpha * xa);
  };
  // n_r' changes sign once, at the maximizer of n_r.
  const double xstar = (r > 0.0) ? std::pow(r / (b * alpha), 1.0 / alpha) : 0.0;
  double first;
  if (r > 0.0)
    first = 2.0 * std::exp(-b * std::pow(xstar, alpha)) * std::pow(xstar, r);
  else
    first = 1.0;
  auto second_moment = [&](double x) { return 0.5 * x * x * std::abs(dn(x)); };
  const double inf = std::numeric_limits<double>::infinity();
  double second = quad::integral(second_moment, xstar, inf, 1e-11);
  if (xstar > 0.0) second += quad::integral(second_moment, 0.0, xstar, 1e-11);
  return std::max(first, second);
}

/// Supremum of the symmetric stable density with cf exp(-a0 |xi|^alpha),
/// attained at the origin: Gamma(1/alpha) / (pi alpha a0^(1/alpha)).
inline double stable_density_sup(double alpha, double a0) {
  detail::require(a0 > 0.0, "stable_density_sup: a0 must be > 0");
  return std::tgamma(1.0 / alpha) / (std::numbers::pi * alpha * std::pow(a0, 1.0 / alpha));
}

/// Classical Esseen smoothing constant used by default in the Berry-Esseen step.
inline constexpr double kEsseenConstant = 24.0 / std::numbers::pi;

/// Upper end of the admissible range for d.
inline constexpr double kMaxD = 1.0 - 1e-9;

struct ContractionRadius {
  double d = 0.0;
  bool capped = false;       ///< condition still held at the cap 1 - 1e-9
  double worst_margin = 0.0; ///< min over the verification grid of eta - lhs
};

/// Largest d in (0, 1) with (4/5) M^2 |x|^alpha + vbar(x) <= eta for every
/// |x| <= (3d / (8M))^(1/alpha). vbar must be nondecreasing with vbar(0+) = 0.
inline ContractionRadius find_d(const ModelParams& prm, double M,
                                const std::function<double(double)>& vbar,
                                double tol = 1e-10) {
  detail::require(prm.a0 > 0.0, "find_d: a0 must be > 0");
  detail::require(M >= prm.a0, "find_d: M must be >= a0");
  const double alpha = prm.alpha();
  const double eta = prm.eta;
  auto radius = [&](double d) { return std::pow(3.0 * d / (8.0 * M), 1.0 / alpha); };
  auto lhs_at = [&](double x) { return 0.8 * M * M * std::pow(x, alpha) + vbar(x); };
  // Both terms are nondecreasing in x, so the condition only needs checking at
  // the right end of the interval.
  auto ok = [&](double d) { return lhs_at(radius(d)) <= eta; };

  constexpr double kMinD = 1e-14;
  if (!ok(kMinD))
    throw domain_error(
        "find_d: no d in (0,1) satisfies (4/5) M^2 |x|^alpha + vbar(x) <= eta near "
        "x = 0; vbar(0+) is not below eta");
  ContractionRadius out;
  if (ok(kMaxD)) {
    out.d = kMaxD;
    out.capped = true;
  } else {
    double lo = kMinD, hi = kMaxD;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    out.d = lo;
  }
  // Re-verify on a dense grid of [0, radius(d)].
  const double r = radius(out.d);
  double margin = std::numeric_limits<double>::infinity();
  constexpr int kGrid = 2048;
  for (int i = 1; i <= kGrid; ++i) {
    const double x = r * static_cast<double>(i) / kGrid;
    margin = std::min(margin, eta - lhs_at(x));
  }
  if (margin < -1e-12)
    throw domain_error("find_d: condition fails on the verification grid; vbar is not "
                       "nondecreasing");
  out.worst_margin = margin;
  return out;
}

/// Inputs of the tail-based constants (see initial_data tail functionals).
struct TailInputs {
  double k1 = 0.0;
  double k2 = 0.0;
  double kbar1 = 0.0;
  double kbar2 = 0.0;
  double S_at_D = 0.0;
  double D = 1.0;
};

struct CompositeConstants {
  double M = 0.0;
  double d = 0.0;
  double d1 = 0.0;      ///< (3 / (8M))^(1/alpha)
  double dTilde = 0.0;  ///< (3d / (8M))^(1/alpha)
  double kStar = 0.0;
  double B1 = 0.0, B2 = 0.0, B3 = 0.0, B4 = 0.0, B5 = 0.0, B6 = 0.0;
  double Bbar1 = 0.0, Bbar2 = 0.0, Bbar3 = 0.0;
  double z0 = 0.0, zAlpha = 0.0;
};

/// Pure arithmetic assembly of every composite constant. `vbar_at_kink` is
/// vbar(d1 d^(1/alpha)). NaN inputs are rejected.
inline CompositeConstants composite_constants(const ModelParams& prm, double M, double d,
                                              double vbar_at_kink, const TailInputs& t) {
  for (double v : {M, d, vbar_at_kink, t.k1, t.k2, t.kbar1, t.kbar2, t.S_at_D, t.D})
    detail::require(!std::isnan(v), "composite_constants: NaN input");
  detail::require(d > 0.0 && d < 1.0, "composite_constants: d must lie in (0, 1)");
  const double a = prm.alpha();
  auto N = [&](double l) { return compute_Nl(l, prm); };
  CompositeConstants c;
  c.M = M;
  c.d = d;
  c.d1 = std::pow(3.0 / (8.0 * M), 1.0 / a);
  c.dTilde = std::pow(3.0 * d / (8.0 * M), 1.0 / a);
  const double v = vbar_at_kink;
  c.kStar = v * (1.0 + 2.0 * std::pow(c.d1, a) * std::pow(d, 1.0 - a) * v) +
            0.8 * M * M * std::pow(c.d1, a) * d +
            1.28 * std::pow(M, 4) * std::pow(c.d1, 3.0 * a) * std::pow(d, 3.0 - a);
  c.B1 = 2.0 * t.k1 * N(2) + 8.0 * t.k1 * t.k2 * N(2 + a);
  c.B2 = 8.0 * t.k1 * t.k1 * N(4);
  c.B3 = 4.0 * t.k2 * N(1 + a) + 2.0 * N(1);
  c.B4 = 4.0 * t.k2 * N(2 + a) + 2.0 * N(2);
  c.B5 = 0.8 * M * M * N(2 * a);
  c.B6 = 1.28 * std::pow(M, 4) * N(4 * a);
  const double SD = std::abs(t.S_at_D), D2 = t.D * t.D;
  c.Bbar1 = 2.0 * t.kbar1 * N(2) + 8.0 * t.kbar1 * t.kbar2 * N(2 + a) + SD * D2 * N(2) +
            2.0 * t.kbar2 * SD * D2 * N(2 + a);
  c.Bbar2 = 8.0 * t.kbar1 * t.kbar1 * N(4);
  c.z0 = compute_z(0.0, prm);
  c.zAlpha = compute_z(a, prm);
  c.Bbar3 = 2.0 * c.z0 + 4.0 * c.zAlpha * t.kbar2;
  return c;
}

}  // namespace kacrelax
