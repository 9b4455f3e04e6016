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

// Distances between a solution and the equilibrium: Kolmogorov distance
// (empirical, or by characteristic-function inversion for fixed weights) and
// the weighted chi_s metrics sup |phi - g| / |xi|^s.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "kacrelax/errors.hpp"
#include "kacrelax/initial_data.hpp"
#include "kacrelax/mckean.hpp"
#include "kacrelax/quadrature.hpp"
#include "kacrelax/stable.hpp"
#include "kacrelax/wild.hpp"

namespace kacrelax {

struct MetricResult {
  std::string kind;    ///< "kolmogorov" or "chi_s"
  double s = 0.0;      ///< order of chi_s
  double value = 0.0;
  double band = 0.0;   ///< statistical or numerical uncertainty
  double t = 0.0;
  std::string source;  ///< "monte_carlo", "wild", "cf_inversion", "exact"
  double argmax = 0.0;
};

using CdfFn = std::function<double(double)>;

/// sup_x |F_n(x) - G(x)| for the empirical law of `samples`. G's left limits
/// and jump points are needed only when G is discontinuous.
inline MetricResult kolmogorov_empirical(std::vector<double> samples, const CdfFn& G,
                                         const CdfFn& G_left = {},
                                         std::span<const double> atoms = {}) {
  detail::require(!samples.empty(), "kolmogorov_empirical: no samples");
  for (double x : samples)
    if (std::isnan(x)) throw domain_error("kolmogorov_empirical: NaN sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto left = [&](double x) { return G_left ? G_left(x) : G(x); };
  MetricResult r{"kolmogorov", 0.0, 0.0, 1.36 / std::sqrt(n), 0.0, "monte_carlo", 0.0};
  auto consider = [&](double x, double d) {
    if (d > r.value) {
      r.value = d;
      r.argmax = x;
    }
  };
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double x = samples[i];
    consider(x, std::abs(j / n - G(x)));      // F_n(x)
    consider(x, std::abs(i / n - left(x)));   // F_n(x - 0)
    i = j;
  }
  for (double a : atoms) {
    const double below = static_cast<double>(
        std::lower_bound(samples.begin(), samples.end(), a) - samples.begin());
    const double upto = static_cast<double>(
        std::upper_bound(samples.begin(), samples.end(), a) - samples.begin());
    consider(a, std::abs(upto / n - G(a)));
    consider(a, std::abs(below / n - left(a)));
  }
  r.value = std::min(r.value, 1.0);
  return r;
}

inline MetricResult kolmogorov_empirical(std::vector<double> samples, const StableLaw& law) {
  return kolmogorov_empirical(std::move(samples), [&](double x) { return law.fast_cdf(x); });
}

/// sup_x |F(x) - G(x)| for a datum against the equilibrium, on a dense grid in
/// asinh(x / scale) plus both sides of every atom.
inline MetricResult kolmogorov_datum(const InitialDatum& F, const StableLaw& law) {
  MetricResult r{"kolmogorov", 0.0, 0.0, 1e-9, 0.0, "exact", 0.0};
  auto consider = [&](double x, double d) {
    if (d > r.value) {
      r.value = d;
      r.argmax = x;
    }
  };
  const double sc = law.scale();
  for (int i = -20000; i <= 20000; ++i) {
    const double x = sc * std::sinh(i / 1000.0);
    consider(x, std::abs(F.cdf(x) - law.fast_cdf(x)));
  }
  for (double a : F.atoms()) {
    consider(a, std::abs(F.cdf(a) - law.fast_cdf(a)));
    consider(a, std::abs(F.cdf_left(a) - law.fast_cdf(a)));
  }
  if (r.argmax != 0.0 || r.value > 0.0) {
    const double step = std::abs(r.argmax) * 2e-3 + sc * 1e-3;
    auto f = [&](double x) { return std::abs(F.cdf(x) - law.fast_cdf(x)); };
    const auto [x, v] = quad::maximize(f, r.argmax - step, r.argmax + step);
    consider(x, v);
  }
  return r;
}

/// Empirical characteristic function (1/n) sum exp(i xi X_k) at the given nodes.
inline std::vector<std::complex<double>> empirical_cf(std::span<const double> samples,
                                                      std::span<const double> xis) {
  detail::require(!samples.empty(), "empirical_cf: no samples");
  std::vector<std::complex<double>> out(xis.size());
  for (std::size_t k = 0; k < xis.size(); ++k) {
    quad::CompensatedSum re, im;
    for (double x : samples) {
      re.add(std::cos(xis[k] * x));
      im.add(std::sin(xis[k] * x));
    }
    out[k] = {re.value() / samples.size(), im.value() / samples.size()};
  }
  return out;
}

/// sup over [xi_min, xi_max] of |phi(xi) - exp(-a0 |xi|^alpha)| / xi^s, scanned on
/// the given nodes and polished by Brent's method around the best one.
inline MetricResult chi_s(const std::function<std::complex<double>(double)>& phi,
                          std::span<const double> nodes, const StableLaw& law, double s,
                          double xi_min, double xi_max) {
  if (!(s > 0.0)) throw domain_error("chi_s: s must be > 0");
  detail::require(xi_min > 0.0 && xi_max > xi_min, "chi_s: need 0 < xi_min < xi_max");
  auto ratio = [&](double xi) { return std::abs(phi(xi) - law.cf(xi)) / std::pow(xi, s); };
  std::vector<double> pts{xi_min};
  for (double x : nodes)
    if (x > xi_min && x < xi_max) pts.push_back(x);
  pts.push_back(xi_max);
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = ratio(pts[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  MetricResult r{"chi_s", s, best_val, 0.0, 0.0, "wild", pts[best]};
  const double lo = pts[best > 0 ? best - 1 : 0], hi = pts[std::min(best + 1, pts.size() - 1)];
  if (hi > lo) {
    const auto [x, v] = quad::maximize(ratio, lo, hi);
    if (v > r.value) {
      r.value = v;
      r.argmax = x;
    }
  }
  return r;
}

/// chi_s of a Wild solution over its grid nodes; the band is the solver's
/// truncation bound divided by xi_min^s.
inline MetricResult chi_s(const WildSolution& sol, const StableLaw& law, double s,
                          double xi_min = 1e-3, std::optional<double> xi_max = {}) {
  const double top = std::min(xi_max.value_or(sol.xi_max()), sol.xi_max());
  std::vector<double> nodes;
  const Grid& g = sol.re.grid();
  for (std::size_t k = 1; k < g.nodes; ++k) nodes.push_back(g.xi(k));
  auto r = chi_s([&](double xi) { return sol(xi); }, nodes, law, s, xi_min, top);
  r.t = sol.t;
  r.band = sol.truncation_bound / std::pow(xi_min, s);
  return r;
}

/// chi_s of the initial datum itself (exact characteristic function).
inline MetricResult chi_s_datum(const InitialDatum& d, const StableLaw& law, double s,
                                double xi_min, double xi_max, int per_decade = 200) {
  std::vector<double> nodes;
  const int n = static_cast<int>(std::ceil(per_decade * std::log10(xi_max / xi_min)));
  for (int i = 0; i <= n; ++i) nodes.push_back(xi_min * std::pow(xi_max / xi_min, double(i) / n));
  auto r = chi_s([&](double xi) { return d.cf(xi); }, nodes, law, s, xi_min, xi_max);
  r.source = "exact";
  return r;
}

/// Empirical chi_s from samples (high variance; diagnostic only).
inline MetricResult chi_s_empirical(std::span<const double> samples, const StableLaw& law,
                                    double s, double xi_min, double xi_max, int nodes = 256) {
  std::vector<double> xs;
  for (int i = 0; i < nodes; ++i)
    xs.push_back(xi_min * std::pow(xi_max / xi_min, double(i) / (nodes - 1)));
  const auto cf = empirical_cf(samples, xs);
  MetricResult r{"chi_s", s, 0.0, 0.0, 0.0, "monte_carlo", xi_min};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = std::abs(cf[i] - law.cf(xs[i])) / std::pow(xs[i], s);
    if (v > r.value) {
      r.value = v;
      r.argmax = xs[i];
    }
  }
  r.band = 2.0 / std::sqrt(static_cast<double>(samples.size())) / std::pow(xi_min, s);
  return r;
}

/// sup over xis of |empirical CF of the batch - phi(., t)|, with the tolerated
/// band 3 * 2 / sqrt(n) + truncation bound.
struct CrossValidation {
  double discrepancy = 0.0;
  double band = 0.0;
  bool consistent() const { return discrepancy <= band; }
};

inline CrossValidation cross_validate(const WildSolution& sol, const SimulationBatch& batch,
                                      std::span<const double> xis) {
  if (std::abs(batch.config.t - sol.t) > 1e-12 || batch.datum != sol.datum->name())
    throw structural_error("cross_validate: batch and solution describe different problems");
  const auto v = batch.values();
  const auto cf = empirical_cf(v, xis);
  CrossValidation c;
  for (std::size_t k = 0; k < xis.size(); ++k)
    c.discrepancy = std::max(c.discrepancy, std::abs(cf[k] - sol(xis[k])));
  c.band = 3.0 * 2.0 / std::sqrt(static_cast<double>(v.size())) + sol.truncation_bound;
  return c;
}

/// Law of sum_j q_j X_j with X_j i.i.d. from a datum, through its characteristic
/// function prod_j phi0(q_j xi). Weights equal to within 1e-15 are grouped.
class WeightedSum {
 public:
  WeightedSum(DatumPtr datum, std::span<const double> weights) : d_(std::move(datum)) {
    std::vector<double> w(weights.begin(), weights.end());
    for (double x : w) detail::require(x >= 0.0, "WeightedSum: weights must be >= 0");
    std::sort(w.begin(), w.end());
    for (std::size_t i = 0; i < w.size();) {
      std::size_t j = i;
      while (j < w.size() && w[j] - w[i] <= 1e-15 * w[i]) ++j;
      if (w[i] > 0.0) groups_.push_back({w[i], static_cast<int>(j - i)});
      i = j;
    }
  }

  std::complex<double> cf(double xi) const {
    std::complex<double> r = 1.0;
    for (const auto& [q, m] : groups_) r *= std::pow(d_->cf(q * xi), m);
    return r;
  }

  const InitialDatum& datum() const { return *d_; }

 private:
  DatumPtr d_;
  std::vector<std::pair<double, int>> groups_;
};

/// K(F_n, G) for a weighted sum by Gil-Pelaez inversion of the difference of
/// characteristic functions:
///   F_n(x) - G(x) = (1/pi) integral_0^inf [sin(xi x) Re D - cos(xi x) Im D] / xi dxi,
/// D = phi_n - g. Fixed Gauss-Legendre panels (graded toward 0, uniform
/// beyond) are shared by all x; the sup is scanned on a grid of x and polished.
struct InversionOptions {
  double cut_tol = 1e-6;     ///< |phi_n|, g below this on [Xi, 4 Xi] at the cut-off Xi
  double x_range = 40.0;     ///< x scanned over [-x_range, x_range] * scale
  int x_nodes = 1601;
};

inline MetricResult kolmogorov_by_inversion(const WeightedSum& sum, const StableLaw& law,
                                            const InversionOptions& opt = {}) {
  const double sc = law.scale();
  const double X = opt.x_range * sc;
  // Cut-off: first Xi (geometric steps) past which |phi_n| and g stay below cut_tol
  // on [Xi, 4 Xi].
  double Xi = sc > 0 ? 1.0 / sc : 1.0, tail = 0.0;
  for (int it = 0; it < 400; ++it, Xi *= 1.25) {
    double m = law.cf(Xi);
    for (int k = 0; k <= 64; ++k) m = std::max(m, std::abs(sum.cf(Xi * std::pow(4.0, k / 64.0))));
    if (m < opt.cut_tol) {
      tail = m;
      break;
    }
    tail = m;
  }
  using GL = boost::math::quadrature::gauss<double, 16>;
  std::vector<double> nodes, weights;
  auto panel = [&](double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        if (i == 0 && xs[0] == 0.0 && sgn > 0) continue;
        nodes.push_back(mid + sgn * half * xs[i]);
        weights.push_back(half * ws[i]);
      }
    }
  };
  const double h = std::min(1.0 / sc, 4.0 / X);  // at most ~2/3 of a period per panel
  const double first = std::min(h, Xi);
  for (double a = first * 1e-12; a < first; a *= 2.0) panel(a, std::min(2.0 * a, first));
  for (double a = first; a < Xi; a += h) panel(a, std::min(a + h, Xi));

  std::vector<double> re(nodes.size()), im(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto D = sum.cf(nodes[i]) - law.cf(nodes[i]);
    re[i] = weights[i] * D.real() / nodes[i];
    im[i] = weights[i] * D.imag() / nodes[i];
  }
  auto diff = [&](double x) {
    quad::CompensatedSum acc;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double a = nodes[i] * x;
      acc.add(std::sin(a) * re[i] - std::cos(a) * im[i]);
    }
    return acc.value() / std::numbers::pi;
  };
  const bool even = sum.datum().symmetric();
  MetricResult r{"kolmogorov", 0.0, 0.0, 0.0, 0.0, "cf_inversion", 0.0};
  std::vector<double> xs;
  for (int k = 0; k < opt.x_nodes; ++k) {
    const double x = X * std::sinh(4.0 * (2.0 * k / (opt.x_nodes - 1) - 1.0)) / std::sinh(4.0);
    if (even && x < 0.0) continue;
    xs.push_back(x);
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double v = std::abs(diff(xs[k]));
    if (v > r.value) {
      r.value = v;
      best = k;
    }
  }
  r.argmax = xs[best];
  if (xs.size() > 2) {
    const double lo = xs[best > 0 ? best - 1 : 0], hi = xs[std::min(best + 1, xs.size() - 1)];
    const auto [x, v] = quad::maximize([&](double x) { return std::abs(diff(x)); }, lo, hi);
    if (v > r.value) {
      r.value = v;
      r.argmax = x;
    }
  }
  // Estimated size of the dropped tail: sup |D| on [Xi, 4 Xi] times log 4 for the
  // first stretch, doubled for the rest (|D| decays at least like 1/xi there).
  r.band = tail * 2.0 * std::log(4.0) / std::numbers::pi + 1e-9;
  r.value = std::min(r.value, 1.0);
  return r;
}

}  // namespace kacrelax
