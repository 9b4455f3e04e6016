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

// Numerical integration and 1-D optimization helpers shared by every module.
// Finite and semi-infinite ranges use a globally adaptive 21-point
// Gauss-Kronrod scheme (nodes and weights from Boost), endpoint cusps use
// Boost's tanh-sinh rule; the oscillatory tail scheme and the series
// accelerator are local.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include "kacrelax/errors.hpp"

namespace kacrelax::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

namespace gk {

// One 21-point Kronrod panel with the embedded 10-point Gauss rule and the
// QUADPACK error heuristics (scaled Kronrod-Gauss difference with a roundoff
// floor), so refinement never chases rounding noise.
struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod_panel(F& f, double a, double b) {
  using K = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = K::abscissa();
  const auto& wk = K::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fv[21];
  fv[0] = f(c);
  for (int i = 1; i <= 10; ++i) {
    fv[2 * i - 1] = f(c - h * x[i]);
    fv[2 * i] = f(c + h * x[i]);
  }
  double rk = wk[0] * fv[0], rg = 0.0, rabs = std::abs(rk);
  for (int i = 1; i <= 10; ++i) {
    const double pair = fv[2 * i - 1] + fv[2 * i];
    rk += wk[i] * pair;
    rabs += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
    if (i % 2 == 1) rg += wg[i / 2] * pair;
  }
  const double mean = 0.5 * rk;
  double rasc = wk[0] * std::abs(fv[0] - mean);
  for (int i = 1; i <= 10; ++i)
    rasc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
  rk *= h;
  rg *= h;
  rabs *= std::abs(h);
  rasc *= std::abs(h);
  double err = std::abs(rk - rg);
  if (rasc != 0.0 && err != 0.0) err = rasc * std::min(1.0, std::pow(200.0 * err / rasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (rabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * rabs, err);
  return {a, b, rk, err};
}

template <class F>
Estimate adaptive(F& f, double a, double b, double rel_tol, double abs_tol, int max_panels);

}  // namespace gk

/// Globally adaptive Gauss-Kronrod (21 point) on [a, b]; b may be +infinity
/// (mapped by x = a + t / (1 - t)). Bisects the panel with the largest error
/// until the total error is below max(abs_tol, rel_tol * |I|) or the panel
/// budget is spent.
template <class F>
Estimate integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0,
                   int max_panels = 4000) {
  if (a == b) return {};
  if (std::isinf(b)) {
    detail::require(b > 0.0 && std::isfinite(a), "integrate: only [a, +inf) is supported");
    auto g = [&](double t) {
      const double s = 1.0 - t;
      return f(a + t / s) / (s * s);
    };
    return gk::adaptive(g, 0.0, 1.0, rel_tol, abs_tol, max_panels);
  }
  return gk::adaptive(f, a, b, rel_tol, abs_tol, max_panels);
}

namespace gk {

template <class F>
Estimate adaptive(F& f, double a, double b, double rel_tol, double abs_tol, int max_panels) {
  std::vector<gk::Panel> heap{gk::kronrod_panel(f, a, b)};
  double total = heap[0].value, err = heap[0].error;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         static_cast<int>(heap.size()) < max_panels) {
    std::pop_heap(heap.begin(), heap.end());
    const gk::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // cannot split further
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const gk::Panel l = gk::kronrod_panel(f, worst.a, mid);
    const gk::Panel r = gk::kronrod_panel(f, mid, worst.b);
    heap.push_back(l);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end());
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    if (heap.size() % 64 == 0) {  // resum now and then to avoid drift
      total = 0.0;
      err = 0.0;
      for (const auto& p : heap) {
        total += p.value;
        err += p.error;
      }
    }
  }
  return {total, err};
}

}  // namespace gk

/// Tanh-sinh rule on a finite [a, b]: for integrands with algebraic
/// endpoint singularities or cusps (such as u^alpha at 0), where the
/// Gauss-Kronrod error estimate stalls.
template <class F>
Estimate integrate_singular(F&& f, double a, double b, double rel_tol = 1e-12) {
  if (a == b) return {};
  thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
  double err = 0.0;
  const double v = rule.integrate(std::forward<F>(f), a, b, rel_tol, &err);
  return {v, err};
}

template <class F>
double integral(F&& f, double a, double b, double rel_tol = 1e-12) {
  return integrate(std::forward<F>(f), a, b, rel_tol).value;
}

/// Adaptive integration over a partition: sums panels [x0,x1], [x1,x2], ...
template <class F>
Estimate integrate_panels(F&& f, const std::vector<double>& breaks,
                          double rel_tol = 1e-12) {
  Estimate total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    const Estimate e = integrate(f, breaks[i], breaks[i + 1], rel_tol);
    total.value += e.value;
    total.error += e.error;
  }
  return total;
}

/// Mean of f over one period [0, 2*pi) with the K-node trapezoid rule,
/// i.e. (1/2pi) * integral of f over the period.
template <class F>
double periodic_mean(F&& f, int nodes) {
  detail::require(nodes > 0, "periodic_mean: node count must be positive");
  const double h = 2.0 * std::numbers::pi / nodes;
  double sum = 0.0;
  for (int k = 0; k < nodes; ++k) sum += f(h * k);
  return sum / nodes;
}

/// Wynn's epsilon algorithm on a stream of partial sums. The even columns of
/// the epsilon table generalize Aitken's delta-squared process.
class WynnEpsilon {
 public:
  void push(double partial_sum) {
    std::vector<double> next(diag_.size() + 1);
    next[0] = partial_sum;
    for (std::size_t k = 1; k < next.size(); ++k) {
      const double diff = next[k - 1] - diag_[k - 1];
      const double before = (k >= 2) ? diag_[k - 2] : 0.0;
      if (diff == 0.0 || !std::isfinite(diff)) {
        next.resize(k);
        break;
      }
      next[k] = before + 1.0 / diff;
    }
    diag_ = std::move(next);
    // Keep the table bounded; the leading columns carry the useful information.
    if (diag_.size() > kMaxColumns) diag_.resize(kMaxColumns);
    const std::size_t even = (diag_.size() - 1) & ~std::size_t{1};
    history_.push_back(diag_[even]);
  }

  double estimate() const { return history_.empty() ? 0.0 : history_.back(); }

  /// Spread of the last three extrapolants.
  double error() const {
    const std::size_t n = history_.size();
    if (n < 3) return std::numeric_limits<double>::infinity();
    return std::abs(history_[n - 1] - history_[n - 2]) +
           std::abs(history_[n - 2] - history_[n - 3]);
  }

  std::size_t count() const { return history_.size(); }

 private:
  static constexpr std::size_t kMaxColumns = 41;
  std::vector<double> diag_;
  std::vector<double> history_;
};

enum class Trig { sine, cosine };

struct OscillatoryOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  std::size_t max_pieces = 20000;
  std::size_t min_pieces = 6;
};

/// Improper integral of envelope(u) * trig(omega * u) over [a, +infinity).
///
/// The range is cut at the zeros of trig(omega * u); each half period is
/// integrated adaptively and the resulting alternating partial sums are
/// accelerated with Wynn's epsilon. Terminates when the extrapolants agree or
/// when the half-period contributions fall below abs_tol (an envelope that has
/// effectively vanished).
template <class F>
Estimate oscillatory_tail(F&& envelope, double a, double omega, Trig trig,
                          const OscillatoryOptions& opt = {}) {
  detail::require(omega > 0.0, "oscillatory_tail: omega must be positive");
  detail::require(a >= 0.0, "oscillatory_tail: lower limit must be nonnegative");
  const double half = std::numbers::pi / omega;
  const double shift = (trig == Trig::sine) ? 0.0 : 0.5;
  auto integrand = [&](double u) {
    const double w = omega * u;
    return envelope(u) * (trig == Trig::sine ? std::sin(w) : std::cos(w));
  };
  // First zero strictly above a.
  double k = std::floor(a / half - shift) + 1.0;
  double lo = a;
  double hi = (k + shift) * half;
  if (hi <= lo) hi += half;

  WynnEpsilon wynn;
  double partial = 0.0;
  double err = 0.0;
  int small_run = 0;
  for (std::size_t piece = 0; piece < opt.max_pieces; ++piece) {
    const Estimate e = integrate(integrand, lo, hi, 1e-12, 0.01 * opt.abs_tol);
    partial += e.value;
    err += e.error;
    wynn.push(partial);
    small_run = (std::abs(e.value) < opt.abs_tol) ? small_run + 1 : 0;
    if (small_run >= 3) return {partial, err + opt.abs_tol};
    if (wynn.count() >= opt.min_pieces) {
      const double est = wynn.estimate();
      if (wynn.error() <= std::max(opt.abs_tol, opt.rel_tol * std::abs(est)))
        return {est, err + wynn.error()};
    }
    lo = hi;
    hi += half;
  }
  return {wynn.estimate(), err + wynn.error()};
}

/// Maximizer of a unimodal function on [lo, hi] (Brent's method).
template <class F>
std::pair<double, double> maximize(F&& f, double lo, double hi, int bits = 52,
                                   std::uintmax_t max_iter = 500) {
  auto neg = [&](double x) { return -f(x); };
  const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, bits, max_iter);
  return {r.first, -r.second};
}

/// Global maximum on [lo, hi]: scan a uniform (or geometric when log_scale)
/// grid, then polish around the best node with Brent's method.
template <class F>
std::pair<double, double> scan_maximize(F&& f, double lo, double hi, int nodes,
                                        bool log_scale = false) {
  detail::require(hi > lo && nodes >= 3, "scan_maximize: bad bracket");
  if (log_scale) detail::require(lo > 0.0, "scan_maximize: log scale needs lo > 0");
  auto node = [&](int i) {
    const double s = static_cast<double>(i) / (nodes - 1);
    return log_scale ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
  };
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nodes; ++i) {
    const double v = f(node(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = node(std::max(best - 1, 0));
  const double b = node(std::min(best + 1, nodes - 1));
  if (b > a) {
    const auto [x, v] = maximize(f, a, b);
    if (v > best_val) return {x, v};
  }
  return {node(best), best_val};
}

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace kacrelax::quad
