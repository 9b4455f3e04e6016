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

// Spectral solution of the Kac equation by its Wild series. Even functions of
// xi are tabulated on a grid uniform in u = |xi|^alpha, where the Wild product
// reads g1(u cos^2 theta) g2(u sin^2 theta) for every inelasticity.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kacrelax/errors.hpp"
#include "kacrelax/initial_data.hpp"
#include "kacrelax/stable.hpp"

namespace kacrelax {

/// Nodes xi_k = (k h)^(1/alpha), k = 0..nodes-1, h = xi_max^alpha / (nodes - 1).
struct Grid {
  double alpha = 1.0;
  double xi_max = 20.0;
  std::size_t nodes = 4096;

  double u_max() const { return std::pow(xi_max, alpha); }
  double step() const { return u_max() / static_cast<double>(nodes - 1); }
  double u(std::size_t k) const { return step() * static_cast<double>(k); }
  double xi(std::size_t k) const { return std::pow(u(k), 1.0 / alpha); }

  bool operator==(const Grid&) const = default;
};

/// Grid ending where a0 |xi|^alpha = 40, so exp(-a0 |xi|^alpha) < 5e-18 beyond it.
/// Without a scale (a0 = 0) the range is [0, 20].
inline Grid default_grid(double alpha, double a0, std::size_t nodes = 4096) {
  detail::require(nodes >= 8, "default_grid: need at least 8 nodes");
  if (!(a0 > 0.0)) return {alpha, 20.0, nodes};
  return {alpha, std::pow(40.0 / a0, 1.0 / alpha), nodes};
}

namespace detail {

// Four-point Lagrange stencil around s (in units of the grid step) using nodes
// first..n-1: returns the leftmost node and fills the weights.
inline std::size_t cubic_stencil(double s, std::size_t n, std::size_t first, double w[4]) {
  const std::size_t i = std::min(static_cast<std::size_t>(s), n - 1);
  const std::size_t lo = std::clamp(i > 0 ? i - 1 : 0, first, n - 4);
  const double x0 = s - static_cast<double>(lo), x1 = x0 - 1, x2 = x0 - 2, x3 = x0 - 3;
  w[0] = -x1 * x2 * x3 / 6.0;
  w[1] = x0 * x2 * x3 / 2.0;
  w[2] = -x0 * x1 * x3 / 2.0;
  w[3] = x0 * x1 * x2 / 6.0;
  return lo;
}

}  // namespace detail

/// Real even function tabulated on a Grid, read back by cubic Lagrange
/// interpolation in u. Characteristic functions (value 1 at the origin) are
/// interpolated through r(u) = (1 - f(u)) / u on the nodes u > 0, which keeps
/// the error proportional to u near the origin and f(0) = 1 exact.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Grid g, bool characteristic = false)
      : grid_(g), values_(g.nodes, 0.0), cf_(characteristic) {
    detail::require(g.nodes >= 5 && g.xi_max > 0.0, "GridFunction: bad grid");
    if (cf_) values_[0] = 1.0;
  }

  template <class F>
  static GridFunction tabulate(Grid g, F&& f) {
    GridFunction r(g);
    for (std::size_t k = 0; k < g.nodes; ++k) r.values_[k] = f(g.xi(k));
    return r;
  }

  /// Tabulates a characteristic function; f(0) must be 1.
  template <class F>
  static GridFunction characteristic(Grid g, F&& f) {
    GridFunction r(g, true);
    if (std::abs(f(0.0) - 1.0) > 1e-12)
      throw domain_error("GridFunction: a characteristic function equals 1 at the origin");
    for (std::size_t k = 1; k < g.nodes; ++k) r.values_[k] = f(g.xi(k));
    return r;
  }

  const Grid& grid() const { return grid_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double xi_max() const { return grid_.xi_max; }
  bool is_characteristic() const { return cf_; }

  /// (1 - f(u_k)) / u_k for k >= 1 (entry 0 unused).
  std::vector<double> remainders() const {
    std::vector<double> r(values_.size(), 0.0);
    for (std::size_t k = 1; k < r.size(); ++k) r[k] = (1.0 - values_[k]) / grid_.u(k);
    return r;
  }

  /// Value at u = |xi|^alpha, u in [0, u_max].
  double at_u(double u) const {
    const double h = grid_.step();
    const std::size_t n = values_.size();
    const double s = u / h;
    if (s > static_cast<double>(n - 1) * (1.0 + 1e-12))
      throw domain_error("GridFunction: argument beyond the tabulated range");
    double w[4];
    if (!cf_) {
      const std::size_t lo = detail::cubic_stencil(s, n, 0, w);
      const double* y = &values_[lo];
      return w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3];
    }
    if (u == 0.0) return 1.0;
    const std::size_t lo = detail::cubic_stencil(s, n, 1, w);
    double r = 0.0;
    for (int i = 0; i < 4; ++i) r += w[i] * (1.0 - values_[lo + i]) / grid_.u(lo + i);
    return 1.0 - u * r;
  }

  double operator()(double xi) const { return at_u(std::pow(std::abs(xi), grid_.alpha)); }

  /// max_k |values_k|
  double sup_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
  bool cf_ = false;
};

/// Angles in [0, pi/2] with trapezoid weights for a K-node rule on [0, 2 pi),
/// folded by the symmetries of even integrands.
struct ThetaRule {
  std::vector<double> cos2, sin2, weight;

  explicit ThetaRule(int K) {
    if (K < 64 || K % 4 != 0)
      throw domain_error("ThetaRule: K must be a multiple of 4 and at least 64");
    const int m = K / 4;
    for (int k = 0; k <= m; ++k) {
      const double th = 0.5 * std::numbers::pi * k / m;
      const double c = std::cos(th), s = std::sin(th);
      cos2.push_back(k == m ? 0.0 : c * c);
      sin2.push_back(k == 0 ? 0.0 : s * s);
      weight.push_back((k == 0 || k == m ? 0.5 : 1.0) / m);
    }
  }
};

/// Interpolation stencils for the points u_k cos^2(theta_j) of a grid, shared by
/// every Wild product on that grid. sin^2(theta_j) = cos^2(theta_{m-j}), so one
/// table serves both factors.
class WildEngine {
 public:
  WildEngine(const Grid& g, int K) : grid_(g), rule_(K) {
    const std::size_t m = rule_.weight.size();
    const std::size_t n = g.nodes;
    lo_.resize(n * m);
    w_.resize(4 * n * m);
    at_.resize(n * m);
    const double h = g.step();
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t at = k * m + j;
        at_[at] = g.u(k) * rule_.cos2[j];
        lo_[at] = static_cast<std::uint32_t>(detail::cubic_stencil(at_[at] / h, n, 1, &w_[4 * at]));
      }
  }

  const Grid& grid() const { return grid_; }
  const ThetaRule& rule() const { return rule_; }
  std::size_t angles() const { return rule_.weight.size(); }

  /// f(u_k cos^2 theta_j) for all k, j (row-major in k); f a characteristic function.
  std::vector<double> expand(const GridFunction& f) const {
    if (!(f.grid() == grid_)) throw structural_error("wild product: grids differ");
    if (!f.is_characteristic())
      throw structural_error("wild product: operands must be characteristic functions");
    const auto r = f.remainders();
    std::vector<double> out(lo_.size());
    for (std::size_t at = 0; at < lo_.size(); ++at) {
      const double* y = &r[lo_[at]];
      const double* w = &w_[4 * at];
      out[at] = 1.0 - at_[at] * (w[0] * y[0] + w[1] * y[1] + w[2] * y[2] + w[3] * y[3]);
    }
    return out;
  }

  /// (g1 o g2)(u_k) from expanded tables, accumulated into out with factor mult.
  void accumulate(const std::vector<double>& e1, const std::vector<double>& e2, double mult,
                  std::vector<double>& out) const {
    const std::size_t m = angles();
    const double* wt = rule_.weight.data();
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double* a = &e1[k * m];
      const double* b = &e2[k * m];
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += wt[j] * a[j] * b[m - 1 - j];
      out[k] += mult * acc;
    }
  }

 private:
  Grid grid_;
  ThetaRule rule_;
  std::vector<std::uint32_t> lo_;
  std::vector<double> w_, at_;
};

/// g1 o g2 (xi) = (1/2pi) integral_0^2pi g1(xi c(theta)) g2(xi s(theta)) dtheta
/// for even g1, g2 on the same grid.
inline GridFunction wild_product(const GridFunction& g1, const GridFunction& g2, int K) {
  if (!(g1.grid() == g2.grid())) throw structural_error("wild_product: grids differ");
  const WildEngine eng(g1.grid(), K);
  GridFunction r(g1.grid(), true);
  r.values()[0] = 0.0;
  eng.accumulate(eng.expand(g1), eng.expand(g2), 1.0, r.values());
  return r;
}

namespace detail {

inline void check_cf_grid(const GridFunction& f, const char* who) {
  if (f.sup_abs() > 1.0 + 1e-9)
    throw domain_error(std::string(who) + ": |q_n| exceeds 1 beyond the interpolation slack");
}

}  // namespace detail

/// q_1 = the tabulated starting function, q_n = (1/(n-1)) sum_{j=1}^{n-1} q_{n-j} o q_j.
inline std::vector<GridFunction> wild_coefficients(const GridFunction& q1, std::size_t N,
                                                   const WildEngine& eng) {
  detail::require(N >= 1, "wild_coefficients: N must be >= 1");
  std::vector<GridFunction> q{q1};
  std::vector<std::vector<double>> ex{eng.expand(q1)};
  q.reserve(N);
  for (std::size_t n = 2; n <= N; ++n) {
    GridFunction sum(q1.grid(), true);
    sum.values()[0] = 0.0;
    // q_{n-j} o q_j = q_j o q_{n-j}: the folded rule is symmetric under theta -> pi/2 - theta.
    for (std::size_t j = 1; 2 * j <= n; ++j)
      eng.accumulate(ex[n - j - 1], ex[j - 1], (2 * j == n) ? 1.0 : 2.0, sum.values());
    for (double& v : sum.values()) v /= static_cast<double>(n - 1);
    detail::check_cf_grid(sum, "wild_coefficients");
    if (n < N) ex.push_back(eng.expand(sum));
    q.push_back(std::move(sum));
  }
  return q;
}

inline std::vector<GridFunction> wild_coefficients(const GridFunction& q1, std::size_t N, int K) {
  return wild_coefficients(q1, N, WildEngine(q1.grid(), K));
}

inline std::vector<GridFunction> wild_coefficients(const InitialDatum& datum, std::size_t N,
                                                   const Grid& grid, int K) {
  const auto q1 = GridFunction::characteristic(
      grid, [&](double xi) { return 1.0 - datum.re_cf_complement(xi); });
  return wild_coefficients(q1, N, K);
}

/// Smallest N >= 1 with 2 (1 - e^-t)^N <= tol.
inline std::size_t wild_order(double t, double tol) {
  detail::require(t >= 0.0 && tol > 0.0, "wild_order: need t >= 0 and tol > 0");
  if (t == 0.0) return 1;
  const double r = -std::expm1(-t);
  const double n = std::ceil(std::log(tol / 2.0) / std::log(r));
  return static_cast<std::size_t>(std::max(1.0, n));
}

struct SolveOptions {
  std::size_t nodes = 4096;
  int K = 256;
  std::size_t N_cap = 128;
  std::optional<Grid> grid;  ///< overrides the default grid
};

/// Real part e^-t sum_{n<=N} (1-e^-t)^(n-1) q_n, renormalized by the kept weight.
inline GridFunction wild_sum(const std::vector<GridFunction>& q, double t) {
  const double w0 = std::exp(-t), r = -std::expm1(-t);
  GridFunction phi(q.front().grid(), true);
  auto& v = phi.values();
  v[0] = 0.0;
  double w = w0, kept = 0.0;
  for (const auto& qn : q) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += w * qn.values()[k];
    kept += w;
    w *= r;
  }
  for (double& x : v) x /= kept;
  return phi;
}

/// phi(xi, t) with its truncation bound in the sup norm.
struct WildSolution {
  DatumPtr datum;
  double t = 0.0;
  std::size_t N = 1;       ///< series order per step
  std::size_t steps = 1;   ///< restarts of the series (semigroup steps)
  int K = 256;
  GridFunction re;         ///< Re phi(., t)
  double truncation_bound = 0.0;

  double real(double xi) const { return re(xi); }
  std::complex<double> operator()(double xi) const {
    return {re(xi), datum->im_cf(xi) * std::exp(-t)};
  }
  double xi_max() const { return re.xi_max(); }
};

/// Solves to time t with sup-norm truncation error at most tol. When one
/// series would need more than N_cap terms, the interval is split into m equal
/// steps and each step restarts the series from the previous real part; the
/// reported bound sums the step errors, each amplified by at most e^(t - t_k).
inline WildSolution solve(DatumPtr datum, double t, double tol, const SolveOptions& opt = {}) {
  detail::require(t >= 0.0 && std::isfinite(t), "solve: t must be >= 0");
  detail::require(tol > 0.0, "solve: tol must be > 0");
  WildSolution sol;
  sol.datum = datum;
  sol.t = t;
  sol.K = opt.K;
  const Grid grid = opt.grid.value_or(default_grid(datum->alpha(), datum->a0(), opt.nodes));

  std::size_t m = 1, N = wild_order(t, tol);
  double bound = 2.0 * std::pow(-std::expm1(-t), static_cast<double>(N));
  if (N > opt.N_cap) {
    // Cheapest split (m N^2) whose per-step order fits under the cap.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mm = 2; mm <= 100000; ++mm) {
      const double tau = t / mm;
      const double amp = std::expm1(t) / std::expm1(tau) ;  // sum_{k<m} e^(k tau)
      const std::size_t n = wild_order(tau, tol / amp);
      if (n > opt.N_cap) continue;
      const double cost = static_cast<double>(mm) * n * n;
      if (cost < best) {
        best = cost;
        m = mm;
        N = n;
        bound = 2.0 * std::pow(-std::expm1(-tau), static_cast<double>(n)) * amp;
      }
      if (n <= 2) break;
    }
    if (!std::isfinite(best))
      throw resource_error("solve: order " + std::to_string(wild_order(t, tol)) +
                           " exceeds the cap and no step split fits");
  }
  sol.N = N;
  sol.steps = m;
  sol.truncation_bound = bound;

  GridFunction q1 = GridFunction::characteristic(
      grid, [&](double xi) { return 1.0 - datum->re_cf_complement(xi); });
  const double tau = t / static_cast<double>(m);
  if (t > 0.0) {
    const WildEngine eng(grid, opt.K);
    for (std::size_t s = 0; s < m; ++s) q1 = wild_sum(wild_coefficients(q1, N, eng), tau);
  }
  detail::check_cf_grid(q1, "solve");
  sol.re = std::move(q1);
  return sol;
}

}  // namespace kacrelax
