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

// Initial laws F0 together with the analytic companions consumed by the
// bounds: characteristic function, tail constant c0 and scale a0, the
// remainder v0 of 1 - phi0 = (a0 + v0(xi)) |xi|^alpha, the tail remainder S
// and h(x) = x^alpha S(x). EvenPart adds the symmetrized quantities, the
// monotone envelope of |v0*| and the tail functionals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kacrelax/constants.hpp"
#include "kacrelax/errors.hpp"
#include "kacrelax/quadrature.hpp"
#include "kacrelax/rng.hpp"
#include "kacrelax/stable.hpp"

namespace kacrelax {

class InitialDatum {
 public:
  virtual ~InitialDatum() = default;

  virtual std::string name() const = 0;
  double alpha() const { return alpha_; }
  double c0() const { return c0_; }
  double a0() const { return a0_; }
  virtual bool symmetric() const { return true; }

  /// Right-continuous distribution function.
  virtual double cdf(double x) const = 0;
  /// Left limit F0(x - 0).
  virtual double cdf_left(double x) const { return cdf(x); }
  /// 1 - F0(x), accurate in the upper tail.
  virtual double sf(double x) const { return 1.0 - cdf(x); }
  virtual double sample(Rng& rng) const = 0;

  /// 1 - Re phi0(xi), evaluated without cancellation near xi = 0.
  virtual double re_cf_complement(double xi) const = 0;
  virtual double im_cf(double xi) const { (void)xi; return 0.0; }
  std::complex<double> cf(double xi) const { return {1.0 - re_cf_complement(xi), im_cf(xi)}; }

  /// v0*(xi) = (1 - Re phi0(xi)) / |xi|^alpha - a0, with v0*(0) = 0.
  virtual double v0_star(double xi) const {
    require_scale("v0_star");
    if (xi == 0.0) return 0.0;
    return re_cf_complement(xi) / std::pow(std::abs(xi), alpha_) - a0_;
  }

  /// v0(xi) = (1 - phi0(xi)) / |xi|^alpha - a0 (complex for asymmetric data).
  std::complex<double> v0(double xi) const {
    if (xi == 0.0) return {0.0, 0.0};
    return {v0_star(xi), -im_cf(xi) / std::pow(std::abs(xi), alpha_)};
  }

  /// Tail remainder of the even part, S*(x) = 1 - F0*(x) - c0 x^(-alpha), x > 0.
  virtual double S_star(double x) const {
    detail::require(x > 0.0, "S_star: x must be > 0");
    return 0.5 * (sf(x) + cdf_left(-x)) - c0_ * std::pow(x, -alpha_);
  }

  double h_star(double x) const { return std::pow(x, alpha_) * S_star(x); }

  /// Split point D > 0 beyond which S* is monotone.
  virtual double default_D() const = 0;

  /// True when S* vanishes identically on [D, +inf).
  virtual bool S_vanishes_beyond(double D) const { (void)D; return false; }

  /// Closed-form sup_x x^delta |h*(x)| when the family has one.
  virtual std::optional<double> rho_prime_closed(double delta) const {
    (void)delta;
    return std::nullopt;
  }

  /// Jump locations of F0 (empty for continuous laws).
  virtual std::vector<double> atoms() const { return {}; }

 protected:
  InitialDatum(double alpha, double c0, double a0) : alpha_(alpha), c0_(c0), a0_(a0) {
    detail::require(alpha > 0.0 && alpha < 2.0, "initial datum: alpha must lie in (0, 2)");
  }

  void require_scale(const char* who) const {
    if (!(a0_ > 0.0))
      throw domain_error(std::string(who) + ": a0 = 0, the remainder v0 is undefined");
  }

  double alpha_, c0_, a0_;
};

using DatumPtr = std::shared_ptr<const InitialDatum>;

namespace detail {

// 1 - phi0 for the symmetric Pareto law in terms of y = xm |xi|:
//   y <= 2: y^alpha (I - alpha P(y)), P(y) = integral_0^y (1 - cos u) u^(-alpha-1) du by its series
//   y >  2: 1 - alpha y^alpha C(y),   C(y) = integral_y^inf cos(u) u^(-alpha-1) du
inline double pareto_P_series(double y, double a) {
  double sum = 0.0, term_pow = std::pow(y, -a), fact = 1.0;
  const double y2 = y * y;
  for (int k = 1; k <= 60; ++k) {
    term_pow *= y2;
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    const double term = term_pow / (fact * (2.0 * k - a));
    sum += (k % 2) ? term : -term;
    if (term < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline double pareto_C(double y, double a) {
  if (y >= 40.0) {
    // integral_y^inf e^(iu) u^(-s) du = i e^(iy) sum_k (-i)^k (s)_k y^(-s-k), s = a + 1;
    // asymptotic, summed up to its smallest term.
    const double s = a + 1.0;
    std::complex<double> sum = 0.0, ik = 1.0;
    double mag = std::pow(y, -s), prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200 && mag < prev; ++k) {
      sum += ik * mag;
      if (mag < 1e-18 * std::abs(sum)) break;
      prev = mag;
      mag *= (s + k) / y;
      ik *= std::complex<double>(0.0, -1.0);
    }
    return (std::complex<double>(0.0, 1.0) * std::polar(1.0, y) * sum).real();
  }
  return quad::oscillatory_tail([a](double u) { return std::pow(u, -a - 1.0); }, y, 1.0,
                                quad::Trig::cosine, {.abs_tol = 1e-17, .rel_tol = 1e-13})
      .value;
}

}  // namespace detail

/// Symmetric Pareto law: 1 - F0(x) = (1/2)(xm/x)^alpha for x >= xm, no mass on (-xm, xm).
class SymmetricPareto final : public InitialDatum {
 public:
  SymmetricPareto(double alpha, double xm)
      : InitialDatum(alpha, 0.5 * std::pow(xm, alpha), 0.0), xm_(xm) {
    detail::require(xm > 0.0 && std::isfinite(xm), "symmetric Pareto: xm must be > 0");
    I_ = sine_tail_integral(alpha);
    a0_ = 2.0 * c0_ * I_;
  }

  std::string name() const override { return "symmetric_pareto"; }
  double xm() const { return xm_; }

  double cdf(double x) const override {
    if (x >= xm_) return 1.0 - 0.5 * std::pow(xm_ / x, alpha_);
    if (x > -xm_) return 0.5;
    return 0.5 * std::pow(xm_ / -x, alpha_);
  }
  double sf(double x) const override {
    if (x >= xm_) return 0.5 * std::pow(xm_ / x, alpha_);
    return 1.0 - cdf(x);
  }

  double sample(Rng& rng) const override {
    const double u = rng.uniform_open();
    if (u >= 0.5) return xm_ * std::pow(2.0 * (1.0 - u), -1.0 / alpha_);
    return -xm_ * std::pow(2.0 * u, -1.0 / alpha_);
  }

  double re_cf_complement(double xi) const override {
    const double y = xm_ * std::abs(xi);
    if (y == 0.0) return 0.0;
    if (y <= 2.0) return std::pow(y, alpha_) * (I_ - alpha_ * detail::pareto_P_series(y, alpha_));
    return 1.0 - alpha_ * std::pow(y, alpha_) * detail::pareto_C(y, alpha_);
  }

  /// v0(xi) = -alpha xm^alpha P(xm |xi|): nonpositive, |v0| increasing to a0.
  double v0_star(double xi) const override {
    const double y = xm_ * std::abs(xi);
    if (y == 0.0) return 0.0;
    const double xa = std::pow(xm_, alpha_);
    if (y <= 2.0) return -alpha_ * xa * detail::pareto_P_series(y, alpha_);
    // P(y) = I/alpha - y^(-alpha)/alpha + C(y)
    return -xa * (I_ - std::pow(y, -alpha_) + alpha_ * detail::pareto_C(y, alpha_));
  }

  double S_star(double x) const override {
    detail::require(x > 0.0, "S_star: x must be > 0");
    return x >= xm_ ? 0.0 : 0.5 - c0_ * std::pow(x, -alpha_);
  }

  double default_D() const override { return xm_; }
  bool S_vanishes_beyond(double D) const override { return D >= xm_; }

  /// sup_{x < xm} x^delta (xm^alpha - x^alpha) / 2, attained at x^alpha = xm^alpha delta/(alpha+delta).
  std::optional<double> rho_prime_closed(double delta) const override {
    detail::require(delta > 0.0, "rho_prime: delta must be > 0");
    const double a = alpha_, r = delta / (a + delta);
    return 0.5 * std::pow(xm_, a + delta) * std::pow(r, delta / a) * (a / (a + delta));
  }

 private:
  double xm_;
  double I_ = 0.0;
};

/// The equilibrium itself used as initial datum.
class StableDatum final : public InitialDatum {
 public:
  StableDatum(double alpha, double a0)
      : InitialDatum(alpha, c0_from_a0(a0, alpha), a0), law_(alpha, a0) {
    detail::require(a0 > 0.0, "stable datum: a0 must be > 0");
    D_ = find_monotone_start();
  }

  std::string name() const override { return "stable"; }
  const StableLaw& law() const { return law_; }

  double cdf(double x) const override { return law_.fast_cdf(x); }
  double sf(double x) const override { return law_.sf(x); }
  double sample(Rng& rng) const override { return law_.sample(rng); }

  double re_cf_complement(double xi) const override {
    return -std::expm1(-a0_ * std::pow(std::abs(xi), alpha_));
  }

  /// a0 ((1 - e^(-u)) / u - 1) with u = a0 |xi|^alpha; series for small u.
  double v0_star(double xi) const override {
    const double u = a0_ * std::pow(std::abs(xi), alpha_);
    if (u == 0.0) return 0.0;
    if (u < 0.1) {
      double term = 1.0, sum = 0.0;
      for (int k = 1; k <= 20; ++k) {
        term *= -u / (k + 1);
        sum += term;
      }
      return a0_ * sum;
    }
    return a0_ * (-std::expm1(-u) / u - 1.0);
  }

  /// Beyond the reach of the tail series S* is summed from its second term, which
  /// avoids the cancellation in sf(x) - c0 x^(-alpha).
  double S_star(double x) const override {
    detail::require(x > 0.0, "S_star: x must be > 0");
    if (auto s = detail::stable_series(x / law_.scale(), alpha_, false, 2)) return *s;
    return law_.sf(x) - c0_ * std::pow(x, -alpha_);
  }

  double default_D() const override { return D_; }

 private:
  // Smallest D = scale * 2^k such that S* is monotone on a fine grid of [D, 1e8 D].
  double find_monotone_start() const {
    double D = law_.scale();
    for (int k = 0; k < 40; ++k, D *= 2.0) {
      bool mono = true;
      int sign = 0;
      double prev = S_star(D);
      for (int i = 1; i <= 8 * 64 && mono; ++i) {
        const double s = S_star(D * std::pow(10.0, i / 64.0));
        const double diff = s - prev;
        if (std::abs(diff) > 1e-12 * std::abs(prev)) {
          const int sg = diff > 0 ? 1 : -1;
          if (sign != 0 && sg != sign) mono = false;
          sign = sg;
        }
        prev = s;
      }
      if (mono) return D;
    }
    throw domain_error("stable datum: no monotone range of S* found");
  }

  StableLaw law_;
  double D_ = 1.0;
};

/// (delta_{-1} + delta_{+1}) / 2: c0 = a0 = 0, outside the positive-a0 framework.
/// alpha only records the model the datum is paired with.
class TwoPoint final : public InitialDatum {
 public:
  explicit TwoPoint(double alpha = 1.0) : InitialDatum(alpha, 0.0, 0.0) {}

  std::string name() const override { return "two_point"; }

  double cdf(double x) const override { return x < -1.0 ? 0.0 : (x < 1.0 ? 0.5 : 1.0); }
  double cdf_left(double x) const override { return x <= -1.0 ? 0.0 : (x <= 1.0 ? 0.5 : 1.0); }
  double sample(Rng& rng) const override { return rng.uniform() < 0.5 ? -1.0 : 1.0; }
  double re_cf_complement(double xi) const override {
    const double s = std::sin(0.5 * xi);
    return 2.0 * s * s;
  }
  double default_D() const override { return 1.0; }
  std::vector<double> atoms() const override { return {-1.0, 1.0}; }
};

/// Mixture (1 - w) base + w delta_{+1}, w in [0, 1/2).
class AsymmetricShift final : public InitialDatum {
 public:
  AsymmetricShift(DatumPtr base, double w)
      : InitialDatum(base->alpha(), (1.0 - w) * base->c0(), (1.0 - w) * base->a0()),
        base_(std::move(base)),
        w_(w) {
    detail::require(w >= 0.0 && w < 0.5, "asymmetric shift: weight must lie in [0, 1/2)");
  }

  std::string name() const override { return "asymmetric_shift"; }
  bool symmetric() const override { return w_ == 0.0 && base_->symmetric(); }
  double weight() const { return w_; }
  const DatumPtr& base() const { return base_; }

  double cdf(double x) const override {
    return (1.0 - w_) * base_->cdf(x) + (x >= 1.0 ? w_ : 0.0);
  }
  double cdf_left(double x) const override {
    return (1.0 - w_) * base_->cdf_left(x) + (x > 1.0 ? w_ : 0.0);
  }
  double sf(double x) const override {
    return (1.0 - w_) * base_->sf(x) + (x < 1.0 ? w_ : 0.0);
  }
  double sample(Rng& rng) const override {
    return rng.uniform() < w_ ? 1.0 : base_->sample(rng);
  }

  double re_cf_complement(double xi) const override {
    const double s = std::sin(0.5 * xi);
    return (1.0 - w_) * base_->re_cf_complement(xi) + 2.0 * w_ * s * s;
  }
  double im_cf(double xi) const override {
    return (1.0 - w_) * base_->im_cf(xi) + w_ * std::sin(xi);
  }
  double v0_star(double xi) const override {
    require_scale("v0_star");
    if (xi == 0.0) return 0.0;
    const double s = std::sin(0.5 * xi);
    return (1.0 - w_) * base_->v0_star(xi) + 2.0 * w_ * s * s / std::pow(std::abs(xi), alpha_);
  }
  double S_star(double x) const override {
    detail::require(x > 0.0, "S_star: x must be > 0");
    return (1.0 - w_) * base_->S_star(x) + (x < 1.0 ? 0.5 * w_ : 0.0);
  }

  double default_D() const override { return std::max(base_->default_D(), 1.0); }
  bool S_vanishes_beyond(double D) const override {
    return D >= 1.0 && base_->S_vanishes_beyond(D);
  }
  std::vector<double> atoms() const override {
    auto a = base_->atoms();
    a.push_back(1.0);
    return a;
  }

 private:
  DatumPtr base_;
  double w_;
};

inline DatumPtr make_symmetric_pareto(double alpha, double xm) {
  return std::make_shared<SymmetricPareto>(alpha, xm);
}
inline DatumPtr make_stable_datum(double alpha, double a0) {
  return std::make_shared<StableDatum>(alpha, a0);
}
inline DatumPtr make_two_point(double alpha = 1.0) { return std::make_shared<TwoPoint>(alpha); }
inline DatumPtr make_asymmetric_shift(DatumPtr base, double w) {
  return std::make_shared<AsymmetricShift>(std::move(base), w);
}

/// v0*(xi) of a datum; xi = 0 maps to 0 by continuity, a0 = 0 is refused.
inline double extract_v0(const InitialDatum& d, double xi) { return d.v0_star(xi); }

/// Integrals of the tail remainder entering the Kolmogorov-metric bounds.
struct TailFunctionals {
  double D = 0.0;
  double S_at_D = 0.0;
  double k1 = 0.0;        ///< integral_0^D x |S*(x)| dx
  double k2 = 0.0;        ///< sup_x |b1*(x)| / x^alpha
  double kbar1 = 0.0;     ///< k1 + D^2 |S*(D)| / 2
  double kbar2 = 0.0;     ///< sup_x |b2*(x)| / x^alpha
  double k3 = 0.0, k4 = 0.0, k5 = 0.0;  ///< sup over q in (0,1) of H1*, H2*, H3*
  double abs_S_tail = 0.0;  ///< integral_D^inf |S*(x)| dx (+inf if divergent)
  bool S_monotone = false;  ///< S* monotone on [D, +inf) (grid check)

  TailInputs inputs() const { return {k1, k2, kbar1, kbar2, S_at_D, D}; }
};

/// Even part F0* of a datum with the monotone envelope of |v0*| and the tail
/// functionals. Immutable after construction.
class EvenPart {
 public:
  struct Options {
    double decades_below = 6.0;  ///< envelope grid starts at 10^-6 a0^(-1/alpha)
    double decades_above = 6.0;
    int per_decade = 512;
    int max_refinements = 4;
    double tol = 1e-9;
  };

  explicit EvenPart(DatumPtr datum) : EvenPart(std::move(datum), Options{}) {}

  EvenPart(DatumPtr datum, Options opt) : d_(std::move(datum)), opt_(opt) {
    if (d_->a0() > 0.0) build_envelope();
    kolmo_asym_ = compute_kolmogorov_asymmetry();
  }

  const InitialDatum& datum() const { return *d_; }
  const DatumPtr& datum_ptr() const { return d_; }
  double alpha() const { return d_->alpha(); }
  double c0_star() const { return d_->c0(); }
  double a0() const { return d_->a0(); }

  double cdf_star(double x) const {
    return 0.5 * (d_->cdf(x) + 1.0 - d_->cdf_left(-x));
  }
  double cf_star(double xi) const { return 1.0 - d_->re_cf_complement(xi); }
  double v0_star(double xi) const { return d_->v0_star(xi); }
  double S_star(double x) const { return d_->S_star(x); }
  double h_star(double x) const { return d_->h_star(x); }

  /// vbar(xi) = sup_{0 <= x <= xi} |v0*(x)| from the refined grid (rounded up
  /// to the next grid node), with a rigorous bound beyond the grid. Oscillations
  /// finer than the grid can exceed it by about 1e-8 relative.
  double v0_star_bar(double xi) const {
    require_envelope("v0_star_bar");
    xi = std::abs(xi);
    if (xi == 0.0) return 0.0;
    if (xi < grid_.front()) return std::abs(d_->v0_star(xi));
    if (xi > grid_.back()) return beyond_;
    const auto it = std::lower_bound(grid_.begin(), grid_.end(), xi);
    return env_[static_cast<std::size_t>(it - grid_.begin())];
  }

  /// ||v0*|| = sup_{xi >= 0} |v0*(xi)|.
  double v0_norm() const {
    require_envelope("v0_norm");
    return beyond_;
  }

  /// Envelope nodes and the values of vbar on (previous node, node].
  const std::vector<double>& envelope_nodes() const {
    require_envelope("envelope_nodes");
    return grid_;
  }
  const std::vector<double>& envelope_values() const {
    require_envelope("envelope_values");
    return env_;
  }

  /// M = a0 + ||v0*||.
  double M() const { return a0() + v0_norm(); }

  /// sup_xi |Im v0(xi)| / |xi|^s (s = 0 gives the plain sup); +inf when the
  /// ratio grows without bound toward xi = 0.
  double im_v0_sup(double s = 0.0) const {
    if (d_->symmetric()) return 0.0;
    require_envelope("im_v0_sup");
    auto f = [&](double xi) {
      return std::abs(d_->im_cf(xi)) / std::pow(xi, d_->alpha() + s);
    };
    double best = 0.0;
    for (double xi : coarse_grid()) best = std::max(best, f(xi));
    const double lo = grid_.front();
    if (f(lo) > 0.0 && f(lo) > f(lo * 1.5) * (1.0 + 1e-9))
      return std::numeric_limits<double>::infinity();
    return best;
  }

  /// (1/2) sup_x |F0(x) + F0(-x - 0) - 1|.
  double kolmogorov_asymmetry() const { return kolmo_asym_; }

  /// sup_{0 < xi <= X} |v0*(xi)| / xi^delta on the envelope grid (plus X).
  double rho_v0(double delta, double X) const {
    require_envelope("rho_v0");
    detail::require(delta > 0.0 && X > 0.0, "rho_v0: delta and X must be > 0");
    double best = std::abs(d_->v0_star(X)) / std::pow(X, delta);
    for (double xi : grid_) {
      if (xi > X) break;
      best = std::max(best, std::abs(d_->v0_star(xi)) / std::pow(xi, delta));
    }
    return best;
  }

  /// sup_{x > 0} x^delta |h*(x)|; closed form when available, otherwise a
  /// log-grid scan over [1e-8 D, 1e8 D]; +inf when growing at either end.
  double rho_prime(double delta) const {
    if (auto c = d_->rho_prime_closed(delta)) return *c;
    const double D = d_->default_D();
    auto f = [&](double x) { return std::pow(x, delta) * std::abs(d_->h_star(x)); };
    const auto [x, v] = quad::scan_maximize(f, 1e-8 * D, 1e8 * D, 16 * 64 + 1, true);
    if (x <= 1.01e-8 * D || x >= 0.99e8 * D) return std::numeric_limits<double>::infinity();
    return v;
  }

  // H1*(q) = integral_0^1 y^(1-alpha) |h*(y/q)| dy = q^(2-alpha) integral_0^(1/q) x |S*(x)| dx
  // H2*(q) = integral_1^inf y^(-alpha) |h*(y/q)| dy = q^(1-alpha) integral_(1/q)^inf |S*(x)| dx
  // H3*(q) = integral_1^inf y^(-1-alpha) |h*(y/q)| dy = q^(-alpha) integral_(1/q)^inf |S*(x)|/x dx
  double H1(double q) const { return std::pow(q, 2.0 - alpha()) * first_moment_to(1.0 / q); }
  double H2(double q) const { return std::pow(q, 1.0 - alpha()) * tail_from(1.0 / q, 0); }
  double H3(double q) const { return std::pow(q, -alpha()) * tail_from(1.0 / q, 1); }

  /// Hbar_i(q) = sup_{y <= q} H_i(y), i in {1, 2, 3}, on the grid q_k = 2^(-k/16)
  /// (rounded up to the next node, so never below the exact sup on the grid).
  double Hbar(int i, double q) const {
    const auto& tab = hbar_table(i);
    if (q <= hq_.back()) return std::max(tab.back(), H(i, q));
    // hq_ is decreasing; find the first node >= q.
    std::size_t k = 0;
    while (k + 1 < hq_.size() && hq_[k + 1] >= q) ++k;
    return tab[k];
  }

  double H(int i, double q) const {
    switch (i) {
      case 1: return H1(q);
      case 2: return H2(q);
      case 3: return H3(q);
      default: throw domain_error("H: index must be 1, 2 or 3");
    }
  }

  /// k1, k2, kbar1, kbar2, k3..k5 for a split point D (default: the datum's).
  TailFunctionals tail_functionals(std::optional<double> D_opt = {}) const {
    const double D = D_opt.value_or(d_->default_D());
    detail::require(D > 0.0, "tail_functionals: D must be > 0");
    const double a = alpha();
    TailFunctionals t;
    t.D = D;
    t.S_at_D = d_->S_star(D);
    t.k1 = first_moment_to(D);
    t.kbar1 = t.k1 + 0.5 * D * D * std::abs(t.S_at_D);
    t.S_monotone = S_monotone_from(D);
    t.abs_S_tail = tail_from(D, 0);
    if (!d_->S_vanishes_beyond(D)) {
      auto b1 = [&](double x) {
        return 2.0 * x *
               quad::oscillatory_tail([&](double u) { return d_->S_star(u); }, D, x,
                                      quad::Trig::sine, {.abs_tol = 1e-14, .rel_tol = 1e-10})
                   .value;
      };
      auto r1 = [&](double x) { return std::abs(b1(x)) / std::pow(x, a); };
      auto r2 = [&](double x) {
        return std::abs(2.0 * (1.0 - std::cos(x * D)) * t.S_at_D + b1(x)) / std::pow(x, a);
      };
      t.k2 = quad::scan_maximize(r1, 1e-4 / D, 1e4 / D, 8 * 32 + 1, true).second;
      t.kbar2 = quad::scan_maximize(r2, 1e-4 / D, 1e4 / D, 8 * 32 + 1, true).second;
    }
    for (int i = 1; i <= 3; ++i) {
      const double k = hbar_table(i).front();
      (i == 1 ? t.k3 : i == 2 ? t.k4 : t.k5) = k;
    }
    return t;
  }

 private:
  void require_envelope(const char* who) const {
    if (grid_.empty())
      throw domain_error(std::string(who) + ": a0 = 0, the remainder v0* is undefined");
  }

  std::vector<double> log_grid(int per_decade) const {
    const double s = std::pow(a0(), -1.0 / alpha());
    const int n = static_cast<int>((opt_.decades_below + opt_.decades_above) * per_decade);
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i)
      g[i] = s * std::pow(10.0, -opt_.decades_below + static_cast<double>(i) / per_decade);
    return g;
  }

  std::vector<double> coarse_grid() const { return log_grid(64); }

  // Running max of |v0*| on a log grid, doubled until the envelope sampled at
  // the coarse nodes stops moving.
  void build_envelope() {
    int per = opt_.per_decade;
    std::vector<double> grid = log_grid(per), env;
    auto running = [&](const std::vector<double>& g) {
      std::vector<double> e(g.size());
      double m = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        m = std::max(m, std::abs(d_->v0_star(g[i])));
        e[i] = m;
      }
      return e;
    };
    env = running(grid);
    for (int r = 0; r < opt_.max_refinements; ++r) {
      per *= 2;
      std::vector<double> g2 = log_grid(per);
      std::vector<double> e2 = running(g2);
      double change = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i)
        change = std::max(change, std::abs(e2[2 * i] - env[i]));
      grid = std::move(g2);
      env = std::move(e2);
      if (change < opt_.tol) break;
    }
    grid_ = std::move(grid);
    env_ = std::move(env);
    // For xi >= xi_hi: -a0 <= v0* <= 2 xi_hi^(-alpha) - a0.
    const double hi = grid_.back();
    beyond_ = std::max({env_.back(), a0(), 2.0 * std::pow(hi, -alpha()) - a0()});
  }

  double compute_kolmogorov_asymmetry() const {
    if (d_->symmetric()) return 0.0;
    std::vector<double> xs;
    for (int i = -2000; i <= 2000; ++i) xs.push_back(std::sinh(i / 100.0));
    for (double a : d_->atoms())
      for (double e : {-1e-12, 0.0, 1e-12}) {
        xs.push_back(a + e * std::max(1.0, std::abs(a)));
        xs.push_back(-a + e * std::max(1.0, std::abs(a)));
      }
    double best = 0.0;
    for (double x : xs)
      best = std::max(best, std::abs(d_->cdf(x) + d_->cdf_left(-x) - 1.0));
    return 0.5 * best;
  }

  bool S_monotone_from(double D) const {
    if (d_->S_vanishes_beyond(D)) return true;
    int sign = 0;
    double prev = d_->S_star(D);
    for (int i = 1; i <= 10 * 64; ++i) {
      const double s = d_->S_star(D * std::pow(10.0, i / 64.0));
      const double diff = s - prev;
      if (std::abs(diff) > 1e-13 * std::max(std::abs(prev), std::abs(s))) {
        const int sg = diff > 0 ? 1 : -1;
        if (sign != 0 && sg != sign) return false;
        sign = sg;
      }
      prev = s;
    }
    return true;
  }

  // Panel breaks 0 < D 2^-40 < ... < X on a geometric ladder around D.
  std::vector<double> ladder(double lo, double hi) const {
    const double D = d_->default_D();
    std::vector<double> b{lo};
    for (int k = -160; k <= 160; ++k) {
      const double x = D * std::ldexp(1.0, k / 4);
      if (x > lo && x < hi) b.push_back(x);
    }
    b.push_back(hi);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  // integral_0^X x |S*(x)| dx; the first panel carries the x^(1-alpha) cusp.
  double first_moment_to(double X) const {
    // Where c0 x^(-alpha) overflows the integrand is dropped; its mass there is
    // below c0 x^(2 - alpha) and vanishes in double precision.
    auto f = [&](double x) {
      const double v = x * std::abs(d_->S_star(x));
      return std::isfinite(v) ? v : 0.0;
    };
    const double D = d_->default_D();
    const double first = std::min(X, D * std::ldexp(1.0, -20));
    double v = quad::integrate_singular(f, 0.0, first, 1e-10).value;
    if (X > first) v += quad::integrate_panels(f, ladder(first, X), 1e-10).value;
    return v;
  }

  // integral_X^inf |S*(x)| / x^power dx (power 0 or 1).
  double tail_from(double X, int power) const {
    const double D = d_->default_D();
    if (d_->S_vanishes_beyond(D) && X >= D) return 0.0;
    auto f = [&](double x) { return std::abs(d_->S_star(x)) / (power ? x : 1.0); };
    double v = 0.0;
    double lo = X;
    if (d_->S_vanishes_beyond(D)) {
      return quad::integrate_panels(f, ladder(X, D), 1e-10).value;
    }
    const double far = std::max(X, D) * 1e6;
    if (lo < far) v += quad::integrate_panels(f, ladder(lo, far), 1e-10).value;
    const auto tail = quad::integrate(f, far, std::numeric_limits<double>::infinity(), 1e-8);
    if (!std::isfinite(tail.value) || tail.error > 1e-3 * std::abs(tail.value) + 1e-12)
      return std::numeric_limits<double>::infinity();
    return v + tail.value;
  }

  // Running sups of H1..H3 on q_k = 2^(-k/16), built from cumulative integrals
  // of |S*| over the ladder X_k = 1/q_k.
  const std::vector<double>& hbar_table(int i) const {
    std::call_once(hbar_once_->flag, [this] {
      const int n = 16 * 40;
      const double a = alpha();
      std::vector<double> X(n + 1);
      for (int k = 0; k <= n; ++k) X[k] = std::pow(2.0, k / 16.0);
      hq_.resize(n + 1);
      for (int k = 0; k <= n; ++k) hq_[k] = 1.0 / X[k];
      auto piece = [&](int power, double lo, double hi) {
        return quad::integrate(
                   [&](double x) { return std::pow(x, power) * std::abs(d_->S_star(x)); }, lo,
                   hi, 1e-10)
            .value;
      };
      std::vector<double> first(n + 1), t0(n + 1), t1(n + 1);
      first[0] = first_moment_to(X[0]);
      for (int k = 0; k < n; ++k) first[k + 1] = first[k] + piece(1, X[k], X[k + 1]);
      t0[n] = tail_from(X[n], 0);
      t1[n] = tail_from(X[n], 1);
      for (int k = n; k-- > 0;) {
        t0[k] = t0[k + 1] + piece(0, X[k], X[k + 1]);
        t1[k] = t1[k + 1] + piece(-1, X[k], X[k + 1]);
      }
      for (auto& tab : hbar_) tab.assign(n + 1, 0.0);
      double m1 = 0.0, m2 = 0.0, m3 = 0.0;
      for (int k = n + 1; k-- > 0;) {
        const double q = hq_[k];
        m1 = std::max(m1, std::pow(q, 2.0 - a) * first[k]);
        m2 = std::max(m2, std::pow(q, 1.0 - a) * t0[k]);
        m3 = std::max(m3, std::pow(q, -a) * t1[k]);
        hbar_[0][k] = m1;
        hbar_[1][k] = m2;
        hbar_[2][k] = m3;
      }
    });
    return hbar_[i - 1];
  }

  DatumPtr d_;
  Options opt_;
  std::vector<double> grid_, env_;
  double beyond_ = 0.0;
  double kolmo_asym_ = 0.0;

  struct Once {
    std::once_flag flag;
  };
  std::shared_ptr<Once> hbar_once_ = std::make_shared<Once>();
  mutable std::vector<double> hq_;
  mutable std::vector<double> hbar_[3];
};

}  // namespace kacrelax
