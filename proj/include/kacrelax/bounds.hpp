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

// Analytic right-hand sides of the relaxation inequalities and a comparator
// pairing them with measured distances.
//
// Deterministic-weight bounds (Lemma 1, Propositions 1-6) concern
// S_n = sum_j q_j X_j with sum_j q_j^alpha = 1 and a symmetric datum. The
// time-dependent bounds (Theorems 2-9) hold for the solution F(., t); their
// expectations over the largest McKean weight beta_(nu_t) are taken either from
// a Monte Carlo batch or from the analytic surrogates
//   P(beta > x) <= x^(-q/(1+p)) e^(-t (1 - 2A_q)),
//   E beta^m    <= e^(-sigma m t) + e^(-t (1 - q sigma alpha/2 - 2A_q)).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kacrelax/constants.hpp"
#include "kacrelax/errors.hpp"
#include "kacrelax/initial_data.hpp"
#include "kacrelax/mckean.hpp"
#include "kacrelax/metrics.hpp"
#include "kacrelax/parallel.hpp"
#include "kacrelax/quadrature.hpp"
#include "kacrelax/stable.hpp"
#include "kacrelax/wild.hpp"

namespace kacrelax {

enum class BoundId {
  Lemma1_eq22,
  Lemma1_eq23,
  Prop1,
  Prop2_lowdelta,
  Prop2_highdelta,
  Prop3,
  Prop4,
  Prop5,
  Prop6,
  Thm2,
  Thm3_lowdelta,
  Thm3_highdelta,
  Thm4,
  Thm4_exp,
  Thm5,
  Thm6,
  Thm6_exp,
  Thm7,
  Thm8,
  Thm8_exp,
  Thm9,
  F5_eq11,
  eq19,
};

enum class BoundMetric { chi, kolmogorov, cf_pointwise };

struct BoundInfo {
  BoundId id;
  std::string_view name;
  BoundMetric metric;
  bool deterministic;  ///< statement about S_n with given weights
  bool expectation;    ///< involves E_t over beta_(nu_t)
};

inline constexpr std::array<BoundInfo, 23> kBounds{{
    {BoundId::Lemma1_eq22, "Lemma1_eq22", BoundMetric::cf_pointwise, true, false},
    {BoundId::Lemma1_eq23, "Lemma1_eq23", BoundMetric::cf_pointwise, true, false},
    {BoundId::Prop1, "Prop1", BoundMetric::chi, true, false},
    {BoundId::Prop2_lowdelta, "Prop2_lowdelta", BoundMetric::chi, true, false},
    {BoundId::Prop2_highdelta, "Prop2_highdelta", BoundMetric::chi, true, false},
    {BoundId::Prop3, "Prop3", BoundMetric::kolmogorov, true, false},
    {BoundId::Prop4, "Prop4", BoundMetric::kolmogorov, true, false},
    {BoundId::Prop5, "Prop5", BoundMetric::kolmogorov, true, false},
    {BoundId::Prop6, "Prop6", BoundMetric::kolmogorov, true, false},
    {BoundId::Thm2, "Thm2", BoundMetric::chi, false, true},
    {BoundId::Thm3_lowdelta, "Thm3_lowdelta", BoundMetric::chi, false, false},
    {BoundId::Thm3_highdelta, "Thm3_highdelta", BoundMetric::chi, false, false},
    {BoundId::Thm4, "Thm4", BoundMetric::kolmogorov, false, true},
    {BoundId::Thm4_exp, "Thm4_exp", BoundMetric::kolmogorov, false, false},
    {BoundId::Thm5, "Thm5", BoundMetric::kolmogorov, false, true},
    {BoundId::Thm6, "Thm6", BoundMetric::kolmogorov, false, true},
    {BoundId::Thm6_exp, "Thm6_exp", BoundMetric::kolmogorov, false, false},
    {BoundId::Thm7, "Thm7", BoundMetric::kolmogorov, false, false},
    {BoundId::Thm8, "Thm8", BoundMetric::kolmogorov, false, true},
    {BoundId::Thm8_exp, "Thm8_exp", BoundMetric::kolmogorov, false, false},
    {BoundId::Thm9, "Thm9", BoundMetric::kolmogorov, false, false},
    {BoundId::F5_eq11, "F5_eq11", BoundMetric::chi, false, false},
    {BoundId::eq19, "eq19", BoundMetric::chi, false, false},
}};

inline const BoundInfo& bound_info(BoundId id) {
  for (const auto& b : kBounds)
    if (b.id == id) return b;
  throw structural_error("bound_info: unknown id");
}

inline std::string bound_name(BoundId id) { return std::string(bound_info(id).name); }

inline BoundId parse_bound_id(std::string_view s) {
  for (const auto& b : kBounds)
    if (b.name == s) return b.id;
  throw domain_error("unknown bound id '" + std::string(s) + "'");
}

/// Free parameters of the bounds. Unset optionals take documented defaults:
/// sigma = (1 - 2A_q) / (q alpha) / 2, rho_rate = sigma, rho and rho_prime the
/// smallest admissible constants, d the largest admissible contraction radius.
struct FreeParams {
  double c = 0.5;
  double q = 4.0;
  std::optional<double> sigma;
  std::optional<double> delta;
  std::optional<double> rho;
  std::optional<double> rho_prime;
  std::optional<double> rho_rate;
  std::optional<double> D;
  std::optional<double> d;
  double esseen_c = kEsseenConstant;
  double s = 0.0;  ///< order for Lemma1_eq22 (0: alpha)
  double xi_min = 1e-3;  ///< chi_s scan range for measured quantities
};

/// Value with a standard error (zero for analytic quantities).
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Sum of c_k exp(-r_k t) terms; used for the closed-form bounds.
struct ExpTerm {
  std::string label;
  double coef = 0.0;
  double rate = 0.0;
  double at(double t) const { return coef == 0.0 ? 0.0 : coef * std::exp(-rate * t); }
};

/// Expectations over the largest weight beta_(nu_t), either from Monte Carlo
/// replicates or from the analytic surrogates.
class LargestWeight {
 public:
  static LargestWeight analytic(double t, double p, double sigma, double q) {
    LargestWeight w;
    w.t_ = t;
    w.p_ = p;
    w.sigma_ = sigma;
    w.q_ = q;
    return w;
  }

  static LargestWeight monte_carlo(double t, double p, std::vector<double> beta_max) {
    detail::require(!beta_max.empty(), "LargestWeight: no replicates");
    LargestWeight w;
    w.t_ = t;
    w.p_ = p;
    w.mc_ = std::move(beta_max);
    return w;
  }

  static LargestWeight monte_carlo(const SimulationBatch& b) {
    std::vector<double> v;
    v.reserve(b.replicates.size());
    for (const auto& r : b.replicates) v.push_back(r.beta_max);
    return monte_carlo(b.config.t, b.config.p, std::move(v));
  }

  bool is_monte_carlo() const { return !mc_.empty(); }
  double t() const { return t_; }
  double alpha() const { return 2.0 / (1.0 + p_); }

  /// P(beta_(nu_t) > x)
  Estimate tail(double x) const {
    if (is_monte_carlo()) return mean_of([x](double b) { return b > x ? 1.0 : 0.0; });
    if (x >= 1.0) return {};
    if (x <= 0.0) return {1.0, 0.0};
    return {std::min(1.0, beta_max_tail_bound(t_, p_, x, q_)), 0.0};
  }

  /// E beta_(nu_t)^m, m > 0
  Estimate power(double m) const {
    if (is_monte_carlo()) return mean_of([m](double b) { return std::pow(b, m); });
    return {std::min(1.0, beta_max_moment_bound(t_, p_, m, sigma_, q_)), 0.0};
  }

  /// E f(beta_(nu_t)) for f nondecreasing on [0, 1] with f <= f_sup. The
  /// analytic form splits at x_t = e^(-sigma t).
  Estimate expect(const std::function<double(double)>& f, double f_sup) const {
    if (is_monte_carlo()) return mean_of(f);
    const double x = std::exp(-sigma_ * t_);
    return {f(x) + f_sup * tail(x).value, 0.0};
  }

 private:
  template <class F>
  Estimate mean_of(F&& f) const {
    std::vector<double> v(mc_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mc_[i]);
    const auto m = mean_and_stderr(v);
    return {m.mean, m.se};
  }

  double t_ = 0.0, p_ = 1.0, sigma_ = 0.0, q_ = 4.0;
  std::vector<double> mc_;
};

/// |beta| vector of a tree sample, checked against sum |beta_j|^alpha = 1.
inline std::vector<double> weights_from_tree(const TreeSample& s, double alpha) {
  std::vector<double> q(s.betas.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::abs(s.betas[i]);
  quad::CompensatedSum acc;
  for (double x : q) acc.add(std::pow(x, alpha));
  if (std::abs(acc.value() - 1.0) > 1e-12)
    throw domain_error("weights_from_tree: sum |beta_j|^alpha differs from 1");
  return q;
}

/// q_j = n^(-1/alpha), j = 1..n.
inline std::vector<double> equal_weights(std::size_t n, double alpha) {
  detail::require(n >= 1, "equal_weights: n must be >= 1");
  detail::require(alpha > 0.0 && alpha < 2.0, "equal_weights: alpha must lie in (0, 2)");
  return std::vector<double>(n, std::pow(static_cast<double>(n), -1.0 / alpha));
}

namespace detail {

inline void check_weights(std::span<const double> q, double alpha) {
  require(!q.empty(), "weights: empty vector");
  quad::CompensatedSum acc;
  for (double x : q) {
    require(x >= 0.0 && std::isfinite(x), "weights: must be finite and >= 0");
    acc.add(std::pow(x, alpha));
  }
  if (std::abs(acc.value() - 1.0) > 1e-12)
    throw domain_error("weights: sum q_j^alpha must equal 1 (within 1e-12)");
}

inline double power_sum(std::span<const double> q, double m) {
  quad::CompensatedSum acc;
  for (double x : q)
    if (x > 0.0) acc.add(std::pow(x, m));
  return acc.value();
}

}  // namespace detail

/// Derived constants of one (datum, eta, free parameters) configuration.
/// Construction never refuses a datum; each bound checks its own hypotheses.
class BoundContext {
 public:
  explicit BoundContext(std::shared_ptr<const EvenPart> even, std::optional<double> eta = {},
                        FreeParams fp = {})
      : even_(std::move(even)), fp_(fp), law_(even_->alpha(), even_->a0()) {
    const double a0 = even_->a0();
    prm_ = ModelParams::make(ModelParams::p_from_alpha(even_->alpha()), a0,
                             a0 > 0.0 ? eta : std::optional<double>{});
    detail::require(fp_.c > 0.0 && fp_.c < 1.0, "FreeParams: c must lie in (0, 1)");
    detail::require(fp_.q > 0.0, "FreeParams: q must be > 0");
    detail::require(fp_.esseen_c > 0.0, "FreeParams: esseen_c must be > 0");
    sigma_ = fp_.sigma.value_or(rate(fp_.q) / (fp_.q * alpha()) / 2.0);
    detail::require(sigma_ > 0.0 || fp_.sigma.has_value(), "FreeParams: default sigma needs q > 2");
    if (a0 <= 0.0) return;
    M_ = even_->M();
    auto vbar = [this](double x) { return even_->v0_star_bar(x); };
    if (fp_.d) {
      const double d = *fp_.d;
      detail::require(d > 0.0 && d < 1.0, "FreeParams: d must lie in (0, 1)");
      const double x = std::pow(3.0 * d / (8.0 * M_), 1.0 / alpha());
      if (0.8 * M_ * M_ * std::pow(x, alpha()) + vbar(x) > prm_.eta)
        throw hypothesis_error("contraction radius",
                               "(4/5) M^2 |x|^alpha + vbar(x) <= eta on |x| <= (3d/(8M))^(1/alpha)");
      d_ = d;
    } else {
      d_ = find_d(prm_, M_, vbar).d;
    }
    d1_ = std::pow(3.0 / (8.0 * M_), 1.0 / alpha());
    dTilde_ = std::pow(3.0 * d_ / (8.0 * M_), 1.0 / alpha());
    vbar_kink_ = vbar(d1_ * std::pow(d_, 1.0 / alpha()));
    kStar_ = composite_constants(prm_, M_, d_, vbar_kink_, TailInputs{}).kStar;
    lazy_ = std::make_shared<Lazy>();
  }

  const EvenPart& even() const { return *even_; }
  const InitialDatum& datum() const { return even_->datum(); }
  const ModelParams& params() const { return prm_; }
  const FreeParams& free_params() const { return fp_; }
  const StableLaw& law() const { return law_; }
  double alpha() const { return prm_.alpha(); }
  double p() const { return prm_.p; }
  double a0() const { return prm_.a0; }
  double eta() const { return prm_.eta; }
  double sigma() const { return sigma_; }
  double rho_rate() const { return fp_.rho_rate.value_or(sigma_); }

  double M() const { return M_; }
  double d() const { return d_; }
  double d1() const { return d1_; }
  double dTilde() const { return dTilde_; }
  double kStar() const { return kStar_; }
  double Mr(double r) const { return compute_Mr(r, prm_); }
  double Nl(double l) const { return compute_Nl(l, prm_); }
  /// c ||g_alpha|| / dTilde, the smoothing term of the Berry-Esseen step.
  double smoothing() const { return fp_.esseen_c * law_.density_sup() / dTilde_; }
  /// 1 - q sigma alpha / 2 - 2 A_q
  double split_rate() const { return rate(fp_.q) - fp_.q * sigma_ * alpha() / 2.0; }

  const TailFunctionals& tails() const {
    std::call_once(lazy_->tails_once, [this] { lazy_->tails = even_->tail_functionals(fp_.D); });
    return lazy_->tails;
  }

  const CompositeConstants& composite() const {
    std::call_once(lazy_->cc_once, [this] {
      lazy_->cc = composite_constants(prm_, M_, d_, vbar_kink_, tails().inputs());
    });
    return lazy_->cc;
  }

  /// Jbar(q) = integral_0^inf vbar(xi q)(1 + 2 xi^alpha vbar(xi q)) xi^(alpha-1)
  /// e^(-(a0-eta) xi^alpha) d xi, nondecreasing in q; read from a table on
  /// q_k = 2^(-k/16) rounded up to the next node.
  double Jbar(double q) const {
    std::call_once(lazy_->j_once, [this] { build_jbar(); });
    if (q <= 0.0) return 0.0;
    const auto& qs = lazy_->jq;
    if (q <= qs.back()) return jbar_exact(qs.back());
    std::size_t k = 0;
    while (k + 1 < qs.size() && qs[k + 1] >= q) ++k;
    return lazy_->jv[k];
  }

  /// Jbar evaluated directly (piecewise closed form on the envelope steps).
  double jbar_exact(double q) const {
    const auto& g = even_->envelope_nodes();
    const auto& e = even_->envelope_values();
    const double b = prm_.a0 - prm_.eta, a = alpha();
    // integral_u0^u1 (1 + 2 v u) e^(-b u) du / alpha
    auto piece = [&](double v, double u0, double u1) {
      const double e0 = std::exp(-b * u0), e1 = std::isinf(u1) ? 0.0 : std::exp(-b * u1);
      const double m0 = (e0 - e1) / b;
      const double m1 = ((1.0 + b * u0) * e0 - (std::isinf(u1) ? 0.0 : (1.0 + b * u1) * e1)) / (b * b);
      return v * (m0 + 2.0 * v * m1) / a;
    };
    double total = 0.0, u_prev = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double u = std::pow(g[k] / q, a);
      total += piece(e[k], u_prev, u);
      u_prev = u;
      if (b * u_prev > 800.0) return total;
    }
    return total + piece(even_->v0_norm(), u_prev, std::numeric_limits<double>::infinity());
  }

  /// Smallest rho with |v0*(x)| <= rho |x|^delta for |x| <= d1 d^(1/alpha); a
  /// configured rho below it is refused.
  double rho(std::string_view who, double delta) const {
    const double need = even_->rho_v0(delta, d1_ * std::pow(d_, 1.0 / alpha()));
    if (!std::isfinite(need))
      throw hypothesis_error(std::string(who), "|v0*(xi)| = O(|xi|^delta) near 0");
    if (fp_.rho) {
      if (*fp_.rho < need * (1.0 - 1e-9))
        throw hypothesis_error(std::string(who),
                               "|v0*(x)| <= rho |x|^delta on |x| <= d1 d^(1/alpha) (configured rho "
                               "too small)");
      return *fp_.rho;
    }
    return need;
  }

  /// Smallest rho' with |h*(x)| <= rho' / x^delta for all x > 0.
  double rho_prime(std::string_view who, double delta) const {
    const double need = even_->rho_prime(delta);
    if (!std::isfinite(need))
      throw hypothesis_error(std::string(who), "|h*(x)| <= rho' / |x|^delta for all x > 0");
    if (fp_.rho_prime) {
      if (*fp_.rho_prime < need * (1.0 - 1e-9))
        throw hypothesis_error(std::string(who),
                               "|h*(x)| <= rho' / |x|^delta (configured rho' too small)");
      return *fp_.rho_prime;
    }
    return need;
  }

 private:
  struct Lazy {
    std::once_flag tails_once, cc_once, j_once;
    TailFunctionals tails;
    CompositeConstants cc;
    std::vector<double> jq, jv;
  };

  void build_jbar() const {
    const int n = 16 * 40;
    auto& qs = lazy_->jq;
    auto& vs = lazy_->jv;
    qs.resize(n + 1);
    vs.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
      qs[k] = std::pow(2.0, -k / 16.0);
      vs[k] = jbar_exact(qs[k]);
    }
  }

  std::shared_ptr<const EvenPart> even_;
  FreeParams fp_;
  StableLaw law_;
  ModelParams prm_;
  double sigma_ = 0.0;
  double M_ = 0.0, d_ = 0.0, d1_ = 0.0, dTilde_ = 0.0, vbar_kink_ = 0.0, kStar_ = 0.0;
  std::shared_ptr<Lazy> lazy_;
};

namespace detail {

inline void require_positive_a0(const BoundContext& ctx, std::string_view who) {
  if (!(ctx.a0() > 0.0))
    throw hypothesis_error(std::string(who),
                           "F0 in the domain of normal attraction with a0 > 0 (c0 > 0)");
}

inline void require_symmetric(const BoundContext& ctx, std::string_view who) {
  if (!ctx.datum().symmetric())
    throw hypothesis_error(std::string(who), "F0 symmetric");
}

inline double require_delta(const BoundContext& ctx, std::string_view who, double lo, double hi,
                            bool hi_closed, const char* range) {
  if (!ctx.free_params().delta)
    throw hypothesis_error(std::string(who), std::string("delta given, delta in ") + range);
  const double d = *ctx.free_params().delta;
  if (!(d > lo && (hi_closed ? d <= hi : d < hi)))
    throw hypothesis_error(std::string(who), std::string("delta in ") + range);
  return d;
}

inline void require_split_rate(const BoundContext& ctx, std::string_view who) {
  if (!(ctx.sigma() > 0.0 && ctx.split_rate() > 0.0))
    throw hypothesis_error(std::string(who), "sigma > 0 and 1 - q sigma alpha/2 - 2A_q > 0");
}

inline double finite_or_refuse(double v, std::string_view who, const char* what) {
  if (!std::isfinite(v)) throw hypothesis_error(std::string(who), what);
  return v;
}

// Prop 5 / Theorems 6-7: alpha in [1, 2), integrable tail remainder at alpha = 1.
inline void require_prop5(const BoundContext& ctx, std::string_view who) {
  if (ctx.alpha() < 1.0) throw hypothesis_error(std::string(who), "alpha in [1, 2)");
  if (ctx.alpha() == 1.0 && !std::isfinite(ctx.tails().abs_S_tail))
    throw hypothesis_error(std::string(who), "integral of |S*| finite when alpha = 1");
}

// Prop 6 / Theorems 8-9: S* monotone on [D, inf).
inline void require_prop6(const BoundContext& ctx, std::string_view who) {
  if (!ctx.tails().S_monotone)
    throw hypothesis_error(std::string(who), "S* monotone on [D, +inf)");
}

}  // namespace detail

/// Right-hand side of Lemma 1 at xi: Lemma1_eq22 (any s > 0, c in [0, 1)) or Lemma1_eq23
/// (s = alpha, c in (0, 1)). v0 is the datum's remainder (symmetric datum).
inline double lemma1_rhs(const BoundContext& ctx, BoundId id, std::span<const double> q,
                         double xi) {
  const std::string who = bound_name(id);
  detail::require(id == BoundId::Lemma1_eq22 || id == BoundId::Lemma1_eq23,
                  "lemma1_rhs: id must be a Lemma 1 variant");
  detail::require_positive_a0(ctx, who);
  detail::require_symmetric(ctx, who);
  const double a = ctx.alpha();
  detail::check_weights(q, a);
  const double c = ctx.free_params().c;
  const double s = id == BoundId::Lemma1_eq23 || ctx.free_params().s == 0.0 ? a
                                                                            : ctx.free_params().s;
  if (!(s > 0.0)) throw hypothesis_error(who, "s > 0");
  const double qn = *std::max_element(q.begin(), q.end());
  const double M = ctx.M(), d = ctx.d(), d1 = ctx.d1();
  xi = std::abs(xi);
  if (xi == 0.0) return 0.0;
  const double xa = std::pow(xi, a);
  const double Dn = std::pow(3.0 / (8.0 * M) * std::min(d, std::pow(qn, c * a)), 1.0 / a) / qn;
  const double damp = std::exp(-(ctx.a0() - ctx.eta()) * xa);
  // sigma-bar(xi), the small-xi factor of the eq22 variant
  auto sigma_bar = [&] {
    quad::CompensatedSum acc;
    for (double qj : q) {
      if (qj == 0.0) continue;
      const double v = std::abs(ctx.datum().v0_star(xi * qj));
      const double qa = std::pow(qj, a);
      acc.add(qa * v * (1.0 + 2.0 * xa * v));
      acc.add(xa * M * M * qa * (0.8 * qa + 1.28 * M * M * xa * xa * qa * qa));
    }
    return acc.value();
  };
  const bool big = qn > std::pow(d, 1.0 / (c * a));
  if (id == BoundId::Lemma1_eq22) {
    if (xi <= Dn) return damp * xa * sigma_bar();
    const double bracket = big ? std::pow(qn, s) / std::pow(d, s / a) : std::pow(qn, s * (1.0 - c));
    return 2.0 * std::pow(xi / d1, s) * bracket;
  }
  // eq23 variant as the eq22 variant at s = alpha: k* replaces
  // sigma-bar when q_(n) > d.
  if (xi <= Dn) return damp * xa * (qn > d ? ctx.kStar() : sigma_bar());
  return 2.0 * xa / std::pow(d1, a) * (big ? std::pow(qn, a) / d : std::pow(qn, a * (1.0 - c)));
}

/// Right-hand side of Propositions 1-6 for the weights q.
inline double prop_rhs(const BoundContext& ctx, BoundId id, std::span<const double> q) {
  const std::string who = bound_name(id);
  detail::require(bound_info(id).deterministic && id != BoundId::Lemma1_eq22 &&
                      id != BoundId::Lemma1_eq23,
                  "prop_rhs: id must be a proposition");
  detail::require_positive_a0(ctx, who);
  detail::require_symmetric(ctx, who);
  const double a = ctx.alpha();
  detail::check_weights(q, a);
  const double qn = *std::max_element(q.begin(), q.end());
  const double M = ctx.M(), d = ctx.d(), d1 = ctx.d1(), c = ctx.free_params().c;
  const double M2 = M * M, M4 = M2 * M2;
  auto S = [&](double m) { return detail::power_sum(q, m); };
  const double pi = std::numbers::pi;
  const double smooth = ctx.smoothing() * qn;

  switch (id) {
    case BoundId::Prop1: {
      const double M1 = ctx.Mr(1), M3 = ctx.Mr(3);
      quad::CompensatedSum acc;
      if (qn > d) acc.add(ctx.kStar());
      for (double qj : q) {
        if (qj == 0.0) continue;
        const double v = ctx.even().v0_star_bar(d1 * qj * std::pow(qn, c - 1.0));
        acc.add(std::pow(qj, a) * v * (1.0 + 2.0 * M1 * v));
      }
      const double qa = std::pow(qn, a);
      acc.add(qa * (0.8 * M1 * M2 + 1.28 * M3 * M4 * qa));
      const double big = qn > std::pow(d, 1.0 / (c * a)) ? qa / d : 0.0;
      acc.add(2.0 / std::pow(d1, a) * (big + std::pow(qn, a * (1.0 - c))));
      return acc.value();
    }
    case BoundId::Prop2_lowdelta: {
      const double dl = detail::require_delta(ctx, who, 0.0, a, true, "(0, alpha]");
      const double rho = ctx.rho(who, dl);
      return rho * S(a + dl) + 2.0 * rho * rho * ctx.Mr(1.0 + dl / a) * S(a + 2.0 * dl) +
             0.8 * M2 * ctx.Mr(1.0 - dl / a) * S(2.0 * a) +
             1.28 * M4 * ctx.Mr(3.0 - dl / a) * S(3.0 * a) +
             2.0 * std::pow(qn, a + dl) / (std::pow(d1, a + dl) * std::pow(d, 1.0 + dl / a));
    }
    case BoundId::Prop2_highdelta: {
      const double dl = detail::require_delta(ctx, who, a, 2.0 * a, true, "(alpha, 2 alpha]");
      const double rho = ctx.rho(who, dl);
      return rho * ctx.Mr(dl / a - 1.0) * S(a + dl) +
             2.0 * rho * rho * ctx.Mr(2.0 * dl / a) * S(a + 2.0 * dl) + 0.8 * M2 * S(2.0 * a) +
             1.28 * M4 * ctx.Mr(2.0) * S(3.0 * a) +
             2.0 * std::pow(qn, 2.0 * a) / (std::pow(d1, 2.0 * a) * d * d);
    }
    case BoundId::Prop3: {
      // (2/pi) sum_j q_j^alpha integral_0^(dTilde/q_(n)) e^(-(a0-eta) xi^alpha) xi^(alpha-1) H(xi, q_j),
      // integrated in u = xi^alpha.
      const double b = ctx.a0() - ctx.eta();
      const double U = std::pow(ctx.dTilde() / qn, a);
      std::vector<double> sorted(q.begin(), q.end());
      std::sort(sorted.begin(), sorted.end());
      quad::CompensatedSum acc;
      for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double qj = sorted[i];
        if (qj > 0.0) {
          auto f = [&](double u) {
            const double xi = std::pow(u, 1.0 / a);
            const double v = std::abs(ctx.datum().v0_star(xi * qj));
            return std::exp(-b * u) * v * (1.0 + 2.0 * u * v) / a;
          };
          const double I = quad::integrate(f, 0.0, U, 1e-10, 1e-13).value;
          acc.add(static_cast<double>(j - i) * std::pow(qj, a) * I);
        }
        i = j;
      }
      return 2.0 / pi * acc.value() + 8.0 / (5.0 * pi) * M2 * ctx.Nl(2.0 * a) * S(2.0 * a) +
             64.0 / (25.0 * pi) * M4 * ctx.Nl(4.0 * a) * S(3.0 * a) + smooth;
    }
    case BoundId::Prop4: {
      const double dl = detail::require_delta(ctx, who, 0.0, std::numeric_limits<double>::infinity(),
                                              false, "(0, inf)");
      const double rho = ctx.rho(who, dl);
      return 2.0 / pi *
                 (rho * ctx.Nl(a + dl) * S(a + dl) +
                  2.0 * rho * rho * ctx.Nl(2.0 * (a + dl)) * S(a + 2.0 * dl) +
                  0.8 * M2 * ctx.Nl(2.0 * a) * S(2.0 * a) +
                  1.28 * M4 * ctx.Nl(4.0 * a) * S(3.0 * a)) +
             smooth;
    }
    case BoundId::Prop5: {
      detail::require_prop5(ctx, who);
      const auto& B = ctx.composite();
      quad::CompensatedSum acc;
      for (double qj : q) {
        if (qj == 0.0) continue;
        acc.add(B.B1 * qj * qj + B.B2 * std::pow(qj, 4.0 - a) +
                (B.B3 * ctx.even().H1(qj) + B.B4 * ctx.even().H2(qj)) * std::pow(qj, a) +
                B.B5 * std::pow(qj, 2.0 * a) + B.B6 * std::pow(qj, 3.0 * a));
      }
      return 2.0 / pi * acc.value() + smooth;
    }
    case BoundId::Prop6: {
      detail::require_prop6(ctx, who);
      const auto& B = ctx.composite();
      quad::CompensatedSum acc;
      for (double qj : q) {
        if (qj == 0.0) continue;
        acc.add(B.Bbar1 * qj * qj + B.Bbar2 * std::pow(qj, 4.0 - a) +
                B.Bbar3 * (ctx.even().H1(qj) + ctx.even().H3(qj)) * std::pow(qj, a) +
                B.B5 * std::pow(qj, 2.0 * a) + B.B6 * std::pow(qj, 3.0 * a));
      }
      return 2.0 / pi * acc.value() + smooth;
    }
    default:
      throw structural_error("prop_rhs: not a proposition");
  }
}

/// Order s of the chi_s distance a chi-type bound controls.
inline double bound_order(const BoundContext& ctx, BoundId id) {
  const double a = ctx.alpha();
  switch (id) {
    case BoundId::Prop1:
    case BoundId::Thm2:
    case BoundId::eq19:
      return a;
    case BoundId::Prop2_lowdelta:
    case BoundId::Thm3_lowdelta:
    case BoundId::F5_eq11:
      return a + ctx.free_params().delta.value_or(0.0);
    case BoundId::Prop2_highdelta:
    case BoundId::Thm3_highdelta:
      return 2.0 * a;
    default:
      return 0.0;
  }
}

/// Exponential terms of the closed-form time bounds (Thm3, Thm5 with the
/// analytic E beta, Thm7, Thm9, F5_eq11). `chi0` is chi_(alpha+delta)(F0, G_alpha),
/// needed by F5_eq11 only.
inline std::vector<ExpTerm> exponential_terms(const BoundContext& ctx, BoundId id,
                                              std::optional<double> chi0 = {}) {
  const std::string who = bound_name(id);
  detail::require_positive_a0(ctx, who);
  const double a = ctx.alpha();
  const double M = ctx.M(), M2 = M * M, M4 = M2 * M2, d = ctx.d(), d1 = ctx.d1();
  const double pi = std::numbers::pi;
  const double r4 = rate(4.0), r6 = rate(6.0);
  const double asym = ctx.even().kolmogorov_asymmetry();
  std::vector<ExpTerm> out;
  auto smoothing_terms = [&] {
    detail::require_split_rate(ctx, who);
    out.push_back({"smoothing_sigma", ctx.smoothing(), ctx.sigma()});
    out.push_back({"smoothing_split", ctx.smoothing(), ctx.split_rate()});
  };
  switch (id) {
    case BoundId::Thm3_lowdelta: {
      const double dl = detail::require_delta(ctx, who, 0.0, a, true, "(0, alpha]");
      const double rho = ctx.rho(who, dl);
      const double im = detail::finite_or_refuse(ctx.even().im_v0_sup(dl), who,
                                                 "sup |Im v0(xi)| / |xi|^delta finite");
      out.push_back({"rho", rho + 2.0 / (std::pow(d1, a + dl) * std::pow(d, (a + dl) / a)),
                     rate(2.0 * (1.0 + dl / a))});
      out.push_back({"M2", 0.8 * M2 * ctx.Mr((a - dl) / a), r4});
      out.push_back({"rho2", 2.0 * rho * rho * ctx.Mr((a + dl) / a), rate(2.0 * (1.0 + 2.0 * dl / a))});
      out.push_back({"M4", 1.28 * M4 * ctx.Mr((3.0 * a - dl) / a), r6});
      out.push_back({"imaginary", im, 1.0});
      break;
    }
    case BoundId::Thm3_highdelta: {
      const double dl = detail::require_delta(ctx, who, a, 2.0 * a, true, "(alpha, 2 alpha]");
      const double rho = ctx.rho(who, dl);
      const double im = detail::finite_or_refuse(ctx.even().im_v0_sup(a), who,
                                                 "sup |Im v0(xi)| / |xi|^alpha finite");
      out.push_back({"M2", 0.8 * M2 + 2.0 / (std::pow(d1, 2.0 * a) * d * d), r4});
      out.push_back({"rho", rho * ctx.Mr((dl - a) / a), rate(2.0 * (1.0 + dl / a))});
      out.push_back({"M4", 1.28 * M4 * ctx.Mr(2.0), r6});
      out.push_back({"rho2", 2.0 * rho * rho * ctx.Mr(2.0 * dl / a), rate(2.0 * (1.0 + 2.0 * dl / a))});
      out.push_back({"imaginary", im, 1.0});
      break;
    }
    case BoundId::Thm5: {
      const double dl = detail::require_delta(ctx, who, 0.0, std::numeric_limits<double>::infinity(),
                                              false, "(0, inf)");
      const double rho = ctx.rho(who, dl);
      out.push_back({"M2", 8.0 / (5.0 * pi) * M2 * ctx.Nl(2.0 * a), r4});
      out.push_back({"M4", 64.0 / (25.0 * pi) * M4 * ctx.Nl(4.0 * a), r6});
      out.push_back({"rho", 2.0 / pi * rho * ctx.Nl(a + dl), rate(2.0 + 2.0 * dl / a)});
      out.push_back({"rho2", 2.0 * rho * rho * ctx.Nl(2.0 * a + 2.0 * dl), rate(2.0 + 4.0 * dl / a)});
      smoothing_terms();
      out.push_back({"asymmetry", asym, 1.0});
      break;
    }
    case BoundId::Thm7:
    case BoundId::Thm9: {
      const bool seven = id == BoundId::Thm7;
      if (seven)
        detail::require_prop5(ctx, who);
      else
        detail::require_prop6(ctx, who);
      const double dl = detail::require_delta(ctx, who, 0.0, 2.0 - a, false, "(0, 2 - alpha)");
      if (seven && !(a + dl - 1.0 > 0.0)) throw hypothesis_error(who, "alpha + delta - 1 > 0");
      const double rp = ctx.rho_prime(who, dl);
      const auto& B = ctx.composite();
      const double b1 = seven ? B.B1 : B.Bbar1, b2 = seven ? B.B2 : B.Bbar2;
      const double h = seven ? rp * B.B3 / (2.0 - a - dl) + rp * B.B4 / (a + dl - 1.0)
                             : rp * B.Bbar3 / (2.0 - a - dl) + rp * B.Bbar3 / (a + dl);
      out.push_back({"B1", 2.0 / pi * b1, rate(4.0 / a)});
      out.push_back({"B2", 2.0 / pi * b2, rate((8.0 - 2.0 * a) / a)});
      out.push_back({"B5", 2.0 / pi * B.B5, r4});
      out.push_back({"B6", 2.0 / pi * B.B6, r6});
      out.push_back({"rho_prime", 2.0 / pi * h, rate(2.0 + 2.0 * dl / a)});
      smoothing_terms();
      out.push_back({"asymmetry", asym, 1.0});
      break;
    }
    case BoundId::F5_eq11: {
      const double dl = detail::require_delta(ctx, who, 0.0, a, true, "(0, alpha]");
      if (!chi0) throw structural_error("F5_eq11: chi_(alpha+delta)(F0, G_alpha) not supplied");
      detail::finite_or_refuse(*chi0, who, "chi_(alpha+delta)(F0, G_alpha) finite");
      out.push_back({"chi0", *chi0, rate(2.0 * (1.0 + dl / a))});
      break;
    }
    default:
      throw structural_error("exponential_terms: " + who + " is not a closed exponential form");
  }
  return out;
}

/// chi_s(F0, G_alpha) measured on [xi_min, xi_max] (for F5_eq11).
inline double measured_chi0(const BoundContext& ctx, double s) {
  const double xi_max = std::pow(40.0 / ctx.a0(), 1.0 / ctx.alpha());
  return chi_s_datum(ctx.datum(), ctx.law(), s, ctx.free_params().xi_min, xi_max).value;
}

/// Right-hand side of a time bound at t. Expectation forms use `w` (Monte Carlo
/// or analytic); closed forms ignore it.
inline Estimate theorem_rhs(const BoundContext& ctx, BoundId id, double t,
                            const LargestWeight& w, std::optional<double> chi0 = {}) {
  const std::string who = bound_name(id);
  detail::require(!bound_info(id).deterministic, "theorem_rhs: id must be a time bound");
  detail::require(t >= 0.0 && std::isfinite(t), "theorem_rhs: t must be >= 0");
  detail::require_positive_a0(ctx, who);
  if (w.is_monte_carlo() && std::abs(w.t() - t) > 1e-12)
    throw structural_error(who + ": Monte Carlo weights belong to another t");
  const double a = ctx.alpha();
  const double M = ctx.M(), M2 = M * M, M4 = M2 * M2, d = ctx.d(), d1 = ctx.d1();
  const double c = ctx.free_params().c;
  const double pi = std::numbers::pi;
  const double r4 = rate(4.0), r6 = rate(6.0);
  const double et = std::exp(-t);
  const double asym = ctx.even().kolmogorov_asymmetry();
  const auto& ev = ctx.even();

  Estimate out;
  auto add = [&](double coef, Estimate e) {
    out.value += coef * e.value;
    out.se += std::abs(coef) * e.se;  // terms share replicates: add SEs linearly
  };
  auto add_value = [&](double v) { out.value += v; };
  // E_t(R_1,t) shared by Thm2 and eq19
  auto remainder_terms = [&](const LargestWeight& lw) {
    const double M1 = ctx.Mr(1), M3 = ctx.Mr(3);
    add(0.8 * M2 * M1, lw.power(a));
    add(1.28 * M3 * M4, lw.power(2.0 * a));
    add(ctx.kStar() + 2.0 / (d * std::pow(d1, a)),
        lw.tail(std::min(d, std::pow(d, 1.0 / (c * a)))));
    add(2.0 / std::pow(d1, a), lw.power(a * (1.0 - c)));
    add_value(et * detail::finite_or_refuse(ev.im_v0_sup(0.0), who, "sup |Im v0(xi)| finite"));
  };
  auto kolmogorov_tail = [&] {
    add_value(8.0 / (5.0 * pi) * M2 * ctx.Nl(2.0 * a) * std::exp(-t * r4));
    add_value(64.0 / (25.0 * pi) * M4 * ctx.Nl(4.0 * a) * std::exp(-t * r6));
    add_value(et * asym);
  };

  switch (id) {
    case BoundId::Thm2: {
      const double M1 = ctx.Mr(1), vn = ev.v0_norm();
      auto vb = [&](double b) { return ev.v0_star_bar(d1 * std::pow(b, c)); };
      add(1.0, w.expect(vb, vn));
      add(2.0 * M1, w.expect([&](double b) { const double v = vb(b); return v * v; }, vn * vn));
      remainder_terms(w);
      return out;
    }
    case BoundId::eq19: {
      detail::require_split_rate(ctx, who);
      const double M1 = ctx.Mr(1);
      const double v = ev.v0_star_bar(d1 * std::exp(-c * ctx.sigma() * t));
      add_value(v + 2.0 * M1 * v * v);
      add_value(M * (1.0 + 2.0 * M1 * M) * std::exp(-t * ctx.split_rate()));
      const auto lw = LargestWeight::analytic(t, ctx.p(), ctx.sigma(), ctx.free_params().q);
      remainder_terms(lw);
      return out;
    }
    case BoundId::Thm4: {
      // Hbar form: the per-leaf integrals are bounded through the largest weight.
      const double jmax = ctx.Jbar(1.0);
      add(2.0 / pi, w.expect([&](double b) { return ctx.Jbar(b); }, jmax));
      add(ctx.smoothing(), w.power(1.0));
      kolmogorov_tail();
      return out;
    }
    case BoundId::Thm4_exp: {
      detail::require_split_rate(ctx, who);
      const double vn = ev.v0_norm();
      kolmogorov_tail();
      add_value((2.0 / pi * vn * (ctx.Nl(a) + 2.0 * ctx.Nl(2.0 * a) * vn) + ctx.smoothing()) *
                std::exp(-t * ctx.split_rate()));
      add_value(std::exp(-ctx.rho_rate() * t) * ctx.smoothing());
      add_value(2.0 / pi * ctx.Jbar(std::exp(-ctx.sigma() * t)));
      return out;
    }
    case BoundId::Thm5: {
      const auto terms = exponential_terms(ctx, id);
      for (const auto& term : terms)
        if (term.label.rfind("smoothing", 0) != 0) add_value(term.at(t));
      add(ctx.smoothing(), w.power(1.0));
      return out;
    }
    case BoundId::Thm6:
    case BoundId::Thm8: {
      const bool six = id == BoundId::Thm6;
      if (six)
        detail::require_prop5(ctx, who);
      else
        detail::require_prop6(ctx, who);
      const auto& B = ctx.composite();
      const auto& tf = ctx.tails();
      if (six) {
        add(2.0 / pi,
            w.expect([&](double b) { return B.B3 * ev.Hbar(1, b) + B.B4 * ev.Hbar(2, b); },
                     B.B3 * tf.k3 + B.B4 * tf.k4));
      } else {
        add(2.0 / pi * B.Bbar3,
            w.expect([&](double b) { return ev.Hbar(1, b) + ev.Hbar(3, b); }, tf.k3 + tf.k5));
      }
      add(ctx.smoothing(), w.power(1.0));
      add_value(2.0 / pi *
                ((six ? B.B1 : B.Bbar1) * std::exp(-t * rate(4.0 / a)) +
                 (six ? B.B2 : B.Bbar2) * std::exp(-t * rate((8.0 - 2.0 * a) / a)) +
                 B.B5 * std::exp(-t * r4) + B.B6 * std::exp(-t * r6)));
      add_value(et * asym);
      return out;
    }
    case BoundId::Thm6_exp:
    case BoundId::Thm8_exp: {
      const bool six = id == BoundId::Thm6_exp;
      if (six)
        detail::require_prop5(ctx, who);
      else
        detail::require_prop6(ctx, who);
      detail::require_split_rate(ctx, who);
      const auto& B = ctx.composite();
      const auto& tf = ctx.tails();
      const double x = std::exp(-ctx.sigma() * t), sm = ctx.smoothing();
      add_value(2.0 / pi *
                ((six ? B.B1 : B.Bbar1) * std::exp(-t * rate(4.0 / a)) +
                 (six ? B.B2 : B.Bbar2) * std::exp(-t * rate((8.0 - 2.0 * a) / a)) +
                 B.B5 * std::exp(-t * r4) + B.B6 * std::exp(-t * r6)));
      const double hk = six ? tf.k3 * B.B3 + tf.k4 * B.B4 : B.Bbar3 * (tf.k3 + tf.k5);
      const double hx = six ? B.B3 * ev.Hbar(1, x) + B.B4 * ev.Hbar(2, x)
                            : B.Bbar3 * (ev.Hbar(1, x) + ev.Hbar(3, x));
      add_value((sm + 2.0 / pi * hk) * std::exp(-t * ctx.split_rate()));
      add_value(sm * x + 2.0 / pi * hx);
      add_value(et * asym);
      return out;
    }
    case BoundId::Thm3_lowdelta:
    case BoundId::Thm3_highdelta:
    case BoundId::Thm7:
    case BoundId::Thm9:
    case BoundId::F5_eq11: {
      for (const auto& term : exponential_terms(ctx, id, chi0)) add_value(term.at(t));
      return out;
    }
    default:
      throw structural_error("theorem_rhs: unsupported id " + who);
  }
}

// ---------------------------------------------------------------------------
// Reports

enum class Verdict { holds, holds_within_band, violated, inapplicable };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_within_band: return "holds_within_band";
    case Verdict::violated: return "violated";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "?";
}

struct Measured {
  double value = 0.0;
  double uncertainty = 0.0;
  std::string source;
};

struct BoundReport {
  BoundId id{};
  std::string datum;
  double t = std::numeric_limits<double>::quiet_NaN();  ///< time bounds
  std::size_t n = 0;                                    ///< number of weights (propositions)
  double xi = std::numeric_limits<double>::quiet_NaN(); ///< Lemma 1 point
  Measured lhs;
  Estimate rhs;
  std::string rhs_source;  ///< analytic | monte_carlo
  Verdict verdict = Verdict::inapplicable;
  double slack = std::numeric_limits<double>::quiet_NaN();  ///< rhs - lhs
  std::string note;  ///< refused hypothesis
};

/// violated only if lhs - 3 u > rhs, u the combined uncertainty of both sides.
inline Verdict classify(double lhs, double lhs_unc, double rhs, double rhs_se) {
  const double u = lhs_unc + rhs_se;
  if (lhs <= rhs) return Verdict::holds;
  if (lhs - 3.0 * u <= rhs) return Verdict::holds_within_band;
  return Verdict::violated;
}

inline void mark_inapplicable(BoundReport& r, const hypothesis_error& e) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  r.verdict = Verdict::inapplicable;
  r.lhs = {nan, nan, ""};
  r.rhs = {nan, nan};
  r.note = e.what();
}

inline void finish_report(BoundReport& r) {
  r.verdict = classify(r.lhs.value, r.lhs.uncertainty, r.rhs.value, r.rhs.se);
  r.slack = r.rhs.value - r.lhs.value;
}

inline bool any_violated(std::span<const BoundReport> rs) {
  return std::any_of(rs.begin(), rs.end(),
                     [](const BoundReport& r) { return r.verdict == Verdict::violated; });
}

/// Weighted sum S_n of the datum for deterministic-weight checks.
inline MetricResult measure_weighted(const BoundContext& ctx, BoundId id,
                                     std::span<const double> q) {
  const WeightedSum sum(ctx.even().datum_ptr(), q);
  if (bound_info(id).metric == BoundMetric::kolmogorov)
    return kolmogorov_by_inversion(sum, ctx.law());
  const double s = bound_order(ctx, id);
  const double xi_max = std::pow(40.0 / ctx.a0(), 1.0 / ctx.alpha());
  std::vector<double> nodes;
  const double lo = ctx.free_params().xi_min;
  const int n = 1200;
  for (int i = 0; i <= n; ++i) nodes.push_back(lo * std::pow(xi_max / lo, double(i) / n));
  auto r = chi_s([&](double xi) { return sum.cf(xi); }, nodes, ctx.law(), s, lo, xi_max);
  r.band = 1e-12 / std::pow(lo, s);
  return r;
}

/// Lemma 1 at the points xis: |phi_n(xi) - g(xi)| against the right-hand side.
inline std::vector<BoundReport> check_lemma1(const BoundContext& ctx, BoundId id,
                                             std::span<const double> q,
                                             std::span<const double> xis) {
  std::vector<BoundReport> out;
  const WeightedSum sum(ctx.even().datum_ptr(), q);
  for (double xi : xis) {
    BoundReport r;
    r.id = id;
    r.datum = ctx.datum().name();
    r.n = q.size();
    r.xi = xi;
    r.rhs_source = "analytic";
    try {
      r.rhs = {lemma1_rhs(ctx, id, q, xi), 0.0};
      r.lhs = {std::abs(sum.cf(xi) - ctx.law().cf(xi)), 1e-14, "cf_product"};
      finish_report(r);
    } catch (const hypothesis_error& e) {
      mark_inapplicable(r, e);
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Proposition id for each weight vector: measured LHS (CF product with
/// inversion for K, direct sup for chi) against the right-hand side.
inline std::vector<BoundReport> check_propositions(const BoundContext& ctx, BoundId id,
                                                   const std::vector<std::vector<double>>& qs,
                                                   unsigned threads = 0) {
  std::vector<BoundReport> out(qs.size());
  parallel_for(qs.size(), threads, [&](std::size_t i) {
    BoundReport& r = out[i];
    r.id = id;
    r.datum = ctx.datum().name();
    r.n = qs[i].size();
    r.rhs_source = "analytic";
    try {
      r.rhs = {prop_rhs(ctx, id, qs[i]), 0.0};
      const auto m = measure_weighted(ctx, id, qs[i]);
      r.lhs = {m.value, m.band, m.source};
      finish_report(r);
    } catch (const hypothesis_error& e) {
      mark_inapplicable(r, e);
    }
  });
  return out;
}

/// Settings of the time-bound runner.
struct TheoremCheckConfig {
  std::vector<double> ts{1.0, 2.0, 4.0};
  std::size_t replicates = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool monte_carlo_moments = true;  ///< also report expectation forms with MC moments
  bool analytic_moments = true;     ///< ... and with the analytic surrogates
  double wild_tol = 1e-6;
  SolveOptions wild;
};

/// Batches and Wild solutions computed elsewhere, indexed like cfg.ts.
struct MeasurementSource {
  std::function<const SimulationBatch&(std::size_t)> batch;
  std::function<const WildSolution&(std::size_t)> solution;
};

/// Measurements at one time: K from a Monte Carlo batch, chi_s from the Wild
/// solution (computed on first use unless a source supplies them).
class TimeMeasurements {
 public:
  TimeMeasurements(const BoundContext& ctx, double t, const TheoremCheckConfig& cfg,
                   std::size_t index, const MeasurementSource* src = nullptr)
      : ctx_(ctx), t_(t), cfg_(cfg), index_(index), src_(src) {}

  double t() const { return t_; }

  const SimulationBatch& batch() {
    if (src_ && src_->batch) return src_->batch(index_);
    if (!batch_) {
      BatchConfig bc;
      bc.t = t_;
      bc.p = ctx_.p();
      bc.replicates = cfg_.replicates;
      bc.seed = cfg_.seed + 0x9E3779B97F4A7C15ull * (index_ + 1);
      bc.threads = cfg_.threads;
      batch_ = run_batch(bc, &ctx_.datum());
    }
    return *batch_;
  }

  const MetricResult& kolmogorov() {
    if (!K_) K_ = kolmogorov_empirical(batch().values(), ctx_.law());
    return *K_;
  }

  MetricResult chi(double s) {
    if (src_ && src_->solution)
      return chi_s(src_->solution(index_), ctx_.law(), s, ctx_.free_params().xi_min);
    if (!sol_) sol_ = solve(ctx_.even().datum_ptr(), t_, cfg_.wild_tol, cfg_.wild);
    return chi_s(*sol_, ctx_.law(), s, ctx_.free_params().xi_min);
  }

 private:
  const BoundContext& ctx_;
  double t_;
  const TheoremCheckConfig& cfg_;
  std::size_t index_;
  const MeasurementSource* src_;
  std::optional<SimulationBatch> batch_;
  std::optional<MetricResult> K_;
  std::optional<WildSolution> sol_;
};

/// Time bounds over cfg.ts. Expectation forms produce one report per moment
/// source; refused hypotheses produce an inapplicable report naming them.
inline std::vector<BoundReport> check_theorems(const BoundContext& ctx,
                                               std::span<const BoundId> ids,
                                               const TheoremCheckConfig& cfg,
                                               const MeasurementSource* src = nullptr) {
  std::vector<BoundReport> out;
  std::optional<double> chi0;
  for (std::size_t k = 0; k < cfg.ts.size(); ++k) {
    const double t = cfg.ts[k];
    TimeMeasurements meas(ctx, t, cfg, k, src);
    for (BoundId id : ids) {
      const auto& info = bound_info(id);
      detail::require(!info.deterministic, "check_theorems: " + bound_name(id) + " is not a time bound");
      std::vector<bool> sources;  // true: Monte Carlo moments
      if (info.expectation) {
        if (cfg.analytic_moments) sources.push_back(false);
        if (cfg.monte_carlo_moments) sources.push_back(true);
      } else {
        sources.push_back(false);
      }
      for (bool mc : sources) {
        BoundReport r;
        r.id = id;
        r.datum = ctx.datum().name();
        r.t = t;
        r.rhs_source = mc ? "monte_carlo" : "analytic";
        try {
          if (id == BoundId::F5_eq11 && !chi0) {
            detail::require_positive_a0(ctx, bound_name(id));
            chi0 = measured_chi0(ctx, bound_order(ctx, id));
          }
          const auto lw = mc ? LargestWeight::monte_carlo(meas.batch())
                             : LargestWeight::analytic(t, ctx.p(), ctx.sigma(), ctx.free_params().q);
          r.rhs = theorem_rhs(ctx, id, t, lw, chi0);
          const auto m = info.metric == BoundMetric::kolmogorov ? meas.kolmogorov()
                                                                : meas.chi(bound_order(ctx, id));
          r.lhs = {m.value, m.band, m.source};
          finish_report(r);
        } catch (const hypothesis_error& e) {
          mark_inapplicable(r, e);
        }
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace kacrelax
