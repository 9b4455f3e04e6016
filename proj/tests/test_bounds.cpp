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
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "kacrelax/bounds.hpp"

using namespace kacrelax;

namespace {

std::shared_ptr<const EvenPart> even_of(DatumPtr d) { return std::make_shared<const EvenPart>(d); }

const std::shared_ptr<const EvenPart>& pareto1() {
  static const auto e = even_of(make_symmetric_pareto(1.0, 1.0));
  return e;
}

const std::shared_ptr<const EvenPart>& pareto15() {
  static const auto e = even_of(make_symmetric_pareto(1.5, 1.0));
  return e;
}

FreeParams with_delta(double delta) {
  FreeParams fp;
  fp.delta = delta;
  return fp;
}

double fitted_slope(const std::function<double(double)>& f, double t0, double t1) {
  return (std::log(f(t1)) - std::log(f(t0))) / (t1 - t0);
}

}  // namespace

TEST(BoundIds, RoundTrip) {
  for (const auto& b : kBounds) EXPECT_EQ(parse_bound_id(b.name), b.id);
  EXPECT_THROW(parse_bound_id("Thm10"), domain_error);
}

TEST(Weights, EqualWeightsNormalised) {
  for (double a : {0.8, 1.0, 1.5})
    for (std::size_t n : {1u, 3u, 16u}) {
      const auto q = equal_weights(n, a);
      EXPECT_NEAR(detail::power_sum(q, a), 1.0, 1e-13);
    }
}

TEST(Weights, TreeWeightsNormalised) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto s = sample_tree_sample(1 + i % 9, 1.0, rng);
    const auto q = weights_from_tree(s, 1.0);
    EXPECT_NEAR(detail::power_sum(q, 1.0), 1.0, 1e-12);
  }
}

TEST(Weights, UnnormalisedRefused) {
  const BoundContext ctx(pareto1());
  const std::vector<double> q{0.5, 0.6};
  EXPECT_THROW(prop_rhs(ctx, BoundId::Prop1, q), domain_error);
}

TEST(Context, DerivedConstants) {
  const BoundContext ctx(pareto1());
  EXPECT_GT(ctx.d(), 0.0);
  EXPECT_LT(ctx.d(), 1.0);
  EXPECT_NEAR(ctx.d1(), 3.0 / (8.0 * ctx.M()), 1e-14);
  EXPECT_NEAR(ctx.dTilde(), 3.0 * ctx.d() / (8.0 * ctx.M()), 1e-14);
  // default sigma = (1 - 2A_4) / (4 alpha) / 2 = 1/32 at p = 1 (A_4 = 3/8)
  EXPECT_NEAR(ctx.sigma(), 1.0 / 32.0, 1e-14);
  EXPECT_NEAR(ctx.split_rate(), 0.25 - 4.0 / 64.0, 1e-14);
}

TEST(Context, ConfiguredDOutsideAdmissibleRangeRefused) {
  FreeParams fp;
  fp.d = 0.999;
  EXPECT_THROW(BoundContext(pareto1(), {}, fp), hypothesis_error);
}

TEST(Context, JbarMatchesQuadratureAndIsMonotone) {
  const BoundContext ctx(pareto1());
  const auto& ev = ctx.even();
  const double b = ctx.a0() - ctx.eta();
  for (double q : {1.0, 0.3, 0.01}) {
    // vbar evaluated point by point and integrated numerically (alpha = 1)
    auto f = [&](double xi) {
      const double v = ev.v0_star_bar(xi * q);
      return v * (1.0 + 2.0 * xi * v) * std::exp(-b * xi);
    };
    const auto& g = ev.envelope_nodes();
    std::vector<double> breaks{0.0};
    for (double x : g)
      if (x / q < 60.0 / b) breaks.push_back(x / q);
    breaks.push_back(80.0 / b);
    const double ref = quad::integrate_panels(f, breaks, 1e-10).value;
    EXPECT_NEAR(ctx.jbar_exact(q), ref, 1e-6 * ref + 1e-12) << q;
  }
  double prev = 0.0;
  for (int k = 80; k >= 0; --k) {
    const double j = ctx.Jbar(std::pow(2.0, -k / 8.0));
    EXPECT_GE(j, prev - 1e-15);
    EXPECT_GE(j, ctx.jbar_exact(std::pow(2.0, -k / 8.0)) - 1e-15);
    prev = j;
  }
}

TEST(LargestWeightTest, AnalyticMatchesSurrogates) {
  const auto w = LargestWeight::analytic(3.0, 1.0, 1.0 / 16.0, 4.0);
  EXPECT_NEAR(w.power(1.0).value,
              std::min(1.0, beta_max_moment_bound(3.0, 1.0, 1.0, 1.0 / 16.0, 4.0)), 1e-15);
  const auto late = LargestWeight::analytic(40.0, 1.0, 1.0 / 16.0, 4.0);
  EXPECT_NEAR(late.power(2.0).value, beta_max_moment_bound(40.0, 1.0, 2.0, 1.0 / 16.0, 4.0), 1e-15);
  EXPECT_NEAR(w.tail(0.5).value, std::min(1.0, beta_max_tail_bound(3.0, 1.0, 0.5, 4.0)), 1e-15);
  EXPECT_EQ(w.tail(1.0).value, 0.0);
}

TEST(LargestWeightTest, AnalyticDominatesMonteCarlo) {
  BatchConfig bc;
  bc.t = 2.0;
  bc.p = 1.0;
  bc.replicates = 20000;
  bc.seed = 11;
  const auto mc = LargestWeight::monte_carlo(run_batch(bc, nullptr));
  const auto an = LargestWeight::analytic(2.0, 1.0, 1.0 / 16.0, 4.0);
  for (double m : {0.5, 1.0, 2.0})
    EXPECT_LE(mc.power(m).value - 3.0 * mc.power(m).se, an.power(m).value) << m;
  for (double x : {0.3, 0.6, 0.9})
    EXPECT_LE(mc.tail(x).value - 3.0 * mc.tail(x).se, an.tail(x).value) << x;
}

TEST(Hypotheses, TwoPointRefusedEverywhere) {
  const BoundContext ctx(even_of(make_two_point()), {}, with_delta(0.5));
  const auto lw = LargestWeight::analytic(1.0, 1.0, 1.0 / 16.0, 4.0);
  for (const auto& b : kBounds) {
    if (b.deterministic) continue;
    EXPECT_THROW(theorem_rhs(ctx, b.id, 1.0, lw, 0.1), hypothesis_error) << b.name;
  }
  const auto q = equal_weights(4, 1.0);
  EXPECT_THROW(prop_rhs(ctx, BoundId::Prop1, q), hypothesis_error);
}

TEST(Hypotheses, RhoBelowMeasuredRefused) {
  FreeParams fp = with_delta(1.0);
  fp.rho = 0.0;
  const BoundContext ctx(pareto1(), {}, fp);
  EXPECT_THROW(exponential_terms(ctx, BoundId::Thm3_lowdelta), hypothesis_error);
  fp.rho = 1e6;
  const BoundContext ok(pareto1(), {}, fp);
  EXPECT_NO_THROW(exponential_terms(ok, BoundId::Thm3_lowdelta));
}

TEST(Hypotheses, DeltaRanges) {
  const BoundContext none(pareto1());
  EXPECT_THROW(exponential_terms(none, BoundId::Thm3_lowdelta), hypothesis_error);
  const BoundContext big(pareto1(), {}, with_delta(1.5));
  EXPECT_THROW(exponential_terms(big, BoundId::Thm3_lowdelta), hypothesis_error);
  EXPECT_NO_THROW(exponential_terms(big, BoundId::Thm3_highdelta));
  // Thm7 needs delta in (0, 2 - alpha) = (0, 1) at alpha = 1
  const BoundContext seven(pareto1(), {}, with_delta(1.0));
  EXPECT_THROW(exponential_terms(seven, BoundId::Thm7), hypothesis_error);
}

TEST(Hypotheses, Prop5NeedsAlphaAtLeastOne) {
  const BoundContext ctx(even_of(make_symmetric_pareto(0.8, 1.0)));
  const auto q = equal_weights(4, 0.8);
  EXPECT_THROW(prop_rhs(ctx, BoundId::Prop5, q), hypothesis_error);
}

TEST(Hypotheses, Thm7AcceptsSmallDeltaAtAlphaOne) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.25));
  EXPECT_NO_THROW(exponential_terms(ctx, BoundId::Thm7));
}

TEST(Hypotheses, AsymmetricDatumRefusedByPropositions) {
  const BoundContext ctx(even_of(make_asymmetric_shift(make_symmetric_pareto(1.0, 1.0), 0.1)));
  const auto q = equal_weights(4, 1.0);
  EXPECT_THROW(prop_rhs(ctx, BoundId::Prop3, q), hypothesis_error);
  const std::vector<double> xi{0.5};
  const auto r = check_lemma1(ctx, BoundId::Lemma1_eq22, q, xi);
  EXPECT_EQ(r[0].verdict, Verdict::inapplicable);
  EXPECT_FALSE(r[0].note.empty());
}

TEST(ExpTerms, EachTermIsLogLinear) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.5));
  for (BoundId id : {BoundId::Thm3_lowdelta, BoundId::Thm5, BoundId::Thm7, BoundId::Thm9}) {
    for (const auto& term : exponential_terms(ctx, id)) {
      if (term.coef == 0.0) continue;
      const double slope = fitted_slope([&](double t) { return term.at(t); }, 1.0, 7.0);
      EXPECT_NEAR(slope, -term.rate, 1e-10) << bound_name(id) << " " << term.label;
    }
  }
}

TEST(ExpTerms, Thm3DominantRateAtPOneDeltaOne) {
  const BoundContext ctx(pareto1(), {}, with_delta(1.0));
  const auto terms = exponential_terms(ctx, BoundId::Thm3_lowdelta);
  double slowest = 1e9;
  for (const auto& term : terms)
    if (term.coef > 0.0) slowest = std::min(slowest, term.rate);
  EXPECT_NEAR(slowest, 0.25, 1e-12);
  auto total = [&](double t) {
    double s = 0.0;
    for (const auto& term : terms) s += term.at(t);
    return s;
  };
  EXPECT_NEAR(fitted_slope(total, 150.0, 200.0), -0.25, 1e-3);
}

TEST(ExpTerms, Thm5RateVanishesWithDelta) {
  double prev = 1e9;
  for (double dl : {0.5, 0.1, 0.01, 1e-4}) {
    const double r = rate(2.0 + 2.0 * dl);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1e-3);
  const BoundContext ctx(pareto1(), {}, with_delta(0.01));
  bool found = false;
  for (const auto& term : exponential_terms(ctx, BoundId::Thm5))
    if (term.label == "rho") {
      EXPECT_NEAR(term.rate, rate(2.02), 1e-15);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(ExpTerms, F5NeedsChi0) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.5));
  EXPECT_THROW(exponential_terms(ctx, BoundId::F5_eq11), structural_error);
  const auto t = exponential_terms(ctx, BoundId::F5_eq11, 0.3);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0].rate, rate(3.0), 1e-15);
}

TEST(Lemma1, HoldsForEqualWeights) {
  for (const auto& ev : {pareto1(), pareto15()}) {
    const BoundContext ctx(ev);
    std::vector<double> xis;
    for (int k = -8; k <= 12; ++k) xis.push_back(std::pow(2.0, k / 2.0));
    for (std::size_t n : {2u, 4u, 8u}) {
      const auto q = equal_weights(n, ev->alpha());
      for (BoundId id : {BoundId::Lemma1_eq22, BoundId::Lemma1_eq23})
        for (const auto& r : check_lemma1(ctx, id, q, xis))
          EXPECT_NE(r.verdict, Verdict::violated)
              << bound_name(id) << " n=" << n << " xi=" << r.xi << " lhs=" << r.lhs.value
              << " rhs=" << r.rhs.value;
    }
  }
}

TEST(Lemma1, OuterBranchAtLeastTwo) {
  // beyond D_n, |phi_n - g| <= 2 is trivial; the bound must exceed it
  const BoundContext ctx(pareto1());
  const auto q = equal_weights(4, 1.0);
  for (BoundId id : {BoundId::Lemma1_eq22, BoundId::Lemma1_eq23})
    for (double xi : {1e3, 1e5}) EXPECT_GE(lemma1_rhs(ctx, id, q, xi), 2.0) << bound_name(id);
}

TEST(Propositions, ChiBoundsHold) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.5));
  const BoundContext hi(pareto1(), {}, with_delta(1.5));
  std::vector<std::vector<double>> qs{equal_weights(2, 1.0), equal_weights(8, 1.0)};
  for (const auto& r : check_propositions(ctx, BoundId::Prop1, qs)) EXPECT_EQ(r.verdict, Verdict::holds);
  for (const auto& r : check_propositions(ctx, BoundId::Prop2_lowdelta, qs))
    EXPECT_EQ(r.verdict, Verdict::holds) << r.note;
  for (const auto& r : check_propositions(hi, BoundId::Prop2_highdelta, qs))
    EXPECT_EQ(r.verdict, Verdict::holds) << r.note;
}

TEST(Propositions, Prop2HighBranchExcludesAlpha) {
  FreeParams fp = with_delta(1.0);
  fp.rho = 2.0;
  const BoundContext ctx(pareto1(), {}, fp);
  const auto q = equal_weights(4, 1.0);
  const double lo = prop_rhs(ctx, BoundId::Prop2_lowdelta, q);
  EXPECT_GT(lo, 0.0);
  EXPECT_THROW(prop_rhs(ctx, BoundId::Prop2_highdelta, q), hypothesis_error);
}

TEST(Propositions, KolmogorovBoundsHold) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.5));
  std::vector<std::vector<double>> qs{equal_weights(4, 1.0), equal_weights(16, 1.0)};
  for (BoundId id : {BoundId::Prop3, BoundId::Prop4, BoundId::Prop5, BoundId::Prop6})
    for (const auto& r : check_propositions(ctx, id, qs))
      EXPECT_EQ(r.verdict, Verdict::holds) << bound_name(id) << " " << r.note;
}

TEST(Propositions, Prop6NotWeakerThanProp5InB3Term) {
  const BoundContext ctx(pareto1());
  const auto& B = ctx.composite();
  EXPECT_GT(B.B3, 0.0);
  EXPECT_GT(B.Bbar3, 0.0);
  const auto q = equal_weights(8, 1.0);
  EXPECT_TRUE(std::isfinite(prop_rhs(ctx, BoundId::Prop5, q)));
  EXPECT_TRUE(std::isfinite(prop_rhs(ctx, BoundId::Prop6, q)));
}

TEST(Propositions, DecreaseWithN) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.5));
  for (BoundId id : {BoundId::Prop2_lowdelta, BoundId::Prop4, BoundId::Prop5}) {
    double prev = 1e300;
    for (std::size_t n : {4u, 16u, 64u, 256u}) {
      const double v = prop_rhs(ctx, id, equal_weights(n, 1.0));
      EXPECT_LT(v, prev) << bound_name(id) << " n=" << n;
      prev = v;
    }
  }
}

TEST(Theorems, StableDatumHasNegligibleDistance) {
  const BoundContext ctx(even_of(make_stable_datum(1.0, 1.0)), {}, with_delta(0.5));
  TheoremCheckConfig cfg;
  cfg.ts = {1.0};
  cfg.replicates = 4000;
  cfg.monte_carlo_moments = false;
  const std::vector<BoundId> ids{BoundId::Thm4, BoundId::Thm2};
  for (const auto& r : check_theorems(ctx, ids, cfg)) {
    EXPECT_NE(r.verdict, Verdict::violated) << bound_name(r.id);
    EXPECT_LT(r.lhs.value, bound_info(r.id).metric == BoundMetric::kolmogorov ? 0.05 : 1e-5)
        << bound_name(r.id);
  }
}

TEST(Theorems, ParetoChecksHold) {
  const BoundContext ctx(pareto1(), {}, with_delta(0.5));
  TheoremCheckConfig cfg;
  cfg.ts = {1.0, 3.0};
  cfg.replicates = 5000;
  const std::vector<BoundId> ids{BoundId::Thm4,     BoundId::Thm4_exp, BoundId::Thm5,
                                 BoundId::Thm6,     BoundId::Thm6_exp, BoundId::Thm7,
                                 BoundId::Thm8,     BoundId::Thm8_exp, BoundId::Thm9,
                                 BoundId::Thm2,     BoundId::eq19,     BoundId::Thm3_lowdelta,
                                 BoundId::F5_eq11};
  const auto rs = check_theorems(ctx, ids, cfg);
  for (const auto& r : rs) {
    EXPECT_NE(r.verdict, Verdict::inapplicable) << bound_name(r.id) << " " << r.note;
    EXPECT_TRUE(r.verdict == Verdict::holds || r.verdict == Verdict::holds_within_band)
        << bound_name(r.id) << " t=" << r.t << " " << r.rhs_source << " lhs=" << r.lhs.value
        << " rhs=" << r.rhs.value << " " << r.note;
  }
  EXPECT_FALSE(any_violated(rs));
}

TEST(Theorems, MonteCarloAndAnalyticExpectationsAgreeInOrder) {
  const BoundContext ctx(pareto1());
  BatchConfig bc;
  bc.t = 4.0;
  bc.p = 1.0;
  bc.replicates = 5000;
  bc.seed = 3;
  const auto mc = LargestWeight::monte_carlo(run_batch(bc, nullptr));
  const auto an = LargestWeight::analytic(4.0, 1.0, ctx.sigma(), 4.0);
  const double a = theorem_rhs(ctx, BoundId::Thm4, 4.0, an).value;
  const double m = theorem_rhs(ctx, BoundId::Thm4, 4.0, mc).value;
  EXPECT_LE(m, a * (1.0 + 1e-9));
  EXPECT_THROW(theorem_rhs(ctx, BoundId::Thm4, 5.0, mc), structural_error);
}

TEST(Verdicts, Classification) {
  EXPECT_EQ(classify(1.0, 0.0, 1.0, 0.0), Verdict::holds);
  EXPECT_EQ(classify(1.1, 0.05, 1.0, 0.0), Verdict::holds_within_band);
  EXPECT_EQ(classify(1.2, 0.01, 1.0, 0.01), Verdict::violated);
}
