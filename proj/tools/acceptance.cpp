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


// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Tolerances are pinned below.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kacrelax/bounds.hpp"
#include "kacrelax/experiment.hpp"

using namespace kacrelax;

namespace {

constexpr double kPi = std::numbers::pi;

// pinned tolerances
constexpr double kIdentityTol = 1e-12;
constexpr double kMomentSE = 4.0;
constexpr double kTailSE = 3.0;
constexpr double kARel = 1e-10;
constexpr double kNRel = 1e-8;
constexpr double kFixedPointTol = 1e-9;
constexpr double kSolverTol = 1e-6;
constexpr double kSolverSlack = 1e-8;
constexpr double kKAtEight = 0.02;
constexpr double kTwoPointMass = 0.05;
constexpr double kSlopeTarget = -0.25;
constexpr double kSlopeFitTol = 0.20;
constexpr double kKsCritical = 1.628;  // sqrt(n) K at the 1% level
constexpr double kCauchyTol = 1e-8;
constexpr double kSuiteBudget = 900.0;

constexpr std::size_t kReplicates = 100000;
constexpr std::size_t kTwoPointReplicates = 20000;

const std::vector<double> kTimes{0.5, 1.0, 2.0, 4.0, 8.0};
const std::vector<double> kPs{0.5, 1.0, 3.0};

struct Line {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Line> g_lines;

void report(int id, bool pass, const std::string& detail) {
  g_lines.push_back({id, pass, detail});
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g(double x) { return fmt("%.3g", x); }

std::shared_ptr<const EvenPart> even_of(DatumPtr d) { return std::make_shared<const EvenPart>(d); }

DatumPtr pareto_alpha1() { return make_symmetric_pareto(1.0, 1.0); }  // a0 = pi/2

// p = 1 batches (Pareto datum), kept for the later criteria.
std::map<double, SimulationBatch> g_p1;

void weights_and_moments() {
  double worst_identity = 0.0;
  std::size_t moment_fail = 0, moment_checks = 0, tail_fail = 0, tail_checks = 0;
  std::string worst_moment;
  double worst_z = 0.0;
  const auto pareto = pareto_alpha1();
  std::uint64_t seed = 1000;
  for (double p : kPs) {
    const double a = 2.0 / (1.0 + p);
    const std::vector<double> orders{0.0, a, 1.0, 2.0, 2.0 * a};
    for (double t : kTimes) {
      BatchConfig bc;
      bc.t = t;
      bc.p = p;
      bc.replicates = kReplicates;
      bc.seed = ++seed;
      bc.moment_orders = orders;
      auto b = run_batch(bc, p == 1.0 ? pareto.get() : nullptr);
      for (const auto& r : b.replicates) worst_identity = std::max(worst_identity, r.identity_error);
      for (std::size_t i = 0; i < orders.size(); ++i) {
        std::vector<double> xs(b.replicates.size());
        for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = b.replicates[k].moments[i];
        const auto est = mean_and_stderr(xs);
        const double exact = weight_moment_exact(t, p, orders[i]);
        const double dev = std::abs(est.mean - exact);
        const double z = est.se > 0 ? dev / est.se : 0.0;
        ++moment_checks;
        if (dev > kMomentSE * est.se + kIdentityTol * exact) {
          ++moment_fail;
          worst_moment = "p=" + g(p) + " t=" + g(t) + " m=" + g(orders[i]);
        }
        if (dev > kIdentityTol * exact && z > worst_z) worst_z = z;
      }
      const double n = static_cast<double>(b.replicates.size());
      for (double x : {0.1, 0.3, 0.5}) {
        double hits = 0.0;
        for (const auto& r : b.replicates) hits += r.beta_max > x ? 1.0 : 0.0;
        const double pe = hits / n, se = std::sqrt(pe * (1.0 - pe) / n);
        for (double q : {3.0, 4.0, 6.0}) {
          ++tail_checks;
          const double bound = std::min(1.0, beta_max_tail_bound(t, p, x, q));
          if (pe > bound + kTailSE * se) ++tail_fail;
        }
      }
      if (p == 1.0) g_p1.emplace(t, std::move(b));
    }
  }
  report(1, worst_identity <= kIdentityTol,
         "max |sum |beta|^alpha - 1| = " + g(worst_identity) + " over 15 x 1e5 trees");
  report(2, moment_fail == 0,
         std::to_string(moment_checks - moment_fail) + "/" + std::to_string(moment_checks) +
             " moments within 4 SE (largest |z| = " + g(worst_z) + ")" +
             (moment_fail ? ", worst " + worst_moment : ""));
  report(3, tail_fail == 0,
         std::to_string(tail_checks - tail_fail) + "/" + std::to_string(tail_checks) +
             " tail probabilities below bound + 3 SE");
}

void closed_forms() {
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  double worst_a = 0.0, worst_n = 0.0;
  for (double m = 0.0; m <= 8.0 + 1e-12; m += 0.25) {
    const double ref = ts.integrate([m](double x) { return std::pow(std::sin(x), m); }, 0.0, kPi) / kPi;
    worst_a = std::max(worst_a, std::abs(compute_A(m) - ref) / ref);
  }
  for (double p : kPs) {
    const auto prm = ModelParams::make(p, 1.3, 0.4);
    const double a = prm.alpha(), b = prm.a0 - prm.eta;
    for (double l : {0.25 * a, 0.5 * a, a, 1.5 * a, 2.0 * a, 3.0 * a, 4.0 * a}) {
      const double ref = es.integrate(
          [&](double x) {
            const double e = std::isfinite(x) ? std::exp(-b * std::pow(x, a)) : 0.0;
            return e == 0.0 ? 0.0 : e * std::pow(x, l - 1.0);
          });
      worst_n = std::max(worst_n, std::abs(compute_Nl(l, prm) - ref) / ref);
    }
  }
  report(4, worst_a <= kARel && worst_n <= kNRel,
         "A_m rel err " + g(worst_a) + " (m <= 8), N_l rel err " + g(worst_n) + " (l <= 4 alpha)");
}

void fixed_point() {
  double worst_fp = 0.0, worst_solve = 0.0;
  for (double p : kPs) {
    const double a = 2.0 / (1.0 + p);
    const StableLaw law(a, 1.0);
    const auto q = GridFunction::characteristic(default_grid(a, 1.0), [&](double xi) { return law.cf(xi); });
    const auto prod = wild_product(q, q, 256);
    const Grid& gr = q.grid();
    for (std::size_t k = 0; k < gr.nodes; ++k)
      worst_fp = std::max(worst_fp, std::abs(prod.values()[k] - q.values()[k]));
    const auto datum = make_stable_datum(a, 1.0);
    for (double t : {1.0, 2.0, 4.0}) {
      const auto sol = solve(datum, t, kSolverTol);
      const Grid& sg = sol.re.grid();
      for (std::size_t k = 0; k < sg.nodes; ++k)
        worst_solve = std::max(worst_solve, std::abs(sol(sg.xi(k)) - law.cf(sg.xi(k))));
    }
  }
  report(5, worst_fp <= kFixedPointTol && worst_solve <= kSolverTol + kSolverSlack,
         "Wild product residual " + g(worst_fp) + " (K=256), stable solve deviation " + g(worst_solve) +
             " (t <= 4)");
}

void representation() {
  const auto datum = pareto_alpha1();
  std::vector<double> xis;
  for (int k = 1; k <= 32; ++k) xis.push_back(0.1 * k);
  bool ok = true;
  std::string detail;
  for (double t : {1.0, 2.0}) {
    const auto sol = solve(datum, t, kSolverTol);
    const auto cv = cross_validate(sol, g_p1.at(t), xis);
    ok = ok && cv.consistent();
    detail += "t=" + g(t) + ": " + g(cv.discrepancy) + " <= " + g(cv.band) + "; ";
  }
  report(6, ok, detail);
}

void convergence() {
  const StableLaw law(1.0, kPi / 2.0);
  std::vector<double> K;
  std::string ks;
  for (double t : kTimes) {
    K.push_back(kolmogorov_empirical(g_p1.at(t).values(), law).value);
    ks += g(K.back()) + " ";
  }
  const double band = 1.36 / std::sqrt(static_cast<double>(kReplicates));
  bool decreasing = true;
  for (std::size_t i = 1; i < K.size(); ++i) decreasing = decreasing && K[i] <= K[i - 1] + band;
  const bool pareto_ok = decreasing && K.back() < kKAtEight;

  const auto two = make_two_point(1.0);
  std::vector<double> mass;
  std::string ms;
  for (double t : {2.0, 4.0, 8.0}) {
    BatchConfig bc;
    bc.t = t;
    bc.p = 1.0;
    bc.replicates = kTwoPointReplicates;
    bc.seed = 7000 + static_cast<std::uint64_t>(t);
    const auto v = run_batch(bc, two.get()).values();
    double out = 0.0;
    for (double x : v) out += std::abs(x) > 0.25 ? 1.0 : 0.0;
    mass.push_back(out / static_cast<double>(v.size()));
    ms += g(mass.back()) + " ";
  }
  const bool two_ok = mass.back() <= kTwoPointMass;
  report(7, pareto_ok && two_ok,
         "Pareto K(t=0.5..8) = " + ks + (pareto_ok ? "(ok)" : "(fails)") +
             "; two-point P(|V|>0.25) at t=2,4,8 (p=1) = " + ms + (two_ok ? "(ok)" : "(above 0.05)"));
}

void chi_decay() {
  FreeParams fp;
  fp.delta = 1.0;
  const BoundContext ctx(even_of(pareto_alpha1()), {}, fp);
  const double chi0 = measured_chi0(ctx, 2.0);
  std::vector<double> ts{0.5, 1.0, 2.0, 4.0}, logs;
  bool below = true;
  std::string detail;
  const auto lw = LargestWeight::analytic(1.0, 1.0, ctx.sigma(), 4.0);
  for (double t : ts) {
    const auto sol = solve(ctx.even().datum_ptr(), t, kSolverTol);
    const double chi = chi_s(sol, ctx.law(), 2.0, fp.xi_min).value;
    const double thm3 = theorem_rhs(ctx, BoundId::Thm3_lowdelta, t, lw).value;
    const double f5 = theorem_rhs(ctx, BoundId::F5_eq11, t, lw, chi0).value;
    below = below && chi <= thm3 && chi <= f5;
    logs.push_back(std::log(chi));
    detail += g(chi) + " ";
  }
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) mt += ts[i] / ts.size(), ml += logs[i] / ts.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) sxy += (ts[i] - mt) * (logs[i] - ml), sxx += (ts[i] - mt) * (ts[i] - mt);
  const double slope = sxy / sxx;
  const bool fast = slope <= kSlopeTarget * (1.0 - kSlopeFitTol);
  report(8, below && fast,
         "chi_2 at t=0.5,1,2,4: " + detail + (below ? "(below Thm3_lowdelta and F5_eq11 RHS)" : "(exceeds a RHS)") +
             "; fitted log slope " + fmt("%.4f", slope) + " vs -1/4");
}

void theorems() {
  FreeParams fp;
  fp.delta = 0.5;
  const BoundContext ctx(even_of(pareto_alpha1()), {}, fp);
  TheoremCheckConfig cfg;
  cfg.ts = {1.0, 2.0, 4.0};
  MeasurementSource src{[&](std::size_t i) -> const SimulationBatch& { return g_p1.at(cfg.ts[i]); }, {}};
  const std::vector<BoundId> ids{BoundId::Thm4, BoundId::Thm4_exp, BoundId::Thm5,
                                 BoundId::Thm6, BoundId::Thm6_exp, BoundId::Thm7,
                                 BoundId::Thm8, BoundId::Thm8_exp, BoundId::Thm9};
  const auto rs = check_theorems(ctx, ids, cfg, &src);
  std::size_t good = 0;
  for (const auto& r : rs)
    good += r.verdict == Verdict::holds || r.verdict == Verdict::holds_within_band;

  // guards: (datum, theorem) pairs that must be refused
  std::size_t fired = 0, expected = 0;
  auto expect_refusal = [&](const BoundContext& c, BoundId id) {
    ++expected;
    try {
      theorem_rhs(c, id, 1.0, LargestWeight::analytic(1.0, c.p(), c.sigma() > 0 ? c.sigma() : 0.01, 4.0));
    } catch (const hypothesis_error&) {
      ++fired;
    }
  };
  const BoundContext two(even_of(make_two_point(1.0)), {}, fp);
  for (BoundId id : ids) expect_refusal(two, id);
  const BoundContext heavy(even_of(make_symmetric_pareto(0.5, 1.0)), {}, fp);
  for (BoundId id : {BoundId::Thm6, BoundId::Thm6_exp, BoundId::Thm7}) expect_refusal(heavy, id);
  FreeParams wide = fp;
  wide.delta = 1.0;
  const BoundContext edge(even_of(pareto_alpha1()), {}, wide);
  for (BoundId id : {BoundId::Thm7, BoundId::Thm9}) expect_refusal(edge, id);
  FreeParams nonmono;
  nonmono.D = 1.0;
  nonmono.delta = 0.2;
  const BoundContext stable15(even_of(make_stable_datum(1.5, 1.0)), {}, nonmono);
  for (BoundId id : {BoundId::Thm8, BoundId::Thm8_exp, BoundId::Thm9}) expect_refusal(stable15, id);

  report(9, good == rs.size() && fired == expected,
         std::to_string(good) + "/" + std::to_string(rs.size()) +
             " Thm4..Thm9 reports hold (t=1,2,4, analytic and MC moments); guards fired " +
             std::to_string(fired) + "/" + std::to_string(expected));
}

void propositions() {
  std::vector<std::vector<double>> w1;
  for (std::size_t n : {2, 4, 8, 16, 64}) w1.push_back(equal_weights(n, 1.0));
  Rng rng(stream_seed(42, 0));
  for (std::size_t n : {3, 5, 9, 17, 33}) w1.push_back(weights_from_tree(sample_tree_sample(n, 1.0, rng), 1.0));

  std::size_t total = 0, good = 0, refused = 0, refused_expected = 0;
  auto tally = [&](const std::vector<BoundReport>& rs) {
    for (const auto& r : rs) {
      ++total;
      good += r.verdict == Verdict::holds;
    }
  };
  FreeParams lowp;
  lowp.delta = 0.5;
  FreeParams highp;
  highp.delta = 1.5;
  const BoundContext low(even_of(pareto_alpha1()), {}, lowp);
  const BoundContext high(even_of(pareto_alpha1()), {}, highp);
  for (BoundId id : {BoundId::Prop1, BoundId::Prop2_lowdelta, BoundId::Prop3, BoundId::Prop4,
                     BoundId::Prop5, BoundId::Prop6})
    tally(check_propositions(low, id, w1));
  tally(check_propositions(high, BoundId::Prop2_highdelta, w1));
  std::vector<double> xis{0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0};
  for (const auto& q : w1)
    for (BoundId id : {BoundId::Lemma1_eq22, BoundId::Lemma1_eq23}) tally(check_lemma1(low, id, q, xis));

  // hypothesis splits: Prop5 needs alpha >= 1, Prop6 a monotone S*
  auto expect_refused = [&](const std::vector<BoundReport>& rs) {
    for (const auto& r : rs) {
      ++refused_expected;
      refused += r.verdict == Verdict::inapplicable;
    }
  };
  const BoundContext heavy(even_of(make_symmetric_pareto(0.5, 1.0)), {}, lowp);
  expect_refused(check_propositions(heavy, BoundId::Prop5, {equal_weights(4, 0.5)}));
  FreeParams nonmono;
  nonmono.D = 1.0;
  const BoundContext stable15(even_of(make_stable_datum(1.5, 1.0)), {}, nonmono);
  const std::vector<std::vector<double>> w15{equal_weights(4, 1.5), equal_weights(16, 1.5)};
  expect_refused(check_propositions(stable15, BoundId::Prop6, w15));
  tally(check_propositions(stable15, BoundId::Prop5, w15));
  tally(check_propositions(heavy, BoundId::Prop6, {equal_weights(4, 0.5)}));

  report(10, good == total && refused == refused_expected,
         std::to_string(good) + "/" + std::to_string(total) +
             " Lemma1/Prop1..Prop6 checks hold (equal and tree weights, both Prop2 branches); "
             "Prop5/Prop6 refusals " +
             std::to_string(refused) + "/" + std::to_string(refused_expected));
}

void stable_toolbox() {
  double worst = 0.0;
  for (double a : {0.5, 1.0, 1.5}) {
    const StableLaw law(a, 1.0);
    for (std::uint64_t seed : {101u, 202u, 303u}) {
      Rng rng(seed);
      std::vector<double> xs(kReplicates);
      for (auto& x : xs) x = law.sample(rng);
      const double K = kolmogorov_empirical(xs, [&](double x) { return law.cdf(x); }).value;
      worst = std::max(worst, std::sqrt(static_cast<double>(kReplicates)) * K);
    }
  }
  const StableLaw cauchy(1.0, 1.0);
  const double e1 = std::abs(cauchy.pdf(0.0) - 1.0 / kPi), e2 = std::abs(cauchy.cdf(1.0) - 0.75);
  report(11, worst <= kKsCritical && e1 <= kCauchyTol && e2 <= kCauchyTol,
         "max sqrt(n) K = " + fmt("%.3f", worst) + " (alpha 0.5,1,1.5 x 3 seeds); Cauchy pdf(0) err " +
             g(e1) + ", cdf(1) err " + g(e2));
}

bool same_files(const std::filesystem::path& a, const std::filesystem::path& b, std::string& why) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(a)) {
    const auto name = e.path().filename();
    if (name == "manifest.json") continue;
    std::ifstream fa(e.path(), std::ios::binary), fb(b / name, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (!fb || sa.str() != sb.str()) {
      why = name.string();
      return false;
    }
    ++n;
  }
  return n > 0;
}

void reproducibility(double elapsed_before) {
  ExperimentConfig cfg;
  cfg.name = "repro";
  cfg.p = 1.0;
  cfg.a0 = kPi / 2.0;
  cfg.t = {0.0, 1.0, 2.0};
  cfg.replicates = 4000;
  cfg.seed = 99;
  cfg.moments = {1.0, 2.0};
  cfg.s_list = {1.0};
  cfg.bounds.ids = {BoundId::Thm4, BoundId::Thm3_lowdelta, BoundId::Prop3, BoundId::Lemma1_eq22};
  cfg.bounds.free.delta = 0.5;
  cfg.bounds.equal_n = {4};
  cfg.bounds.tree_sizes = {5};
  const auto root = std::filesystem::temp_directory_path() / ("kacrelax_accept_" + std::to_string(::getpid()));
  run_stage(Stage::all, cfg, root / "a", 1);
  run_stage(Stage::all, cfg, root / "b", 1);
  run_stage(Stage::all, cfg, root / "c", 2);
  std::string why1, why2;
  const bool same = same_files(root / "a", root / "b", why1);
  const bool workers = same_files(root / "a", root / "c", why2);
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  report(12, same && workers && elapsed_before <= kSuiteBudget,
         std::string("two runs ") + (same ? "byte-identical" : "differ in " + why1) + ", 1 vs 2 workers " +
             (workers ? "byte-identical" : "differ in " + why2) + "; acceptance wall clock " +
             fmt("%.0f", elapsed_before) + " s (budget 900 s for the suite)");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  auto step = [&](auto&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << std::endl;
    }
  };
  step(weights_and_moments);
  step(closed_forms);
  step(fixed_point);
  step(representation);
  step(convergence);
  step(chi_decay);
  step(theorems);
  step(propositions);
  step(stable_toolbox);
  step([&] {
    reproducibility(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  });
  std::size_t passed = 0;
  for (const auto& l : g_lines) passed += l.pass;
  std::cout << passed << "/12 criteria pass" << std::endl;
  return passed == 12 && g_lines.size() == 12 ? 0 : 1;
}
