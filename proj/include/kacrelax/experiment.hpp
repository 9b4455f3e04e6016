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

// Experiment configuration and the simulate / solve / metrics / verify
// pipelines behind the command-line tool.
//
// Config schema (JSON, unknown keys rejected):
//   name        string
//   params      {p, a0 | c0, eta?}            exactly one of a0, c0
//   datum       {family, base?, weight?}      family: symmetric_pareto | stable |
//                                             two_point | asymmetric_shift
//   t           [times]
//   replicates  integer
//   seed        unsigned 64-bit
//   moments     [orders of sum |beta_j|^m recorded per replicate]
//   solver      {nodes, K, N_cap, tol}
//   metrics     {s: [orders], xi_min, xi_max?}
//   bounds      {ids?, free?, moments?, equal_n?, tree_sizes?, lemma_xi?}
//   output      directory (overridden by --out)

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kacrelax/bounds.hpp"
#include "kacrelax/constants.hpp"
#include "kacrelax/errors.hpp"
#include "kacrelax/initial_data.hpp"
#include "kacrelax/mckean.hpp"
#include "kacrelax/metrics.hpp"
#include "kacrelax/wild.hpp"

namespace kacrelax {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::json;

struct DatumSpec {
  std::string family = "symmetric_pareto";
  std::string base = "symmetric_pareto";  ///< asymmetric_shift only
  double weight = 0.0;                    ///< asymmetric_shift only
};

struct BoundsSpec {
  std::vector<BoundId> ids;  ///< empty: every bound
  FreeParams free;
  std::string moments = "both";  ///< analytic | monte_carlo | both
  std::vector<std::size_t> equal_n{2, 4, 8, 16, 64};
  std::vector<std::size_t> tree_sizes{3, 5, 9, 17};
  std::vector<double> lemma_xi{0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0};
};

struct ExperimentConfig {
  std::string name = "experiment";
  double p = 1.0;
  std::optional<double> a0, c0, eta;
  DatumSpec datum;
  std::vector<double> t{1.0, 2.0, 4.0};
  std::size_t replicates = 100000;
  std::uint64_t seed = 1;
  std::vector<double> moments;
  SolveOptions solver;
  double tol = 1e-6;
  std::vector<double> s_list;  ///< empty: {alpha}
  double xi_min = 1e-3;
  std::optional<double> xi_max;
  BoundsSpec bounds;
  std::string output = "out";

  double alpha() const { return 2.0 / (1.0 + p); }
  double a0_value() const { return a0 ? *a0 : a0_from_c0(*c0, alpha()); }
};

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw domain_error("config: '" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw domain_error("config: unknown key '" + k + "' in " + where);
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw domain_error("config: bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

template <class T>
void get_opt(const Json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

template <class T>
void get_opt(const Json& j, const std::string& key, const std::string& where,
             std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key, where);
}

inline Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// 17 significant digits; nan and inf spelled out.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
  using detail::get;
  using detail::get_opt;
  detail::check_keys(j, {"name", "params", "datum", "t", "replicates", "seed", "moments", "solver",
                         "metrics", "bounds", "output"},
                     "config");
  ExperimentConfig c;
  get_opt(j, "name", "config", c.name);
  if (!j.contains("params")) throw domain_error("config: 'params' is required");
  const Json& pj = j.at("params");
  detail::check_keys(pj, {"p", "a0", "c0", "eta"}, "params");
  get_opt(pj, "p", "params", c.p);
  get_opt(pj, "a0", "params", c.a0);
  get_opt(pj, "c0", "params", c.c0);
  get_opt(pj, "eta", "params", c.eta);
  if (c.a0.has_value() == c.c0.has_value())
    throw domain_error("config: exactly one of params.a0 and params.c0 must be given");
  if (!(c.p > 0.0 && std::isfinite(c.p))) throw domain_error("config: params.p must be > 0");
  if (c.a0 && !(*c.a0 >= 0.0)) throw domain_error("config: params.a0 must be >= 0");
  if (c.c0 && !(*c.c0 >= 0.0)) throw domain_error("config: params.c0 must be >= 0");

  if (j.contains("datum")) {
    const Json& dj = j.at("datum");
    detail::check_keys(dj, {"family", "base", "weight"}, "datum");
    get_opt(dj, "family", "datum", c.datum.family);
    get_opt(dj, "base", "datum", c.datum.base);
    get_opt(dj, "weight", "datum", c.datum.weight);
  }
  get_opt(j, "t", "config", c.t);
  for (double t : c.t)
    if (!(t >= 0.0 && std::isfinite(t))) throw domain_error("config: times must be finite and >= 0");
  get_opt(j, "replicates", "config", c.replicates);
  if (c.replicates == 0) throw domain_error("config: replicates must be >= 1");
  get_opt(j, "seed", "config", c.seed);
  get_opt(j, "moments", "config", c.moments);
  get_opt(j, "output", "config", c.output);

  if (j.contains("solver")) {
    const Json& sj = j.at("solver");
    detail::check_keys(sj, {"nodes", "K", "N_cap", "tol"}, "solver");
    get_opt(sj, "nodes", "solver", c.solver.nodes);
    get_opt(sj, "K", "solver", c.solver.K);
    get_opt(sj, "N_cap", "solver", c.solver.N_cap);
    get_opt(sj, "tol", "solver", c.tol);
  }
  if (j.contains("metrics")) {
    const Json& mj = j.at("metrics");
    detail::check_keys(mj, {"s", "xi_min", "xi_max"}, "metrics");
    get_opt(mj, "s", "metrics", c.s_list);
    get_opt(mj, "xi_min", "metrics", c.xi_min);
    get_opt(mj, "xi_max", "metrics", c.xi_max);
  }
  if (j.contains("bounds")) {
    const Json& bj = j.at("bounds");
    detail::check_keys(bj, {"ids", "free", "moments", "equal_n", "tree_sizes", "lemma_xi"}, "bounds");
    if (bj.contains("ids"))
      for (const auto& s : detail::get<std::vector<std::string>>(bj, "ids", "bounds"))
        c.bounds.ids.push_back(parse_bound_id(s));
    get_opt(bj, "moments", "bounds", c.bounds.moments);
    if (c.bounds.moments != "analytic" && c.bounds.moments != "monte_carlo" &&
        c.bounds.moments != "both")
      throw domain_error("config: bounds.moments must be analytic, monte_carlo or both");
    get_opt(bj, "equal_n", "bounds", c.bounds.equal_n);
    get_opt(bj, "tree_sizes", "bounds", c.bounds.tree_sizes);
    get_opt(bj, "lemma_xi", "bounds", c.bounds.lemma_xi);
    if (bj.contains("free")) {
      const Json& fj = bj.at("free");
      const std::string w = "bounds.free";
      detail::check_keys(fj, {"c", "q", "sigma", "delta", "rho", "rho_prime", "rho_rate", "D", "d",
                              "esseen_c", "s"},
                         w);
      auto& f = c.bounds.free;
      get_opt(fj, "c", w, f.c);
      get_opt(fj, "q", w, f.q);
      get_opt(fj, "sigma", w, f.sigma);
      get_opt(fj, "delta", w, f.delta);
      get_opt(fj, "rho", w, f.rho);
      get_opt(fj, "rho_prime", w, f.rho_prime);
      get_opt(fj, "rho_rate", w, f.rho_rate);
      get_opt(fj, "D", w, f.D);
      get_opt(fj, "d", w, f.d);
      get_opt(fj, "esseen_c", w, f.esseen_c);
      get_opt(fj, "s", w, f.s);
    }
  }
  c.bounds.free.xi_min = c.xi_min;
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("config: cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw domain_error("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

/// Effective configuration with every default filled in; its compact dump is
/// what the config hash covers.
inline Json to_json(const ExperimentConfig& c) {
  Json ids = Json::array();
  for (BoundId id : c.bounds.ids) ids.push_back(bound_name(id));
  const auto& f = c.bounds.free;
  return Json{
      {"name", c.name},
      {"params", {{"p", c.p}, {"a0", detail::opt_json(c.a0)}, {"c0", detail::opt_json(c.c0)},
                  {"eta", detail::opt_json(c.eta)}}},
      {"datum", {{"family", c.datum.family}, {"base", c.datum.base}, {"weight", c.datum.weight}}},
      {"t", c.t},
      {"replicates", c.replicates},
      {"seed", c.seed},
      {"moments", c.moments},
      {"solver", {{"nodes", c.solver.nodes}, {"K", c.solver.K}, {"N_cap", c.solver.N_cap},
                  {"tol", c.tol}}},
      {"metrics", {{"s", c.s_list}, {"xi_min", c.xi_min}, {"xi_max", detail::opt_json(c.xi_max)}}},
      {"bounds",
       {{"ids", ids},
        {"moments", c.bounds.moments},
        {"equal_n", c.bounds.equal_n},
        {"tree_sizes", c.bounds.tree_sizes},
        {"lemma_xi", c.bounds.lemma_xi},
        {"free",
         {{"c", f.c}, {"q", f.q}, {"sigma", detail::opt_json(f.sigma)},
          {"delta", detail::opt_json(f.delta)}, {"rho", detail::opt_json(f.rho)},
          {"rho_prime", detail::opt_json(f.rho_prime)}, {"rho_rate", detail::opt_json(f.rho_rate)},
          {"D", detail::opt_json(f.D)}, {"d", detail::opt_json(f.d)}, {"esseen_c", f.esseen_c},
          {"s", f.s}}}}},
      {"output", c.output},
  };
}

inline std::string config_hash(const ExperimentConfig& c) {
  Json j = to_json(c);
  j.erase("output");
  return detail::hex64(detail::fnv1a(j.dump()));
}

/// Datum described by a config.
inline DatumPtr make_datum(const ExperimentConfig& c) {
  const double a = c.alpha();
  const double a0 = c.a0_value();
  auto family = [&](const std::string& name, double a0f) -> DatumPtr {
    if (name == "symmetric_pareto") {
      if (!(a0f > 0.0)) throw domain_error("config: symmetric_pareto needs a0 > 0 (c0 > 0)");
      const double c0 = c0_from_a0(a0f, a);
      return make_symmetric_pareto(a, std::pow(2.0 * c0, 1.0 / a));
    }
    if (name == "stable") {
      if (!(a0f > 0.0)) throw domain_error("config: stable needs a0 > 0 (c0 > 0)");
      return make_stable_datum(a, a0f);
    }
    if (name == "two_point") {
      if (a0f != 0.0) throw domain_error("config: two_point has a0 = c0 = 0");
      return make_two_point(a);
    }
    throw domain_error("config: unknown datum family '" + name + "'");
  };
  if (c.datum.family == "asymmetric_shift") {
    const double w = c.datum.weight;
    if (!(w >= 0.0 && w < 0.5)) throw domain_error("config: datum.weight must lie in [0, 1/2)");
    return make_asymmetric_shift(family(c.datum.base, a0 / (1.0 - w)), w);
  }
  return family(c.datum.family, a0);
}

/// Output directory written through a sibling staging directory: files land
/// in `<out>.partial` and are moved into `<out>` by commit(); an uncommitted
/// stage is removed on destruction.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path out) : out_(std::move(out)) {
    stage_ = out_;
    stage_ += ".partial";
    std::error_code ec;
    std::filesystem::remove_all(stage_, ec);
    std::filesystem::create_directories(stage_, ec);
    if (ec) throw resource_error("cannot create " + stage_.string() + ": " + ec.message());
  }
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;
  ~OutputStage() {
    if (!committed_) {
      std::error_code ec;
      std::filesystem::remove_all(stage_, ec);
    }
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(stage_ / name, std::ios::binary);
    f << content;
    if (!f) throw resource_error("cannot write " + (stage_ / name).string());
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

  void commit() {
    std::error_code ec;
    std::filesystem::create_directories(out_, ec);
    if (ec) throw resource_error("cannot create " + out_.string() + ": " + ec.message());
    for (const auto& f : files_) {
      std::filesystem::rename(stage_ / f, out_ / f, ec);
      if (ec) throw resource_error("cannot move " + f + " into " + out_.string() + ": " + ec.message());
    }
    std::filesystem::remove_all(stage_, ec);
    committed_ = true;
  }

 private:
  std::filesystem::path out_, stage_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

/// One configured experiment; batches and solutions are computed once and
/// shared by the pipelines.
class Experiment {
 public:
  Experiment(ExperimentConfig cfg, unsigned threads = 0)
      : cfg_(std::move(cfg)),
        threads_(threads),
        datum_(make_datum(cfg_)),
        law_(cfg_.alpha(), cfg_.a0_value()),
        hash_(config_hash(cfg_)),
        batches_(cfg_.t.size()),
        sols_(cfg_.t.size()) {}

  const ExperimentConfig& config() const { return cfg_; }
  const std::string& hash() const { return hash_; }
  const DatumPtr& datum() const { return datum_; }

  std::uint64_t batch_seed(std::size_t k) const { return cfg_.seed + 0x9E3779B97F4A7C15ull * (k + 1); }

  const SimulationBatch& batch(std::size_t k) {
    if (!batches_[k]) {
      BatchConfig bc;
      bc.t = cfg_.t[k];
      bc.p = cfg_.p;
      bc.replicates = cfg_.replicates;
      bc.seed = batch_seed(k);
      bc.moment_orders = cfg_.moments;
      bc.threads = threads_;
      batches_[k] = run_batch(bc, datum_.get());
    }
    return *batches_[k];
  }

  const WildSolution& solution(std::size_t k) {
    if (!sols_[k]) sols_[k] = solve(datum_, cfg_.t[k], cfg_.tol, cfg_.solver);
    return *sols_[k];
  }

  std::string simulate_csv(std::size_t k) {
    const auto& b = batch(k);
    std::ostringstream o;
    o << "config,t,replicate,nu,truncated,betaMax,V";
    for (double m : cfg_.moments) o << ",sum_beta_pow_" << detail::num(m);
    o << '\n';
    for (std::size_t i = 0; i < b.replicates.size(); ++i) {
      const auto& r = b.replicates[i];
      o << hash_ << ',' << detail::num(cfg_.t[k]) << ',' << i << ',' << r.nu << ','
        << (r.truncated ? 1 : 0) << ',' << detail::num(r.beta_max) << ',' << detail::num(r.value);
      for (double m : r.moments) o << ',' << detail::num(m);
      o << '\n';
    }
    return o.str();
  }

  std::string solve_csv(std::size_t k) {
    const auto& s = solution(k);
    const Grid& g = s.re.grid();
    std::ostringstream o;
    o << "config,t,xi,re,im\n";
    for (std::size_t i = 0; i < g.nodes; ++i) {
      const double xi = g.xi(i);
      const auto v = s(xi);
      o << hash_ << ',' << detail::num(cfg_.t[k]) << ',' << detail::num(xi) << ','
        << detail::num(s.re.values()[i]) << ',' << detail::num(v.imag()) << '\n';
    }
    return o.str();
  }

  /// K and chi_s rows per time; t = 0 is measured on the datum directly.
  std::string metrics_csv() {
    if (!(law_.a0() > 0.0)) return metrics_csv_degenerate();
    std::ostringstream o;
    o << "config,t,kind,s,value,band,source,argmax\n";
    auto row = [&](double t, const MetricResult& m) {
      o << hash_ << ',' << detail::num(t) << ',' << m.kind << ',' << detail::num(m.s) << ','
        << detail::num(m.value) << ',' << detail::num(m.band) << ',' << m.source << ','
        << detail::num(m.argmax) << '\n';
    };
    const auto s_list = orders();
    const double xi_top = cfg_.xi_max.value_or(std::pow(40.0 / law_.a0(), 1.0 / cfg_.alpha()));
    for (std::size_t k = 0; k < cfg_.t.size(); ++k) {
      const double t = cfg_.t[k];
      if (t == 0.0) {
        row(t, kolmogorov_datum(*datum_, law_));
        for (double s : s_list) row(t, chi_s_datum(*datum_, law_, s, cfg_.xi_min, xi_top));
        continue;
      }
      row(t, kolmogorov_empirical(batch(k).values(), law_));
      for (double s : s_list) row(t, chi_s(solution(k), law_, s, cfg_.xi_min, cfg_.xi_max));
    }
    return o.str();
  }

  /// Bound reports for every configured id.
  std::vector<BoundReport> verify() {
    auto even = std::make_shared<const EvenPart>(datum_);
    const BoundContext ctx(even, cfg_.eta, cfg_.bounds.free);
    std::vector<BoundId> ids = cfg_.bounds.ids;
    if (ids.empty())
      for (const auto& b : kBounds) ids.push_back(b.id);
    std::vector<BoundReport> out;
    auto refused = [&](BoundId id) {
      BoundReport r;
      r.id = id;
      r.datum = datum_->name();
      mark_inapplicable(r, hypothesis_error(bound_name(id), "F0 in the domain of normal attraction with a0 > 0"));
      out.push_back(std::move(r));
    };

    const double a = cfg_.alpha();
    std::vector<std::vector<double>> weights;
    for (std::size_t n : cfg_.bounds.equal_n) weights.push_back(equal_weights(n, a));
    Rng rng(stream_seed(cfg_.seed, 0xB0B));
    for (std::size_t n : cfg_.bounds.tree_sizes)
      weights.push_back(weights_from_tree(sample_tree_sample(n, cfg_.p, rng), a));

    std::vector<BoundId> time_ids;
    for (BoundId id : ids) {
      const auto& info = bound_info(id);
      if (!info.deterministic) {
        time_ids.push_back(id);
        continue;
      }
      if (!ctx_usable(ctx)) {
        refused(id);
        continue;
      }
      if (id == BoundId::Lemma1_eq22 || id == BoundId::Lemma1_eq23) {
        for (const auto& q : weights)
          for (auto& r : check_lemma1(ctx, id, q, cfg_.bounds.lemma_xi)) out.push_back(std::move(r));
      } else {
        for (auto& r : check_propositions(ctx, id, weights, threads_)) out.push_back(std::move(r));
      }
    }

    std::vector<double> ts;
    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < cfg_.t.size(); ++k)
      if (cfg_.t[k] > 0.0) {
        ts.push_back(cfg_.t[k]);
        index.push_back(k);
      }
    if (!time_ids.empty() && !ts.empty()) {
      TheoremCheckConfig tc;
      tc.ts = ts;
      tc.replicates = cfg_.replicates;
      tc.seed = cfg_.seed;
      tc.threads = threads_;
      tc.analytic_moments = cfg_.bounds.moments != "monte_carlo";
      tc.monte_carlo_moments = cfg_.bounds.moments != "analytic";
      tc.wild_tol = cfg_.tol;
      tc.wild = cfg_.solver;
      MeasurementSource src{[&](std::size_t i) -> const SimulationBatch& { return batch(index[i]); },
                            [&](std::size_t i) -> const WildSolution& { return solution(index[i]); }};
      if (ctx_usable(ctx)) {
        for (auto& r : check_theorems(ctx, time_ids, tc, &src)) out.push_back(std::move(r));
      } else {
        for (BoundId id : time_ids) refused(id);
      }
    }
    return out;
  }

  std::string reports_csv(const std::vector<BoundReport>& rs) const {
    std::ostringstream o;
    o << "config,id,datum,t,n,xi,lhs,lhs_uncertainty,lhs_source,rhs,rhs_se,rhs_source,verdict,"
         "slack,note\n";
    for (const auto& r : rs) {
      o << hash_ << ',' << bound_name(r.id) << ',' << r.datum << ',' << detail::num(r.t) << ','
        << r.n << ',' << detail::num(r.xi) << ',' << detail::num(r.lhs.value) << ','
        << detail::num(r.lhs.uncertainty) << ',' << r.lhs.source << ',' << detail::num(r.rhs.value)
        << ',' << detail::num(r.rhs.se) << ',' << r.rhs_source << ',' << verdict_name(r.verdict)
        << ',' << detail::num(r.slack) << ",\"" << r.note << "\"\n";
    }
    return o.str();
  }

  Json reports_json(const std::vector<BoundReport>& rs) const {
    Json arr = Json::array();
    auto val = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
    for (const auto& r : rs) {
      Json j{{"id", bound_name(r.id)},
             {"datum", r.datum},
             {"t", val(r.t)},
             {"n", r.n},
             {"xi", val(r.xi)},
             {"lhs", {{"value", val(r.lhs.value)}, {"uncertainty", val(r.lhs.uncertainty)},
                      {"source", r.lhs.source}}},
             {"rhs", {{"value", val(r.rhs.value)}, {"se", val(r.rhs.se)}, {"source", r.rhs_source}}},
             {"verdict", verdict_name(r.verdict)},
             {"slack", val(r.slack)}};
      if (!r.note.empty()) j["note"] = r.note;
      arr.push_back(std::move(j));
    }
    return Json{{"config", hash_}, {"reports", arr}};
  }

 private:
  static bool ctx_usable(const BoundContext& ctx) { return ctx.a0() > 0.0; }

  std::vector<double> orders() const {
    return cfg_.s_list.empty() ? std::vector<double>{cfg_.alpha()} : cfg_.s_list;
  }

  std::string metrics_csv_degenerate() {
    // a0 = 0: the equilibrium is the point mass at 0; report K against it.
    std::ostringstream o;
    o << "config,t,kind,s,value,band,source,argmax\n";
    for (std::size_t k = 0; k < cfg_.t.size(); ++k) {
      auto v = batch(k).values();
      std::sort(v.begin(), v.end());
      const double n = static_cast<double>(v.size());
      double K = 0.0;
      const auto lo = std::lower_bound(v.begin(), v.end(), 0.0);
      const auto hi = std::upper_bound(v.begin(), v.end(), 0.0);
      K = std::max(static_cast<double>(lo - v.begin()) / n, static_cast<double>(v.end() - hi) / n);
      o << hash_ << ',' << detail::num(cfg_.t[k]) << ",kolmogorov_point_mass,0," << detail::num(K)
        << ',' << detail::num(1.36 / std::sqrt(n)) << ",monte_carlo,0\n";
    }
    return o.str();
  }

  ExperimentConfig cfg_;
  unsigned threads_;
  DatumPtr datum_;
  StableLaw law_;
  std::string hash_;
  std::vector<std::optional<SimulationBatch>> batches_;
  std::vector<std::optional<WildSolution>> sols_;
};

enum class Stage { simulate, solve, metrics, verify, all };

struct RunOutcome {
  std::vector<std::string> files;
  std::size_t violated = 0;
  std::size_t reports = 0;
};

/// Runs a pipeline stage and writes its files plus manifest.json into `out`.
inline RunOutcome run_stage(Stage stage, const ExperimentConfig& cfg, const std::filesystem::path& out,
                            unsigned threads = 0) {
  const auto start = std::chrono::steady_clock::now();
  Experiment ex(cfg, threads);
  OutputStage st(out);
  RunOutcome res;
  const bool all = stage == Stage::all;
  auto tag = [&](std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03zu", k);
    return std::string(buf);
  };
  if (all || stage == Stage::simulate)
    for (std::size_t k = 0; k < cfg.t.size(); ++k) st.write("batch_" + tag(k) + ".csv", ex.simulate_csv(k));
  if (all || stage == Stage::solve)
    for (std::size_t k = 0; k < cfg.t.size(); ++k)
      st.write("solution_" + tag(k) + ".csv", ex.solve_csv(k));
  if (all || stage == Stage::metrics) st.write("metrics.csv", ex.metrics_csv());
  if (all || stage == Stage::verify) {
    const auto rs = ex.verify();
    st.write("bounds.csv", ex.reports_csv(rs));
    st.write("bounds.json", ex.reports_json(rs).dump(2) + "\n");
    res.reports = rs.size();
    for (const auto& r : rs) res.violated += r.verdict == Verdict::violated;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest{{"config_hash", ex.hash()},
                {"seed", cfg.seed},
                {"version", kVersion},
                {"compiler", __VERSION__},
                {"files", st.files()},
                {"config", to_json(cfg)},
                {"wall_clock_seconds", wall}};
  st.write("manifest.json", manifest.dump(2) + "\n");
  res.files = st.files();
  st.commit();
  return res;
}

}  // namespace kacrelax
