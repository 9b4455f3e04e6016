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


// kacrelax simulate|solve|metrics|verify|all --config PATH [--seed U64]
//          [--threads N] [--out DIR]
//
// Exit status: 0 when every verdict holds (or holds within band), 1 when a
// bound is violated, 2 on errors.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kacrelax/experiment.hpp"

int main(int argc, char** argv) {
  using namespace kacrelax;
  CLI::App app{"Relaxation to stable equilibria in the inelastic Kac model"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "seed override")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--out", out_dir, "output directory (default: config 'output')");
  app.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  const std::pair<const char*, Stage> stages[] = {{"simulate", Stage::simulate},
                                                  {"solve", Stage::solve},
                                                  {"metrics", Stage::metrics},
                                                  {"verify", Stage::verify},
                                                  {"all", Stage::all}};
  const char* help[] = {"McKean Monte Carlo batches", "Wild-series solutions",
                        "distances to the equilibrium", "bound reports", "every stage"};
  for (std::size_t i = 0; i < 5; ++i) app.add_subcommand(stages[i].first, help[i]);
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    if (!*threads_opt)
      if (const char* env = std::getenv("KACRELAX_THREADS")) {
        try {
          threads = static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
          throw domain_error(std::string("KACRELAX_THREADS is not a count: ") + env);
        }
      }
    if (!out_dir.empty()) cfg.output = out_dir;
    Stage stage = Stage::all;
    for (const auto& [name, s] : stages)
      if (app.got_subcommand(name)) stage = s;
    const auto res = run_stage(stage, cfg, cfg.output, threads);
    std::cout << "wrote " << res.files.size() << " files to " << cfg.output;
    if (res.reports) std::cout << "; " << res.reports << " bound reports, " << res.violated << " violated";
    std::cout << '\n';
    return res.violated ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "kacrelax: " << e.what() << '\n';
    return 2;
  }
}
