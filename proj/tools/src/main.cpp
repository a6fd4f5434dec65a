// Copyright 2026 The klcontrol Authors
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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"klc: Kullback-Leibler optimal control experiments"};

  klc::tools::RunOptions opt;
  bool selftest = false;

  app.add_option("--experiment", opt.experiment,
                 "Experiment to run: lq-value, lq-rollout, cartpole, mdp-demo");
  app.add_option("--config", opt.config_path, "JSON config file");
  auto* seed_opt =
      app.add_option("--seed", opt.seed, "Master RNG seed (default 20260816)");
  auto* samples_opt = app.add_option(
      "--samples", opt.samples, "Override the experiment's sample count")
      ->check(CLI::PositiveNumber);
  auto* workers_opt = app.add_option("--workers", opt.workers,
                                     "Worker threads (output is identical "
                                     "for any value)")
      ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", opt.out_path, "Output CSV path");
  app.add_flag("--selftest", selftest,
               "Run built-in consistency checks and exit");

  CLI11_PARSE(app, argc, argv);

  opt.seed_set = seed_opt->count() > 0;
  opt.samples_set = samples_opt->count() > 0;
  opt.workers_set = workers_opt->count() > 0;
  opt.out_set = out_opt->count() > 0;

  if (selftest) {
    return klc::tools::run_selftest(std::cout);
  }
  if (opt.experiment.empty() && opt.config_path.empty()) {
    std::cerr << app.help();
    return 2;
  }
  return klc::tools::run_experiment(opt, std::cout);
}
