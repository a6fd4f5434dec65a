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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "csv.hpp"
#include "experiments.hpp"
#include "klc/cart_pole.hpp"
#include "klc/discrete_control.hpp"
#include "klc/finite_mdp.hpp"
#include "klc/lqg.hpp"
#include "klc/rng.hpp"
#include "klc/rollout.hpp"

namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("klc_unit_cli_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  REQUIRE(out.good());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s) {
  REQUIRE(!s.empty());
  return std::strtod(s.c_str(), nullptr);
}

// Runs one experiment into a temp CSV and returns (exit code, file text).
std::pair<int, std::string> run_to_file(klc::tools::RunOptions opt,
                                        const std::string& name,
                                        std::string* log_text = nullptr) {
  opt.out_path = temp_path(name);
  opt.out_set = true;
  std::ostringstream log;
  const int rc = klc::tools::run_experiment(opt, log);
  if (log_text != nullptr) *log_text = log.str();
  if (rc != 0) return {rc, ""};
  return {rc, read_text(opt.out_path)};
}

}  // namespace

TEST_CASE("csv doubles survive a write/parse round trip bit for bit") {
  const double values[] = {0.1,    3.14159265358979323846, 1e-300, -3.5,
                           17.5,   6.02214076e23,          0.0,
                           5.0741626794258377};
  for (double v : values) {
    const std::string text = klc::tools::csv_double(v);
    const double back = std::strtod(text.c_str(), nullptr);
    CHECK(back == v);
  }
}

TEST_CASE("mdp-demo output matches the solver on the built-in instance") {
  klc::tools::RunOptions opt;
  opt.experiment = "mdp-demo";
  const auto [rc, text] = run_to_file(opt, "mdp.csv");
  REQUIRE(rc == 0);

  // Rebuild the documented default instance.
  Eigen::MatrixXd p(4, 4);
  p << 0.6, 0.2, 0.1, 0.1,
       0.1, 0.5, 0.2, 0.2,
       0.2, 0.2, 0.5, 0.1,
       0.1, 0.3, 0.3, 0.3;
  Eigen::VectorXd running(4);
  running << 0.0, 0.3, 0.7, 1.2;
  Eigen::VectorXd terminal(4);
  terminal << 0.0, 0.5, 1.0, 2.0;
  std::vector<Eigen::MatrixXd> transitions(5, p);
  std::vector<Eigen::VectorXd> costs(5, running);
  costs.push_back(terminal);
  const klc::FiniteMdp mdp =
      klc::make_finite_mdp(std::move(transitions), std::move(costs));
  const klc::DesirabilityTable table = klc::solve_desirability(mdp);

  int log_z_rows = 0, value_rows = 0;
  std::map<std::pair<int, int>, double> p_star_sums;
  for (const std::string& line : lines_of(text)) {
    if (line.empty() || line[0] == '#' || line.rfind("kind,", 0) == 0) continue;
    const std::vector<std::string> f = split_csv(line);
    REQUIRE(f.size() == 5);
    const int k = std::stoi(f[1]);
    const int x = std::stoi(f[2]);
    const double value = parse_double(f[4]);
    if (f[0] == "log_z") {
      CHECK(value == table.log_z[k][x]);
      ++log_z_rows;
    } else if (f[0] == "value") {
      CHECK(value == klc::exact_value(mdp, table, k, x));
      ++value_rows;
    } else if (f[0] == "p_star") {
      const int j = std::stoi(f[3]);
      CHECK(value ==
            klc::optimal_transition(mdp, table, k, x)[j]);
      p_star_sums[{k, x}] += value;
    }
  }
  CHECK(log_z_rows == 24);  // 6 stages x 4 states
  CHECK(value_rows == 24);
  CHECK(p_star_sums.size() == 20);  // 5 stages x 4 states
  for (const auto& [key, sum] : p_star_sums) {
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("lq-value honors config, flags, and the closed-form column") {
  const std::string cfg = temp_path("lqv.json");
  write_text(cfg, R"({"grid": {"lo": -1.0, "hi": 1.0, "step": 1.0},
                      "sample_counts": [40]})");

  klc::tools::RunOptions opt;
  opt.experiment = "lq-value";
  opt.config_path = cfg;
  const auto [rc, text] = run_to_file(opt, "lqv.csv");
  REQUIRE(rc == 0);

  const std::vector<std::string> lines = lines_of(text);
  REQUIRE(lines.size() >= 7);  // 3 header comments + 1 column row + 3 data rows
  CHECK(lines[0] == "# schema=klc-lq-value-v1");
  CHECK(lines[1] == "# seed=20260816");
  CHECK(lines[3] == "x,V_exact,V_mc_S40,stderr_S40");

  const klc::LqgProblem prob = klc::make_lqg_problem(
      Eigen::MatrixXd::Constant(1, 1, 0.85), Eigen::MatrixXd::Constant(1, 1, 0.10),
      Eigen::MatrixXd::Constant(1, 1, 3.0), Eigen::MatrixXd::Constant(1, 1, 1.5),
      30);
  const klc::RiccatiSolution sol = klc::solve_riccati(prob);

  int data_rows = 0;
  for (std::size_t i = 4; i < lines.size(); ++i) {
    const std::vector<std::string> f = split_csv(lines[i]);
    REQUIRE(f.size() == 4);
    Eigen::VectorXd x(1);
    x[0] = parse_double(f[0]);
    CHECK(parse_double(f[1]) ==
          -klc::log_desirability_backward(prob, sol, 0, x));
    ++data_rows;
  }
  CHECK(data_rows == 3);

  SUBCASE("--samples replaces the sample-count list") {
    klc::tools::RunOptions opt2;
    opt2.experiment = "lq-value";
    opt2.config_path = cfg;
    opt2.samples = 77;
    opt2.samples_set = true;
    const auto [rc2, text2] = run_to_file(opt2, "lqv77.csv");
    REQUIRE(rc2 == 0);
    CHECK(lines_of(text2)[3] == "x,V_exact,V_mc_S77,stderr_S77");
  }

  SUBCASE("reruns and worker counts leave the bytes unchanged") {
    klc::tools::RunOptions opt2;
    opt2.experiment = "lq-value";
    opt2.config_path = cfg;
    const auto [rc2, text2] = run_to_file(opt2, "lqv_rerun.csv");
    REQUIRE(rc2 == 0);
    CHECK(text2 == text);

    opt2.workers = 2;
    opt2.workers_set = true;
    const auto [rc3, text3] = run_to_file(opt2, "lqv_w2.csv");
    REQUIRE(rc3 == 0);
    CHECK(text3 == text);
  }
}

TEST_CASE("lq-rollout reports the gain match and follows its own dynamics") {
  klc::tools::RunOptions opt;
  opt.experiment = "lq-rollout";
  const auto [rc, text] = run_to_file(opt, "lqr.csv");
  REQUIRE(rc == 0);

  double gain_diff = -1.0;
  double cov_excess = 0.0;
  // state keyed by (pair, sample): the previous row's x and u.
  std::map<std::pair<int, int>, std::pair<double, double>> prev;
  int checked = 0;
  for (const std::string& line : lines_of(text)) {
    if (line.rfind("# gain_match_max_abs_diff=", 0) == 0) {
      gain_diff = parse_double(line.substr(line.find('=') + 1));
      continue;
    }
    if (line.rfind("# covariance_excess_min=", 0) == 0) {
      cov_excess = parse_double(line.substr(line.find('=') + 1));
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("pair,", 0) == 0) continue;
    const std::vector<std::string> f = split_csv(line);
    REQUIRE(f.size() == 5);
    const std::pair<int, int> key{std::stoi(f[0]), std::stoi(f[1])};
    const double x = parse_double(f[3]);
    if (prev.count(key)) {
      const auto [px, pu] = prev[key];
      CHECK(x == 0.85 * px + 0.10 * pu);
      ++checked;
    }
    if (!f[4].empty()) prev[key] = {x, parse_double(f[4])};
  }
  CHECK(gain_diff >= 0.0);
  CHECK(gain_diff <= 1e-12);
  CHECK(cov_excess > 0.0);
  CHECK(checked == 4 * 3 * 30);  // every transition of every path
}

TEST_CASE("seed resolution prefers explicit flags over the config") {
  const std::string cfg = temp_path("seed.json");
  write_text(cfg, R"({"experiment": "mdp-demo", "seed": 111})");

  klc::tools::RunOptions opt;
  opt.config_path = cfg;
  const auto [rc, text] = run_to_file(opt, "seed111.csv");
  REQUIRE(rc == 0);
  CHECK(lines_of(text)[1] == "# seed=111");

  opt.seed = 222;
  opt.seed_set = true;
  const auto [rc2, text2] = run_to_file(opt, "seed222.csv");
  REQUIRE(rc2 == 0);
  CHECK(lines_of(text2)[1] == "# seed=222");
}

TEST_CASE("configuration errors exit with status 2") {
  std::ostringstream log;

  SUBCASE("unknown top-level key") {
    const std::string cfg = temp_path("badkey.json");
    write_text(cfg, R"({"experiment": "lq-value", "bogus": 1})");
    klc::tools::RunOptions opt;
    opt.config_path = cfg;
    CHECK(klc::tools::run_experiment(opt, log) == 2);
  }

  SUBCASE("experiment name conflict") {
    const std::string cfg = temp_path("conflict.json");
    write_text(cfg, R"({"experiment": "lq-value"})");
    klc::tools::RunOptions opt;
    opt.experiment = "cartpole";
    opt.config_path = cfg;
    CHECK(klc::tools::run_experiment(opt, log) == 2);
  }

  SUBCASE("no experiment named anywhere") {
    klc::tools::RunOptions opt;
    CHECK(klc::tools::run_experiment(opt, log) == 2);
  }

  SUBCASE("unknown experiment name") {
    klc::tools::RunOptions opt;
    opt.experiment = "warp-drive";
    CHECK(klc::tools::run_experiment(opt, log) == 2);
  }

  SUBCASE("unreadable config path") {
    klc::tools::RunOptions opt;
    opt.experiment = "mdp-demo";
    opt.config_path = temp_path("does_not_exist.json");
    CHECK(klc::tools::run_experiment(opt, log) == 2);
  }

  SUBCASE("malformed json") {
    const std::string cfg = temp_path("broken.json");
    write_text(cfg, "{not json");
    klc::tools::RunOptions opt;
    opt.experiment = "mdp-demo";
    opt.config_path = cfg;
    CHECK(klc::tools::run_experiment(opt, log) == 2);
  }
}

TEST_CASE("cartpole zero-cost override reproduces the reference chain in law") {
  const std::string cfg = temp_path("cp0.json");
  write_text(cfg, R"({"cartpole": {"zero_cost": true, "horizon": 10},
                      "rollouts": 120, "samples": 1})");

  klc::tools::RunOptions opt;
  opt.experiment = "cartpole";
  opt.config_path = cfg;
  const auto [rc, text] = run_to_file(opt, "cp0.csv");
  REQUIRE(rc == 0);

  std::vector<double> closed_loop_angles;
  for (const std::string& line : lines_of(text)) {
    if (line.empty() || line[0] == '#' || line.rfind("sample,", 0) == 0) {
      continue;
    }
    const std::vector<std::string> f = split_csv(line);
    REQUIRE(f.size() == 8);
    if (std::stoi(f[1]) == 10) {
      closed_loop_angles.push_back(parse_double(f[4]));
    }
  }
  REQUIRE(closed_loop_angles.size() == 120);

  // Reference: pure noise-driven rollouts of the same chain.
  const klc::DynamicsModel dyn =
      klc::make_cart_pole_dynamics(klc::CartPoleParams{});
  const klc::DiscreteInputSet grid = klc::make_scalar_grid(-20.0, 20.0, 21);
  const klc::NoiseModel noise = klc::discretized_gaussian_pmf(grid, 5.0);
  Eigen::VectorXd x0(4);
  x0 << 2.0, 0.0, 0.5, 0.0;
  const klc::RngStream base(90210);
  std::vector<double> reference_angles;
  for (int r = 0; r < 120; ++r) {
    klc::RngStream rng = base.substream(r);
    const klc::Trajectory traj =
        klc::rollout_noise_driven(dyn, noise, x0, 0, klc::Horizon(10), rng);
    reference_angles.push_back(traj.states[10][2]);
  }

  const auto moments = [](const std::vector<double>& v) {
    double sum = 0.0, sq = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / v.size();
    for (double x : v) sq += (x - mean) * (x - mean);
    return std::pair<double, double>{mean, sq / (v.size() - 1)};
  };
  const auto [m1, v1] = moments(closed_loop_angles);
  const auto [m2, v2] = moments(reference_angles);
  const double z = (m1 - m2) / std::sqrt(v1 / 120.0 + v2 / 120.0);
  CHECK(std::abs(z) < 2.5758293035489004);  // two-sided p > 0.01
}
