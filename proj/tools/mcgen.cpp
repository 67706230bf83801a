// Copyright 2026 The mcgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcgen/pipeline.hpp"

namespace {

mcgen::KSpec parse_k(const std::string& text) {
  if (text.empty()) {
    throw mcgen::ValidationError("cli", "--k must not be empty");
  }
  mcgen::KSpec k;
  if (text.back() == '%') {
    k.is_percentage = true;
    try {
      k.percentage = std::stod(text.substr(0, text.size() - 1));
    } catch (const std::exception&) {
      throw mcgen::ValidationError("cli", "cannot parse k percentage: " + text);
    }
    if (!(k.percentage > 0.0 && k.percentage <= 100.0)) {
      throw mcgen::ValidationError("cli",
                                   "k percentage must lie in (0, 100]");
    }
  } else {
    k.is_percentage = false;
    try {
      const long long value = std::stoll(text);
      if (value < 1) throw std::out_of_range("k");
      k.absolute = static_cast<std::size_t>(value);
    } catch (const std::exception&) {
      throw mcgen::ValidationError("cli", "cannot parse k: " + text);
    }
  }
  return k;
}

// "a:b:step" inclusive of b up to floating-point slack.
std::vector<double> parse_epsilon_range(const std::string& text) {
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw mcgen::ValidationError("cli",
                                 "--sweep-epsilon expects a:b:step, got " +
                                     text);
  }
  double lo = 0, hi = 0, step = 0;
  try {
    lo = std::stod(text.substr(0, first));
    hi = std::stod(text.substr(first + 1, second - first - 1));
    step = std::stod(text.substr(second + 1));
  } catch (const std::exception&) {
    throw mcgen::ValidationError("cli", "cannot parse --sweep-epsilon: " + text);
  }
  if (!(step > 0.0) || hi < lo) {
    throw mcgen::ValidationError("cli",
                                 "--sweep-epsilon needs lo <= hi and step > 0");
  }
  std::vector<double> values;
  for (double v = lo; v <= hi + step * 1e-9; v += step) {
    values.push_back(v);
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mcgen: differentially private synthetic tabular data via multi-level "
      "clustering (feature sets + microaggregation) and Laplace-sanitized "
      "Gaussian models"};

  std::string input;
  std::string output_dir = ".";
  double epsilon = 1.0;
  std::string k_text = "20%";
  int scenario = 1;
  double seed_fraction = -1.0;
  std::size_t multiplier = 1;
  std::uint64_t seed = 0;
  std::string budget_mode = "paper";
  bool clip = false;
  bool scaled = false;
  std::string label;
  std::string positive;
  std::string sweep_epsilon;
  std::vector<std::string> sweep_k;
  std::size_t repetitions = 20;
  bool full = false;
  bool no_eval = false;
  bool abs_corr = false;
  std::size_t forced_m = 0;
  std::size_t max_m = 0;
  std::string alignment = "shuffle";

  app.add_option("-i,--input", input, "input CSV (RFC 4180, header row)")
      ->required();
  app.add_option("-o,--output-dir", output_dir,
                 "directory for synthetic.csv and report.json");
  app.add_option("-e,--epsilon", epsilon,
                 "total privacy budget (use 'inf' to disable noise)");
  app.add_option("-k,--k", k_text,
                 "cluster size: absolute count or percentage of the "
                 "per-class seed size, e.g. 20%");
  app.add_option("-s,--scenario", scenario,
                 "1: train on original, test on synthetic; 2: train on "
                 "synthetic, test on original");
  app.add_option("--seed-fraction", seed_fraction,
                 "override the scenario's seed fraction (0.20 / 0.80)");
  app.add_option("-m,--multiplier", multiplier,
                 "synthetic rows per seed row");
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--budget-mode", budget_mode,
                 "paper: full share per release; strict: half share per "
                 "release so both compose to epsilon");
  app.add_flag("--clip", clip, "clamp synthetic values to [-1,1]");
  app.add_flag("--scaled", scaled,
               "emit the [-1,1] representation instead of inverse-transformed "
               "values");
  app.add_option("--label", label,
                 "label column name (default: last column)");
  app.add_option("--positive", positive,
                 "positive class for precision/recall/F1 (default: last "
                 "label in sorted order)");
  app.add_option("--sweep-epsilon", sweep_epsilon, "epsilon grid as a:b:step");
  app.add_option("--sweep-k", sweep_k,
                 "comma-separated k grid, e.g. 20%,40%,60%,80%,100%")
      ->delimiter(',');
  auto* reps_opt =
      app.add_option("-r,--repetitions", repetitions,
                     "evaluation rounds per configuration");
  app.add_flag("--full", full, "run 100 evaluation rounds");
  app.add_flag("--no-eval", no_eval, "skip the evaluation section");
  app.add_flag("--abs-corr", abs_corr,
               "use |correlation| in the feature distance");
  app.add_option("--force-m", forced_m,
                 "skip the Davies-Bouldin search and use exactly this many "
                 "feature sets (allows 1 and d)");
  app.add_option("--max-m", max_m, "cap on the Davies-Bouldin search range");
  app.add_option("--align", alignment,
                 "row join across feature sets: shuffle (default) or "
                 "by-cluster");

  CLI11_PARSE(app, argc, argv);

  try {
    mcgen::RunConfig config;
    config.input_path = input;
    config.output_dir = output_dir;
    config.epsilon = epsilon;
    config.k = parse_k(k_text);
    config.scenario = scenario;
    if (seed_fraction > 0.0) config.seed_fraction = seed_fraction;
    config.multiplier = multiplier;
    config.rng_seed = seed;
    config.budget_mode = mcgen::budget_mode_from_string(budget_mode);
    config.clip = clip;
    config.scaled_output = scaled;
    if (!label.empty()) config.label_column = label;
    config.positive_class = positive;
    config.repetitions = full && reps_opt->count() == 0 ? 100 : repetitions;
    config.evaluate = !no_eval;
    config.clustering.absolute_corr = abs_corr;
    if (forced_m > 0) config.clustering.forced_m = forced_m;
    if (max_m > 0) config.clustering.max_m = max_m;
    if (alignment == "by-cluster") {
      config.alignment = mcgen::RowAlignment::kByCluster;
    } else if (alignment != "shuffle") {
      throw mcgen::ValidationError("cli", "--align must be shuffle or "
                                          "by-cluster");
    }
    if (!sweep_epsilon.empty()) {
      config.sweep_epsilon = parse_epsilon_range(sweep_epsilon);
    }
    for (const auto& text : sweep_k) {
      config.sweep_k.push_back(parse_k(text));
    }
    if (!config.sweep_epsilon.empty() && config.sweep_k.empty()) {
      // default cluster-size grid: proportional 20%..100%
      for (const char* text : {"20%", "40%", "60%", "80%", "100%"}) {
        config.sweep_k.push_back(parse_k(text));
      }
    }

    const mcgen::RunArtifacts artifacts = mcgen::run(config);
    if (!artifacts.synthetic_csv.empty()) {
      std::cout << "synthetic data: " << artifacts.synthetic_csv.string()
                << '\n';
    }
    if (!artifacts.sweep_csv.empty()) {
      std::cout << "sweep results:  " << artifacts.sweep_csv.string() << '\n';
    }
    std::cout << "run report:     " << artifacts.report_json.string() << '\n';
    return 0;
  } catch (const mcgen::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
