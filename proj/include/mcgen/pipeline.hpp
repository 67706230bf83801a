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

#ifndef MCGEN_PIPELINE_HPP_
#define MCGEN_PIPELINE_HPP_

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcgen/error.hpp"
#include "mcgen/evaluation.hpp"
#include "mcgen/generator.hpp"
#include "mcgen/noise_accountant.hpp"
#include "mcgen/table.hpp"

namespace mcgen {

// Everything a pipeline run needs, mapped one-to-one from the CLI flags.
struct RunConfig {
  std::string input_path;
  std::string output_dir = ".";
  double epsilon = 1.0;
  KSpec k;
  int scenario = 1;
  std::optional<double> seed_fraction;
  std::size_t multiplier = 1;
  std::uint64_t rng_seed = 0;
  BudgetMode budget_mode = BudgetMode::kSingle;
  bool clip = false;
  bool scaled_output = false;
  std::optional<std::string> label_column;
  std::string positive_class;  // empty: last label in sorted order
  std::size_t repetitions = 20;
  bool evaluate = true;
  RowAlignment alignment = RowAlignment::kShuffled;
  FeatureClusteringOptions clustering;
  LogRegConfig logreg;
  std::vector<double> sweep_epsilon;   // empty: no sweep
  std::vector<KSpec> sweep_k;

  void validate() const {
    PrivacyConfig probe;
    probe.epsilon_total = epsilon;
    probe.validate();
    for (const double eps : sweep_epsilon) {
      probe.epsilon_total = eps;
      probe.validate();
    }
    if (multiplier < 1) {
      throw ValidationError("RunConfig", "multiplier must be >= 1");
    }
    if (scenario != 1 && scenario != 2) {
      throw ValidationError("RunConfig", "scenario must be 1 or 2");
    }
    if (repetitions == 0) {
      throw ValidationError("RunConfig", "repetitions must be positive");
    }
  }
};

namespace detail {

// JSON has no infinity; non-finite values serialize as strings.
inline nlohmann::json json_number(double value) {
  if (std::isfinite(value)) return value;
  return value > 0 ? "inf" : "-inf";
}

inline nlohmann::json to_json(const NoiseReport& report) {
  return {
      {"n_ifs_mean", json_number(report.n_ifs_mean)},
      {"n_ifs_cov", json_number(report.n_ifs_cov)},
      {"n_noifs_mean", json_number(report.n_noifs_mean)},
      {"n_noifs_cov", json_number(report.n_noifs_cov)},
      {"var_ifs_mean", json_number(report.var_ifs_mean)},
      {"var_ifs_cov", json_number(report.var_ifs_cov)},
      {"var_noifs_mean", json_number(report.var_noifs_mean)},
      {"var_noifs_cov", json_number(report.var_noifs_cov)},
      {"per_ifs_mean", report.per_ifs_mean},
      {"per_ifs_cov", report.per_ifs_cov},
      {"per_cluster_mean", report.per_cluster_mean},
      {"per_cluster_cov", report.per_cluster_cov},
      {"set_sizes", report.set_sizes},
      {"cluster_sizes", report.cluster_sizes},
      {"sensitivities", report.sensitivities},
      {"delta_d", report.delta_d},
      {"epsilon", json_number(report.epsilon)},
      {"mean_totals_match", report.mean_totals_match},
      {"cov_not_worse", report.cov_not_worse},
  };
}

inline nlohmann::json to_json(const EvalReport& report) {
  return {
      {"scenario", report.scenario},
      {"classifier", report.classifier},
      {"precision", report.precision},
      {"recall", report.recall},
      {"f1", report.f1},
      {"per_round_f1", report.per_round_f1},
      {"repetitions", report.repetitions},
      {"failed_rounds", report.failed_rounds},
      {"round_errors", report.round_errors},
      {"epsilon", json_number(report.epsilon)},
      {"k", report.k_description},
      {"rng_seed", report.rng_seed},
      {"dataset", report.dataset_id},
  };
}

inline std::size_t thread_cap() {
  if (const char* env = std::getenv("MCGEN_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) return static_cast<std::size_t>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(0..count-1) on up to thread_cap() workers. Each index is
// independent; results land in caller-owned slots, so the schedule cannot
// change the outcome. The first worker exception is rethrown after join.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(thread_cap(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          const std::scoped_lock lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

struct RunArtifacts {
  std::filesystem::path synthetic_csv;
  std::filesystem::path report_json;
  std::filesystem::path sweep_csv;  // only for sweep runs
};

// Writes the synthetic table as CSV in the original schema: features
// inverse-transformed to their native ranges (or left in [-1,1] when
// `scaled` is set), label column appended at `label_position`.
inline void write_synthetic_csv(const std::filesystem::path& path,
                                const ScaledTable& synthetic,
                                const std::string& label_name,
                                std::size_t label_position, bool scaled) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("write_synthetic_csv",
                          "cannot open for writing: " + path.string());
  }
  const Eigen::MatrixXd values =
      scaled ? synthetic.values
             : inverse_scale(synthetic.values, synthetic.ranges);

  std::vector<std::string> header;
  header.reserve(synthetic.n_features() + 1);
  for (std::size_t f = 0; f <= synthetic.n_features(); ++f) {
    if (f == label_position) header.push_back(label_name);
    if (f < synthetic.n_features()) header.push_back(synthetic.feature_names[f]);
  }
  csv::write_row(out, header);

  std::vector<std::string> row(header.size());
  for (std::size_t r = 0; r < synthetic.n_rows(); ++r) {
    std::size_t col = 0;
    for (std::size_t f = 0; f <= synthetic.n_features(); ++f) {
      if (f == label_position) row[col++] = synthetic.labels[r];
      if (f < synthetic.n_features()) {
        row[col++] = csv::format_number(
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)));
      }
    }
    csv::write_row(out, row);
  }
}

// The full pipeline for one configuration: preprocessing, feature-level and
// sample-level clustering, sanitization, generation, evaluation, and the
// audit report. Returns the written artifact paths.
inline RunArtifacts run(const RunConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);

  nlohmann::json report;
  report["schema"] = 1;
  std::vector<std::string> warnings;

  // --- Preprocessing -------------------------------------------------------
  const Table table = load_csv(config.input_path, config.label_column);
  const Table encoded = one_hot_encode(table, &warnings);
  const ScaledTable raw = to_features(encoded);

  std::map<std::string, std::size_t> class_counts;
  for (const auto& label : raw.labels) ++class_counts[label];
  std::string positive = config.positive_class;
  if (positive.empty()) {
    if (class_counts.empty()) {
      throw ValidationError("run", "no class labels found");
    }
    positive = class_counts.rbegin()->first;
  }

  report["config"] = {
      {"input", config.input_path},
      {"output_dir", config.output_dir},
      {"epsilon", detail::json_number(config.epsilon)},
      {"k", config.k.describe()},
      {"scenario", config.scenario},
      {"seed_fraction",
       config.seed_fraction.has_value() ? nlohmann::json(*config.seed_fraction)
                                        : nlohmann::json(nullptr)},
      {"multiplier", config.multiplier},
      {"rng_seed", config.rng_seed},
      {"budget_mode", to_string(config.budget_mode)},
      {"clip", config.clip},
      {"scaled_output", config.scaled_output},
      {"label", encoded.column_names[encoded.label_column]},
      {"positive_class", positive},
      {"repetitions", config.repetitions},
      {"alignment", config.alignment == RowAlignment::kShuffled
                        ? "shuffle"
                        : "by-cluster"},
      {"absolute_corr", config.clustering.absolute_corr},
  };
  report["dataset"] = {
      {"rows", raw.n_rows()},
      {"features_after_encoding", raw.n_features()},
      {"classes", class_counts},
  };

  RunArtifacts artifacts;
  artifacts.report_json =
      std::filesystem::path(config.output_dir) / "report.json";

  // --- Sweep mode -----------------------------------------------------------
  if (!config.sweep_epsilon.empty() || !config.sweep_k.empty()) {
    const std::vector<double> epsilons = config.sweep_epsilon.empty()
                                             ? std::vector<double>{config.epsilon}
                                             : config.sweep_epsilon;
    const std::vector<KSpec> ks =
        config.sweep_k.empty() ? std::vector<KSpec>{config.k} : config.sweep_k;

    struct Cell {
      double epsilon;
      KSpec k;
      EvalReport eval;
    };
    std::vector<Cell> cells;
    for (const double eps : epsilons) {
      for (const KSpec& k : ks) cells.push_back({eps, k, {}});
    }

    detail::parallel_for(cells.size(), [&](std::size_t i) {
      EvalConfig eval;
      eval.scenario = config.scenario;
      eval.seed_fraction = config.seed_fraction;
      eval.privacy.epsilon_total = cells[i].epsilon;
      eval.privacy.k = cells[i].k;
      eval.privacy.budget_mode = config.budget_mode;
      eval.privacy.rng_seed =
          Rng::substream(config.rng_seed, Stream::kSweep, i).next();
      eval.generator.multiplier = config.multiplier;
      eval.generator.alignment = config.alignment;
      eval.clustering = config.clustering;
      eval.logreg = config.logreg;
      eval.positive_class = positive;
      eval.clip = config.clip;
      eval.dataset_id = config.input_path;
      cells[i].eval = run_scenario(raw, eval, config.repetitions);
    });

    artifacts.sweep_csv =
        std::filesystem::path(config.output_dir) / "sweep_results.csv";
    std::ofstream sweep_out(artifacts.sweep_csv, std::ios::binary);
    if (!sweep_out) {
      throw ValidationError("run", "cannot write " +
                                       artifacts.sweep_csv.string());
    }
    csv::write_row(sweep_out, {"epsilon", "k", "scenario", "repetition",
                               "precision", "recall", "f1"});
    nlohmann::json sweep_json = nlohmann::json::array();
    for (const Cell& cell : cells) {
      for (std::size_t r = 0; r < cell.eval.per_round_f1.size(); ++r) {
        csv::write_row(sweep_out,
                       {csv::format_number(cell.epsilon), cell.k.describe(),
                        std::to_string(config.scenario), std::to_string(r),
                        csv::format_number(cell.eval.per_round_precision[r]),
                        csv::format_number(cell.eval.per_round_recall[r]),
                        csv::format_number(cell.eval.per_round_f1[r])});
      }
      nlohmann::json entry = detail::to_json(cell.eval);
      entry["epsilon"] = detail::json_number(cell.epsilon);
      entry["k"] = cell.k.describe();
      sweep_json.push_back(std::move(entry));
    }
    report["sweep"] = std::move(sweep_json);
    report["warnings"] = warnings;
    std::ofstream json_out(artifacts.report_json, std::ios::binary);
    json_out << report.dump(2) << '\n';
    return artifacts;
  }

  // --- Single run: split, cluster, sanitize, generate ----------------------
  const SplitSpec split_spec = SplitSpec::for_scenario(
      config.scenario, config.rng_seed, config.seed_fraction);
  auto [seed_raw, holdout_raw] = split_train_seed(raw, split_spec, &warnings);
  const auto ranges = fit_scaling(seed_raw);
  const ScaledTable seed = apply_scaling(seed_raw, ranges);
  for (const std::size_t f : seed.constant_features) {
    warnings.push_back("scale_to_unit: feature '" + seed.feature_names[f] +
                       "' is constant on the seed; mapped to zero");
  }
  report["split"] = {
      {"seed_rows", seed.n_rows()},
      {"holdout_rows", holdout_raw.n_rows()},
      {"seed_fraction", split_spec.seed_fraction},
  };

  const PartitionChoice choice = select_partition(seed, config.clustering);
  for (const std::size_t f : choice.zero_variance_features) {
    warnings.push_back("pearson_corr_matrix: feature '" +
                       seed.feature_names[f] +
                       "' has zero variance; correlation fixed at 0");
  }
  {
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& set : choice.partition.sets) {
      nlohmann::json names = nlohmann::json::array();
      for (const std::size_t f : set) names.push_back(seed.feature_names[f]);
      sets.push_back(std::move(names));
    }
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& [m, score] : choice.candidates) {
      candidates.push_back({{"m", m}, {"db_score", detail::json_number(score)}});
    }
    report["feature_partition"] = {
        {"m", choice.partition.m()},
        {"db_score", detail::json_number(choice.db_score)},
        {"sets", std::move(sets)},
        {"candidates", std::move(candidates)},
    };
  }

  PrivacyConfig privacy;
  privacy.epsilon_total = config.epsilon;
  privacy.k = config.k;
  privacy.budget_mode = config.budget_mode;
  privacy.rng_seed = config.rng_seed;
  GeneratorConfig generator_config;
  generator_config.multiplier = config.multiplier;
  generator_config.alignment = config.alignment;

  const std::map<std::string, ScaledTable> seed_classes = split_by_label(seed);
  SyntheticResult synthesis =
      generate(seed_classes, choice.partition, privacy, generator_config);
  if (config.clip) {
    synthesis.table.values =
        synthesis.table.values.cwiseMax(-1.0).cwiseMin(1.0);
  }
  warnings.insert(warnings.end(), synthesis.warnings.begin(),
                  synthesis.warnings.end());

  artifacts.synthetic_csv =
      std::filesystem::path(config.output_dir) / "synthetic.csv";
  write_synthetic_csv(artifacts.synthetic_csv, synthesis.table,
                      encoded.column_names[encoded.label_column],
                      encoded.label_column, config.scaled_output);

  // --- Audit sections -------------------------------------------------------
  {
    nlohmann::json clusters = nlohmann::json::object();
    for (const auto& [label, histograms] : synthesis.cluster_sizes) {
      // Cluster sizes depend only on (class size, k), so they must agree
      // across the feature sets of one class.
      for (const auto& histogram : histograms) {
        if (histogram != histograms.front()) {
          throw InternalError(
              "run: cluster size histograms differ across feature sets");
        }
      }
      clusters[label] = {
          {"k", privacy.k.resolve(seed_classes.at(label).n_rows())},
          {"per_ifs_sizes", histograms},
      };
    }
    report["clusters"] = std::move(clusters);
  }
  {
    nlohmann::json audit = nlohmann::json::array();
    for (const ClusterAudit& entry : synthesis.audits) {
      audit.push_back({
          {"class", entry.class_label},
          {"ifs_index", entry.ifs_index},
          {"cluster_index", entry.cluster_index},
          {"size", entry.size},
          {"epsilon_m", detail::json_number(entry.epsilon_m)},
          {"sensitivity", entry.sensitivity},
          {"laplace_scale", detail::json_number(entry.laplace_scale)},
      });
    }
    report["sanitizer_audit"] = std::move(audit);
  }
  {
    const std::vector<double> shares =
        budget_split(choice.partition, config.epsilon);
    double share_sum = 0.0;
    for (const double share : shares) share_sum += share;
    nlohmann::json shares_json = nlohmann::json::array();
    for (const double share : shares) shares_json.push_back(detail::json_number(share));
    const bool single = config.budget_mode == BudgetMode::kSingle;
    report["privacy_accounting"] = {
        {"budget_mode", to_string(config.budget_mode)},
        {"epsilon_total", detail::json_number(config.epsilon)},
        {"epsilon_shares", std::move(shares_json)},
        {"epsilon_share_sum", detail::json_number(share_sum)},
        {"releases_per_cluster", 2},
        {"sequential_composition_spend",
         detail::json_number(single ? 2.0 * config.epsilon : config.epsilon)},
        {"note",
         single ? "each cluster's mean and covariance release both consume "
                  "the full per-set share; the two releases compose to twice "
                  "epsilon_total"
                : "each release uses half the per-set share; the two "
                  "releases compose to exactly epsilon_total"},
    };
  }
  {
    std::vector<double> sensitivities;
    for (const auto& set : choice.partition.sets) {
      sensitivities.push_back(sensitivity(set, seed));
    }
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [label, histograms] : synthesis.cluster_sizes) {
      const NoiseReport class_report =
          build_noise_report(choice.partition.set_sizes(), histograms.front(),
                             sensitivities, config.epsilon, config.budget_mode);
      class_report.verify();
      per_class[label] = detail::to_json(class_report);
    }
    report["noise_accounting"] = std::move(per_class);
  }

  if (config.evaluate) {
    EvalConfig eval;
    eval.scenario = config.scenario;
    eval.seed_fraction = config.seed_fraction;
    eval.privacy = privacy;
    eval.generator = generator_config;
    eval.clustering = config.clustering;
    eval.logreg = config.logreg;
    eval.positive_class = positive;
    eval.clip = config.clip;
    eval.dataset_id = config.input_path;
    report["evaluation"] = detail::to_json(run_scenario(raw, eval,
                                                        config.repetitions));
  }

  report["warnings"] = warnings;
  std::ofstream json_out(artifacts.report_json, std::ios::binary);
  if (!json_out) {
    throw ValidationError("run",
                          "cannot write " + artifacts.report_json.string());
  }
  json_out << report.dump(2) << '\n';
  return artifacts;
}

}  // namespace mcgen

#endif  // MCGEN_PIPELINE_HPP_
