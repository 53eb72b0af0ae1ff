// Copyright 2026 The Fairbandit Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairbandit/environment.hpp"
#include "fairbandit/metrics.hpp"
#include "fairbandit/nested.hpp"
#include "fairbandit/thompson.hpp"

namespace fairbandit {

inline constexpr const char* kSoftwareVersion = "fairbandit 0.1.0";

enum class Mode { PerFeatureSet, Nested, Calibrate };

std::string_view name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

struct ExperimentConfig {
  Mode mode = Mode::PerFeatureSet;
  std::filesystem::path profile_path;
  std::vector<FeatureSet> feature_sets = default_feature_sets();
  double alpha = 0.3;
  // One prior per feature set; empty means Beta(1, 2) for every set.
  std::vector<BetaPrior> priors;
  PerformanceCriterion criterion;
  std::int64_t steps = 50000;
  int runs = 100;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  int parallelism = 1;
  // Cell name for nested runs.
  std::string nested_cell = "nested";
  // When false, run logs are not written; tables and figures still are.
  bool write_logs = true;
};

// Throws ConfigError for steps < 1, runs < 1, bad weights, bad priors, or
// invalid feature sets.
void validate(const ExperimentConfig& config);

// Relative paths in the document are resolved against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<BetaPrior> effective_priors(const ExperimentConfig& config);

// Seed-derivation key of a cell: the set id for per-feature-set cells and
// kNestedCellKey for nested ones, so two nested configurations that share a
// master seed see the same streams.
inline constexpr std::uint64_t kNestedCellKey = 1000;

enum class CellKind { PerFeatureSet, Nested };

struct RunResult {
  RunSummary summary;
  std::vector<std::int8_t> optimal_set_flags;
};

struct CellResult {
  std::string name;
  CellKind kind = CellKind::PerFeatureSet;
  std::vector<RunResult> runs;
};

// One plain-LinUCB run on a single feature set. Draws the run profile from
// streams.env first. `log` receives every record when non-null.
RunResult simulate_linucb_run(const EnvProfile& profile, const FeatureSet& set,
                              double alpha, std::int64_t steps,
                              RunStreams& streams, RunLog* log = nullptr);

// One nested run with fresh state.
RunResult simulate_nested_run(const EnvProfile& profile,
                              const std::vector<FeatureSet>& sets,
                              const std::vector<BetaPrior>& priors,
                              double alpha,
                              const PerformanceCriterion& criterion,
                              std::int64_t steps, RunStreams& streams,
                              RunLog* log = nullptr);

// Calls fn(i) for i in [0, n) on up to `parallelism` threads and rethrows the
// first exception.
void parallel_for(std::size_t n, int parallelism,
                  const std::function<void(std::size_t)>& fn);

struct Manifest {
  nlohmann::json doc;
};

// Runs every cell of a PerFeatureSet or Nested config in memory, writing run
// logs to output_dir/runs when config.write_logs is set.
std::vector<CellResult> run_cells(const ExperimentConfig& config,
                                  const EnvProfile& profile,
                                  std::vector<std::string>* warnings = nullptr);

// Full `run` pipeline: cells, tables, figures, manifest.
Manifest run_per_feature_set(const ExperimentConfig& config);
Manifest run_nested(const ExperimentConfig& config);
Manifest run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  std::string metric;  // average_reward | suboptimal_fraction
  std::string cell;
  Gender gender = Gender::Man;
  int runs = 0;
  double mean = 0.0;
  double std = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string hypothesis;  // H1 | H2 | H3
  double p_value = 1.0;
  double cohens_d = 0.0;  // women vs men on the raw metric
  double p_h1 = 1.0;
  double p_h2 = 1.0;
  double p_h3 = 1.0;
  double p_pooled = 1.0;  // pooled-variance t-test for the labelled hypothesis
};

struct CriterionRow {
  std::string cell;
  int runs = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_reward = 0.0;
  double mean_gap = 0.0;
};

struct AggregateResult {
  std::vector<SummaryRow> summary;
  std::vector<CriterionRow> criterion;
  std::array<nlohmann::json, 4> figures;
};

inline constexpr double kSignificance = 0.05;

// Tables and figure series from per-run results. Throws DegenerateDataError
// naming the cell when a cell has no runs or a gender is missing.
AggregateResult aggregate_cells(const std::vector<CellResult>& cells,
                                const PerformanceCriterion& criterion);

// Reads runs/<cell>/<run>.csv under log_dir.
std::vector<CellResult> read_cells(const std::filesystem::path& log_dir);

// Writes tables/summary.csv, tables/criterion.csv and figures/fig1..4.json;
// returns the written paths relative to out_dir.
std::vector<std::filesystem::path> write_aggregate(
    const AggregateResult& result, const std::filesystem::path& out_dir);

// `aggregate` subcommand.
std::vector<std::filesystem::path> aggregate(
    const std::filesystem::path& log_dir, const std::filesystem::path& out_dir,
    const PerformanceCriterion& criterion = {});

// Ground-truth calibration: per-feature-set runs (>= 20), run-level criterion
// per set, argmax written to the returned profile together with the table.
EnvProfile calibrate(const ExperimentConfig& config, const EnvProfile& profile);

std::string summary_csv(const std::vector<SummaryRow>& rows);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace fairbandit
