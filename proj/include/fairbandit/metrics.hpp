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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairbandit/types.hpp"

namespace fairbandit {

struct StepRecord {
  std::int64_t t = 0;  // 1-based
  std::optional<int> set_id;
  ActionId action = ActionId::IvrCall;
  double reward = 0.0;
  Gender gender = Gender::Man;
  int cluster = 1;
  int session = 1;
  bool is_optimal_action = false;
  std::optional<bool> is_optimal_set;
};

using RunLog = std::vector<StepRecord>;

struct PerformanceCriterion {
  double utility_weight = 0.5;
  double fairness_weight = 0.5;
};

// Throws ConfigError unless both weights are >= 0 and sum to 1.
void validate(const PerformanceCriterion& criterion);

struct GenderStats {
  std::int64_t count = 0;
  double mean_reward = 0.0;
  double reward_std = 0.0;  // sample std within the run
  double suboptimal_fraction = 0.0;
};

struct RunSummary {
  std::array<std::optional<GenderStats>, kNumGenders> by_gender;
  std::int64_t count = 0;
  double mean_reward = 0.0;
  // |mean(Man) - mean(Woman)|; absent unless both genders are present.
  std::optional<double> fairness_gap;

  const std::optional<GenderStats>& operator[](Gender g) const {
    return by_gender[index(g)];
  }
};

// Streaming fold over step records. Metric functions and in-run summaries
// both go through this class, so they agree bit-for-bit.
class RunAccumulator {
 public:
  void add(const StepRecord& r);
  RunSummary summary() const;

  // Per-step optimal-set flags (-1 unknown, 0 no, 1 yes), in step order.
  const std::vector<std::int8_t>& optimal_set_flags() const { return flags_; }

 private:
  struct Moments {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t suboptimal = 0;
  };
  std::array<Moments, kNumGenders> by_gender_{};
  Moments all_{};
  std::vector<std::int8_t> flags_;
  std::int64_t last_t_ = 0;
};

RunSummary summarize(std::span<const StepRecord> log);

std::map<Gender, double> per_gender_average_reward(
    std::span<const StepRecord> log);
std::map<Gender, double> suboptimal_fraction(std::span<const StepRecord> log);

// Fraction of records with t <= up_to whose set was optimal. Throws
// MetricError if any such record has unknown set-optimality or none exist.
double cumulative_optimal_set_fraction(std::span<const StepRecord> log,
                                       std::int64_t up_to);

// Same over lo <= t <= hi.
double interval_optimal_set_fraction(std::span<const StepRecord> log,
                                     std::int64_t lo, std::int64_t hi);

// Flag-array forms used by the aggregator; flags[i] belongs to t = i + 1.
double cumulative_optimal_set_fraction(std::span<const std::int8_t> flags,
                                       std::int64_t up_to);
double interval_optimal_set_fraction(std::span<const std::int8_t> flags,
                                     std::int64_t lo, std::int64_t hi);

// w_u * overall mean + w_f * (1 - gap). Throws MetricError if a gender is
// missing from the summary.
double criterion_value(const RunSummary& summary,
                       const PerformanceCriterion& criterion);

// Run-log CSV: header line then
// t,setId,action,reward,gender,cluster,session,isOptimalAction,isOptimalSet
// Rewards use shortest round-trip formatting; unknown fields are empty.
void write_run_log(const std::filesystem::path& path,
                   std::span<const StepRecord> log);
RunLog read_run_log(const std::filesystem::path& path);

std::string format_record(const StepRecord& r);
StepRecord parse_record(const std::string& line);

inline constexpr const char* kRunLogHeader =
    "t,setId,action,reward,gender,cluster,session,isOptimalAction,"
    "isOptimalSet";

}  // namespace fairbandit
