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

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "fairbandit/environment.hpp"
#include "fairbandit/linucb.hpp"
#include "fairbandit/metrics.hpp"
#include "fairbandit/random.hpp"
#include "fairbandit/thompson.hpp"

namespace fairbandit {

struct FeatureSet {
  int id = 0;
  std::vector<FeatureId> members;
};

inline constexpr std::size_t kMinFeatureSetSize = 3;

// Throws ConfigError for an empty set, duplicates, or fewer than three members.
void validate(const FeatureSet& set);

// The six candidate sets compared in the experiments, ids 0..5.
std::vector<FeatureSet> default_feature_sets();

std::string feature_set_label(int id);  // "set1" for id 0

// The set's members, in the set's order, pulled from the 8-feature vector.
Eigen::VectorXd project_context(const Interaction& interaction,
                                const FeatureSet& set);

// Running per-(set, gender) reward means.
class FairnessTracker {
 public:
  explicit FairnessTracker(std::size_t num_sets = 0) : cells_(num_sets) {}

  void record(int set, Gender gender, double reward);
  std::int64_t count(int set, Gender gender) const;
  double mean(int set, Gender gender) const;
  // |m_Man - m_Woman|, or 0 until both genders have been seen for the set.
  double gap(int set) const;

 private:
  struct Cell {
    std::int64_t n = 0;
    double mean = 0.0;
  };
  std::vector<std::array<Cell, kNumGenders>> cells_;
};

// clip(w_u * clip(reward, 0, 1) + w_f * (1 - gap(set)), 0, 1). The tracker is
// expected to already include this step's reward.
double policy1_feedback(const PerformanceCriterion& criterion, double reward,
                        const FairnessTracker& tracker, int chosen_set);

/// Two-level recommender: Thompson Sampling picks a feature set, that set's
/// own LinUCB picks the care action, and the realized reward updates both.
class NestedRecommender {
 public:
  NestedRecommender(std::vector<FeatureSet> feature_sets,
                    std::vector<BetaPrior> priors, double alpha,
                    PerformanceCriterion criterion);

  // One decision step at time `t`. Uses streams.policy for the level-1 draw
  // and Bernoulli feedback, streams.env for reward noise.
  StepRecord step(std::int64_t t, const Interaction& interaction,
                  const EnvProfile& profile, RunStreams& streams);

  const std::vector<FeatureSet>& feature_sets() const { return sets_; }
  const BetaBernoulliTs& level1() const { return level1_; }
  const LinUcbd& level2(int set) const { return level2_.at(set); }
  const FairnessTracker& tracker() const { return tracker_; }
  const PerformanceCriterion& criterion() const { return criterion_; }

 private:
  std::vector<FeatureSet> sets_;
  BetaBernoulliTs level1_;
  std::vector<LinUcbd> level2_;
  FairnessTracker tracker_;
  PerformanceCriterion criterion_;
};

}  // namespace fairbandit
