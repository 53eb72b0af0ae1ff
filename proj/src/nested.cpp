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

#include "fairbandit/nested.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairbandit/error.hpp"

namespace fairbandit {

void validate(const FeatureSet& set) {
  if (set.members.empty()) throw ConfigError("feature set is empty");
  if (set.members.size() < kMinFeatureSetSize) {
    throw ConfigError("feature set " + feature_set_label(set.id) +
                      " has fewer than three features");
  }
  std::array<bool, kNumFeatures> seen{};
  for (FeatureId f : set.members) {
    if (seen[index(f)]) {
      throw ConfigError("feature set " + feature_set_label(set.id) +
                        " repeats " + std::string(name(f)));
    }
    seen[index(f)] = true;
  }
}

std::vector<FeatureSet> default_feature_sets() {
  using F = FeatureId;
  const std::vector<F> core = {F::PainIntensityChange, F::CbtSkillPractice};
  auto make = [&](int id, std::vector<F> extra) {
    FeatureSet s{id, core};
    s.members.insert(s.members.end(), extra.begin(), extra.end());
    return s;
  };
  return {
      make(0, {F::SleepQuality, F::SleepDuration, F::PainInterfere1,
               F::PainInterfere2, F::StepsGoalPct, F::SessionNumber}),
      make(1, {F::SleepQuality, F::SleepDuration, F::StepsGoalPct,
               F::SessionNumber}),
      make(2, {F::SleepQuality, F::SleepDuration, F::PainInterfere2,
               F::StepsGoalPct, F::SessionNumber}),
      make(3, {F::SleepQuality, F::SleepDuration, F::PainInterfere1,
               F::StepsGoalPct, F::SessionNumber}),
      make(4, {F::PainInterfere1, F::PainInterfere2, F::StepsGoalPct,
               F::SessionNumber}),
      make(5, {F::SleepQuality, F::SleepDuration, F::PainInterfere1,
               F::PainInterfere2, F::SessionNumber}),
  };
}

namespace {

std::vector<BetaPrior> checked_priors(const std::vector<FeatureSet>& sets,
                                      std::vector<BetaPrior> priors) {
  if (sets.empty()) throw ConfigError("nested: no feature sets");
  if (priors.size() != sets.size()) {
    throw ConfigError("nested: need one prior per feature set");
  }
  return priors;
}

}  // namespace

std::string feature_set_label(int id) { return "set" + std::to_string(id + 1); }

Eigen::VectorXd project_context(const Interaction& interaction,
                                const FeatureSet& set) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(set.members.size()));
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] =
        interaction.features[static_cast<Eigen::Index>(index(set.members[i]))];
  }
  return x;
}

void FairnessTracker::record(int set, Gender gender, double reward) {
  Cell& c = cells_.at(static_cast<std::size_t>(set))[index(gender)];
  ++c.n;
  c.mean += (reward - c.mean) / static_cast<double>(c.n);
}

std::int64_t FairnessTracker::count(int set, Gender gender) const {
  return cells_.at(static_cast<std::size_t>(set))[index(gender)].n;
}

double FairnessTracker::mean(int set, Gender gender) const {
  return cells_.at(static_cast<std::size_t>(set))[index(gender)].mean;
}

double FairnessTracker::gap(int set) const {
  const auto& cell = cells_.at(static_cast<std::size_t>(set));
  const Cell& men = cell[index(Gender::Man)];
  const Cell& women = cell[index(Gender::Woman)];
  if (men.n == 0 || women.n == 0) return 0.0;
  return std::abs(men.mean - women.mean);
}

double policy1_feedback(const PerformanceCriterion& criterion, double reward,
                        const FairnessTracker& tracker, int chosen_set) {
  const double utility = std::clamp(reward, 0.0, 1.0);
  const double fairness = 1.0 - tracker.gap(chosen_set);
  return std::clamp(criterion.utility_weight * utility +
                        criterion.fairness_weight * fairness,
                    0.0, 1.0);
}

NestedRecommender::NestedRecommender(std::vector<FeatureSet> feature_sets,
                                     std::vector<BetaPrior> priors,
                                     double alpha,
                                     PerformanceCriterion criterion)
    : sets_(std::move(feature_sets)),
      level1_(checked_priors(sets_, std::move(priors))),
      tracker_(sets_.size()),
      criterion_(criterion) {
  validate(criterion_);
  level2_.reserve(sets_.size());
  for (const FeatureSet& s : sets_) {
    validate(s);
    level2_.emplace_back(static_cast<int>(s.members.size()), alpha,
                         static_cast<int>(kNumActions));
  }
}

StepRecord NestedRecommender::step(std::int64_t t,
                                   const Interaction& interaction,
                                   const EnvProfile& profile,
                                   RunStreams& streams) {
  const int set = level1_.select(streams.policy);
  const Eigen::VectorXd x = project_context(interaction, sets_[set]);
  LinUcbd& policy2 = level2_[static_cast<std::size_t>(set)];
  const auto action = static_cast<ActionId>(policy2.select(x).arm);
  const double reward = realize_reward(profile, interaction, action, streams.env);
  policy2.update(static_cast<int>(index(action)), x, reward);
  tracker_.record(set, interaction.gender, reward);
  level1_.update(set, policy1_feedback(criterion_, reward, tracker_, set),
                 streams.policy);

  StepRecord rec;
  rec.t = t;
  rec.set_id = sets_[static_cast<std::size_t>(set)].id;
  rec.action = action;
  rec.reward = reward;
  rec.gender = interaction.gender;
  rec.cluster = interaction.cluster;
  rec.session = interaction.session;
  rec.is_optimal_action = action == optimal_action(profile, interaction);
  if (profile.optimal_feature_set_index) {
    rec.is_optimal_set = rec.set_id == *profile.optimal_feature_set_index;
  }
  return rec;
}

}  // namespace fairbandit
