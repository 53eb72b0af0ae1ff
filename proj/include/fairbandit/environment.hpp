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
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "fairbandit/random.hpp"
#include "fairbandit/types.hpp"

namespace fairbandit {

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;
using ActionVector = Eigen::Matrix<double, kNumActions, 1>;

struct Interaction {
  Gender gender = Gender::Man;
  int cluster = 1;  // 1..3
  int session = 1;  // 1..10
  FeatureVector features = FeatureVector::Zero();
};

// Normalized session index stored in the SessionNumber feature.
constexpr double session_feature(int session) {
  return static_cast<double>(session - 1) / (kNumSessions - 1);
}

// Linear expected reward per action, clipped to [0, 1] on evaluation.
struct RewardModel {
  Eigen::Matrix<double, kNumActions, kNumFeatures> weights =
      Eigen::Matrix<double, kNumActions, kNumFeatures>::Zero();
  ActionVector intercept = ActionVector::Zero();
  ActionVector noise_std = ActionVector::Zero();
};

// Per-run random shifts of the action intercepts. A common shift moves every
// action by the same amount; per-action shifts move them independently.
struct RunEffects {
  double intercept_shift_std = 0.0;
  double action_shift_std = 0.0;

  bool active() const {
    return intercept_shift_std > 0.0 || action_shift_std > 0.0;
  }
};

struct EnvProfile {
  static constexpr int kSchemaVersion = 1;

  std::string name = "unnamed";
  double woman_proportion = 0.125;
  std::array<double, kNumClusters> cluster_distribution{};
  std::array<double, kNumSessions> session_distribution{};
  // Indexed [gender][cluster - 1][session - 1].
  std::array<std::array<std::array<FeatureVector, kNumSessions>, kNumClusters>,
             kNumGenders>
      feature_means{};
  std::array<std::array<std::array<FeatureVector, kNumSessions>, kNumClusters>,
             kNumGenders>
      feature_stds{};
  RewardModel reward_model;
  RunEffects run_effects;
  std::optional<int> optimal_feature_set_index;
  // Free-form calibration record, carried through serialization untouched.
  nlohmann::json calibration;

  const FeatureVector& mean(Gender g, int cluster, int session) const {
    return feature_means[index(g)][cluster - 1][session - 1];
  }
  FeatureVector& mean(Gender g, int cluster, int session) {
    return feature_means[index(g)][cluster - 1][session - 1];
  }
  const FeatureVector& stddev(Gender g, int cluster, int session) const {
    return feature_stds[index(g)][cluster - 1][session - 1];
  }
  FeatureVector& stddev(Gender g, int cluster, int session) {
    return feature_stds[index(g)][cluster - 1][session - 1];
  }
};

// Uniform cluster/session distributions, all means 0.5, all stds 0, zero
// reward model. A starting point for hand-built profiles.
EnvProfile blank_profile();

// Throws ConfigError when a distribution is not normalized within 1e-9, a
// probability or mean falls outside [0, 1], or a std is negative.
void validate(const EnvProfile& profile);

Interaction sample_interaction(const EnvProfile& profile, RandomStream& rng);

// clip(intercept + weights . features, 0, 1), no discount.
double base_reward(const EnvProfile& profile, const Interaction& interaction,
                   ActionId action);

// Base reward plus the action discount.
double expected_reward(const EnvProfile& profile,
                       const Interaction& interaction, ActionId action);

// clip(base + N(0, sigma_a), 0, 1) + discount.
double realize_reward(const EnvProfile& profile,
                      const Interaction& interaction, ActionId action,
                      RandomStream& rng);

// Argmax of expected_reward; ties go to the lowest action index.
ActionId optimal_action(const EnvProfile& profile,
                        const Interaction& interaction);

// Applies the profile's run effects, returning a profile with shifted
// intercepts and no run effects. Consumes nothing from `rng` when the profile
// has no run effects.
EnvProfile draw_run_profile(const EnvProfile& profile, RandomStream& rng);

// JSON schema: see README. Feature means/stds are keyed
// "<Gender>.<cluster>.<session>.<Feature>".
nlohmann::json profile_to_json(const EnvProfile& profile);
EnvProfile profile_from_json(const nlohmann::json& doc);

EnvProfile load_profile(const std::filesystem::path& path);
void save_profile(const EnvProfile& profile, const std::filesystem::path& path);

}  // namespace fairbandit
