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

#include "fairbandit/profiles.hpp"

#include <algorithm>
#include <tuple>
#include <utility>

namespace fairbandit {

EnvProfile make_profile(const ProfileDesign& d) {
  EnvProfile p = blank_profile();
  p.name = d.name;
  p.woman_proportion = d.woman_proportion;
  for (Gender g : kAllGenders) {
    for (int c = 1; c <= kNumClusters; ++c) {
      for (int s = 1; s <= kNumSessions; ++s) {
        FeatureVector m = d.base_mean + d.cluster_offset[c - 1] +
                          d.session_slope * session_feature(s);
        if (g == Gender::Woman) m += d.women_shift[c - 1];
        m = m.cwiseMax(0.0).cwiseMin(1.0);
        m[index(FeatureId::SessionNumber)] = session_feature(s);
        FeatureVector sd = g == Gender::Woman ? d.women_std : d.men_std;
        sd[index(FeatureId::SessionNumber)] = 0.0;
        p.mean(g, c, s) = m;
        p.stddev(g, c, s) = sd;
      }
    }
  }
  for (const MeanOverride& o : d.overrides) {
    p.mean(o.gender, o.cluster, o.session)[index(o.feature)] =
        std::clamp(o.value, 0.0, 1.0);
  }
  p.reward_model = d.reward_model;
  p.run_effects = d.run_effects;
  return p;
}

ProfileDesign neutral_design() {
  ProfileDesign d;
  d.name = "neutral";
  d.men_std = FeatureVector::Constant(0.15);
  d.women_std = d.men_std;
  d.cluster_offset[0][index(FeatureId::StepsGoalPct)] = 0.1;
  d.cluster_offset[2][index(FeatureId::StepsGoalPct)] = -0.1;
  auto& rm = d.reward_model;
  rm.intercept << 0.40, 0.38, 0.36;
  rm.weights.row(0) << 0.05, 0.00, 0.05, 0.02, 0.02, -0.05, -0.05, 0.00;
  rm.weights.row(1) << 0.00, 0.05, 0.05, 0.05, 0.05, 0.05, 0.00, -0.02;
  rm.weights.row(2) << -0.05, 0.10, 0.05, 0.02, 0.02, 0.10, 0.10, -0.05;
  rm.noise_std.setConstant(0.15);
  return d;
}

EnvProfile neutral_profile() { return make_profile(neutral_design()); }

ProfileDesign calibrated_design() {
  ProfileDesign d;
  d.name = "calibrated";
  d.men_std << 0.01, 0.15, 0.10, 0.02, 0.02, 0.01, 0.01, 0.0;
  d.women_std = d.men_std;

  // Pain items and step count carry the action preference; a woman's cell
  // moves exactly one of them, so a set that hides it misreads her.
  constexpr double kShift = 0.3;
  const std::array<const char*, kNumClusters> pattern = {
      "1212121212", "2121212121", "SSSS12SS12"};
  for (int c = 1; c <= kNumClusters; ++c) {
    for (int s = 1; s <= kNumSessions; ++s) {
      switch (pattern[c - 1][s - 1]) {
        case '1':
          d.overrides.push_back({Gender::Woman, c, s, FeatureId::PainInterfere1,
                                 0.5 + kShift});
          break;
        case '2':
          d.overrides.push_back({Gender::Woman, c, s, FeatureId::PainInterfere2,
                                 0.5 + kShift});
          break;
        case 'S':
          d.overrides.push_back({Gender::Woman, c, s, FeatureId::StepsGoalPct,
                                 0.5 - kShift});
          break;
      }
    }
  }
  // Raised sleep scores in two women's cells.
  for (auto [c, s, v] : {std::tuple{1, 5, 1.0}, std::tuple{2, 6, 0.598}}) {
    d.overrides.push_back({Gender::Woman, c, s, FeatureId::SleepQuality, v});
    d.overrides.push_back({Gender::Woman, c, s, FeatureId::SleepDuration, v});
  }
  // Women practise slightly less; this lowers every action alike.
  for (auto& shift : d.women_shift) shift[index(FeatureId::CbtSkillPractice)] = -0.06;

  // Levels at the mean context and the slopes along the shifted direction.
  const double mu = 0.45;
  const ActionVector level(mu, mu, mu - 0.1);
  const double p45 = level[2] + discount(ActionId::Phone45) + 0.2;
  const double p15_slope = p45 - 0.2 - (level[1] + discount(ActionId::Phone15));
  const ActionVector slope = ActionVector(-0.2, p15_slope, 0.2) / kShift;

  auto& rm = d.reward_model;
  rm.weights.col(index(FeatureId::StepsGoalPct)) = -slope;
  rm.weights.col(index(FeatureId::PainInterfere1)) = slope;
  rm.weights.col(index(FeatureId::PainInterfere2)) = slope;
  rm.weights.col(index(FeatureId::PainIntensityChange)) << -0.3, 0.3, 0.0;
  rm.weights(1, index(FeatureId::SleepQuality)) = 1.0;
  rm.weights(1, index(FeatureId::SleepDuration)) = 1.0;
  rm.weights.col(index(FeatureId::CbtSkillPractice)).setConstant(0.1);
  rm.intercept = level - rm.weights * FeatureVector::Constant(0.5);
  rm.noise_std.setConstant(0.1);
  d.run_effects.intercept_shift_std = 0.03;
  return d;
}

EnvProfile calibrated_profile() {
  EnvProfile p = make_profile(calibrated_design());
  // fairbandit calibrate --runs 40 --steps 50000 --seed 2026
  p.optimal_feature_set_index = 4;
  return p;
}

}  // namespace fairbandit
