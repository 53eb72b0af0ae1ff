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
#include <string>
#include <vector>

#include "fairbandit/environment.hpp"

namespace fairbandit {

// Compact description of an EnvProfile. Feature means for a man in cluster c,
// session s are base + cluster_offset[c] + session_slope * (s - 1) / 9;
// women add women_shift[c]. Overrides then replace single means. Everything is
// clipped into [0, 1].
struct MeanOverride {
  Gender gender = Gender::Woman;
  int cluster = 1;
  int session = 1;
  FeatureId feature = FeatureId::SleepQuality;
  double value = 0.0;
};

struct ProfileDesign {
  std::string name = "design";
  double woman_proportion = 0.125;
  FeatureVector base_mean = FeatureVector::Constant(0.5);
  std::array<FeatureVector, kNumClusters> women_shift{
      FeatureVector::Zero(), FeatureVector::Zero(), FeatureVector::Zero()};
  FeatureVector men_std = FeatureVector::Zero();
  FeatureVector women_std = FeatureVector::Zero();
  std::array<FeatureVector, kNumClusters> cluster_offset{
      FeatureVector::Zero(), FeatureVector::Zero(), FeatureVector::Zero()};
  FeatureVector session_slope = FeatureVector::Zero();
  std::vector<MeanOverride> overrides;
  RewardModel reward_model;
  RunEffects run_effects;
};

EnvProfile make_profile(const ProfileDesign& design);

// No gender-differential structure: both genders share every distribution.
ProfileDesign neutral_design();
EnvProfile neutral_profile();

// Tuned so that LinUCB over the default feature sets favours women on set1,
// disfavours them on sets 2, 3, 4 and 6 and treats both alike on set5.
// The optimal feature set index comes from an offline calibration run.
ProfileDesign calibrated_design();
EnvProfile calibrated_profile();

}  // namespace fairbandit
