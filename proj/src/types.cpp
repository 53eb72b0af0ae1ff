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

#include "fairbandit/types.hpp"

namespace fairbandit {
namespace {

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "StepsGoalPct",   "PainIntensityChange", "CbtSkillPractice",
    "SleepQuality",   "SleepDuration",       "PainInterfere1",
    "PainInterfere2", "SessionNumber"};
constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "IvrCall", "Phone15", "Phone45"};
constexpr std::array<std::string_view, kNumGenders> kGenderNames = {"Man",
                                                                    "Woman"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names,
                           std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view name(FeatureId f) { return kFeatureNames[index(f)]; }
std::string_view name(ActionId a) { return kActionNames[index(a)]; }
std::string_view name(Gender g) { return kGenderNames[index(g)]; }

std::optional<FeatureId> parse_feature(std::string_view s) {
  return lookup<FeatureId>(kFeatureNames, s);
}
std::optional<ActionId> parse_action(std::string_view s) {
  return lookup<ActionId>(kActionNames, s);
}
std::optional<Gender> parse_gender(std::string_view s) {
  return lookup<Gender>(kGenderNames, s);
}

}  // namespace fairbandit
