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
#include <cstddef>
#include <optional>
#include <string_view>

namespace fairbandit {

inline constexpr std::size_t kNumFeatures = 8;
inline constexpr std::size_t kNumActions = 3;
inline constexpr std::size_t kNumGenders = 2;
inline constexpr int kNumClusters = 3;
inline constexpr int kNumSessions = 10;

// Canonical feature order.
enum class FeatureId : int {
  StepsGoalPct = 0,
  PainIntensityChange,
  CbtSkillPractice,
  SleepQuality,
  SleepDuration,
  PainInterfere1,
  PainInterfere2,
  SessionNumber,
};

enum class Gender : int { Man = 0, Woman = 1 };

enum class ActionId : int { IvrCall = 0, Phone15 = 1, Phone45 = 2 };

inline constexpr std::array<FeatureId, kNumFeatures> kAllFeatures = {
    FeatureId::StepsGoalPct,   FeatureId::PainIntensityChange,
    FeatureId::CbtSkillPractice, FeatureId::SleepQuality,
    FeatureId::SleepDuration,  FeatureId::PainInterfere1,
    FeatureId::PainInterfere2, FeatureId::SessionNumber};

inline constexpr std::array<ActionId, kNumActions> kAllActions = {
    ActionId::IvrCall, ActionId::Phone15, ActionId::Phone45};

inline constexpr std::array<Gender, kNumGenders> kAllGenders = {Gender::Man,
                                                                Gender::Woman};

constexpr std::size_t index(FeatureId f) { return static_cast<std::size_t>(f); }
constexpr std::size_t index(ActionId a) { return static_cast<std::size_t>(a); }
constexpr std::size_t index(Gender g) { return static_cast<std::size_t>(g); }

// Additive penalty for therapist time.
constexpr double discount(ActionId a) {
  switch (a) {
    case ActionId::IvrCall:
      return 0.0;
    case ActionId::Phone15:
      return -0.02;
    case ActionId::Phone45:
      return -0.06;
  }
  return 0.0;
}

inline constexpr double kMinReward = -0.06;
inline constexpr double kMaxReward = 1.0;

std::string_view name(FeatureId f);
std::string_view name(ActionId a);
std::string_view name(Gender g);

std::optional<FeatureId> parse_feature(std::string_view s);
std::optional<ActionId> parse_action(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);

}  // namespace fairbandit
