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

#include "fairbandit/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fairbandit/error.hpp"

namespace fairbandit {
namespace {

constexpr double kNormTolerance = 1e-9;

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

template <std::size_t N>
void check_distribution(const std::array<double, N>& probs,
                        const char* what) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string(what) + ": probability outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw ConfigError(std::string(what) + ": probabilities sum to " +
                      std::to_string(sum) + ", expected 1");
  }
}

std::string cell_key(Gender g, int cluster, int session, FeatureId f) {
  std::ostringstream os;
  os << name(g) << '.' << cluster << '.' << session << '.' << name(f);
  return os.str();
}

template <typename Fn>
void for_each_cell(Fn&& fn) {
  for (Gender g : kAllGenders) {
    for (int c = 1; c <= kNumClusters; ++c) {
      for (int s = 1; s <= kNumSessions; ++s) fn(g, c, s);
    }
  }
}

}  // namespace

EnvProfile blank_profile() {
  EnvProfile p;
  p.cluster_distribution.fill(1.0 / kNumClusters);
  p.session_distribution.fill(1.0 / kNumSessions);
  for_each_cell([&](Gender g, int c, int s) {
    p.mean(g, c, s).setConstant(0.5);
    p.mean(g, c, s)[index(FeatureId::SessionNumber)] = session_feature(s);
    p.stddev(g, c, s).setZero();
  });
  return p;
}

void validate(const EnvProfile& profile) {
  if (!(profile.woman_proportion >= 0.0 && profile.woman_proportion <= 1.0)) {
    throw ConfigError("womanProportion outside [0,1]");
  }
  check_distribution(profile.cluster_distribution, "clusterDistribution");
  check_distribution(profile.session_distribution, "sessionDistribution");
  for_each_cell([&](Gender g, int c, int s) {
    const FeatureVector& m = profile.mean(g, c, s);
    const FeatureVector& sd = profile.stddev(g, c, s);
    for (FeatureId f : kAllFeatures) {
      const double mv = m[index(f)];
      const double sv = sd[index(f)];
      if (!(mv >= 0.0 && mv <= 1.0)) {
        throw ConfigError("feature mean outside [0,1] at " +
                          cell_key(g, c, s, f));
      }
      if (!(sv >= 0.0) || !std::isfinite(sv)) {
        throw ConfigError("negative feature std at " + cell_key(g, c, s, f));
      }
    }
  });
  const RewardModel& rm = profile.reward_model;
  if (!rm.weights.allFinite() || !rm.intercept.allFinite()) {
    throw ConfigError("reward model has non-finite coefficients");
  }
  if (!((rm.noise_std.array() >= 0.0).all()) || !rm.noise_std.allFinite()) {
    throw ConfigError("reward noise std must be finite and >= 0");
  }
  if (profile.run_effects.intercept_shift_std < 0.0 ||
      profile.run_effects.action_shift_std < 0.0) {
    throw ConfigError("run effect stds must be >= 0");
  }
}

Interaction sample_interaction(const EnvProfile& profile, RandomStream& rng) {
  check_distribution(profile.cluster_distribution, "clusterDistribution");
  check_distribution(profile.session_distribution, "sessionDistribution");

  Interaction it;
  it.gender = rng.bernoulli(profile.woman_proportion) ? Gender::Woman
                                                       : Gender::Man;
  it.cluster = static_cast<int>(rng.categorical(profile.cluster_distribution)) + 1;
  it.session = static_cast<int>(rng.categorical(profile.session_distribution)) + 1;
  const FeatureVector& m = profile.mean(it.gender, it.cluster, it.session);
  const FeatureVector& sd = profile.stddev(it.gender, it.cluster, it.session);
  for (FeatureId f : kAllFeatures) {
    if (f == FeatureId::SessionNumber) continue;
    const std::size_t i = index(f);
    it.features[i] = clip01(rng.normal(m[i], sd[i]));
  }
  it.features[index(FeatureId::SessionNumber)] = session_feature(it.session);
  return it;
}

double base_reward(const EnvProfile& profile, const Interaction& interaction,
                   ActionId action) {
  const RewardModel& rm = profile.reward_model;
  const auto a = static_cast<Eigen::Index>(index(action));
  return clip01(rm.intercept[a] + rm.weights.row(a).dot(interaction.features));
}

double expected_reward(const EnvProfile& profile,
                       const Interaction& interaction, ActionId action) {
  return base_reward(profile, interaction, action) + discount(action);
}

double realize_reward(const EnvProfile& profile,
                      const Interaction& interaction, ActionId action,
                      RandomStream& rng) {
  const double base = base_reward(profile, interaction, action);
  const double sigma =
      profile.reward_model.noise_std[static_cast<Eigen::Index>(index(action))];
  return clip01(rng.normal(base, sigma)) + discount(action);
}

ActionId optimal_action(const EnvProfile& profile,
                        const Interaction& interaction) {
  ActionId best = ActionId::IvrCall;
  double best_value = expected_reward(profile, interaction, best);
  for (ActionId a : kAllActions) {
    const double v = expected_reward(profile, interaction, a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

EnvProfile draw_run_profile(const EnvProfile& profile, RandomStream& rng) {
  EnvProfile run = profile;
  const RunEffects& fx = profile.run_effects;
  if (!fx.active()) return run;
  const double common = rng.normal(0.0, fx.intercept_shift_std);
  for (ActionId a : kAllActions) {
    run.reward_model.intercept[static_cast<Eigen::Index>(index(a))] +=
        common + rng.normal(0.0, fx.action_shift_std);
  }
  run.run_effects = RunEffects{};
  return run;
}

nlohmann::json profile_to_json(const EnvProfile& profile) {
  using nlohmann::json;
  json doc;
  doc["schemaVersion"] = EnvProfile::kSchemaVersion;
  doc["name"] = profile.name;
  doc["womanProportion"] = profile.woman_proportion;
  doc["clusterDistribution"] = profile.cluster_distribution;
  doc["sessionDistribution"] = profile.session_distribution;
  json means = json::object();
  json stds = json::object();
  for_each_cell([&](Gender g, int c, int s) {
    for (FeatureId f : kAllFeatures) {
      const std::string key = cell_key(g, c, s, f);
      means[key] = profile.mean(g, c, s)[index(f)];
      stds[key] = profile.stddev(g, c, s)[index(f)];
    }
  });
  doc["featureMeans"] = std::move(means);
  doc["featureStds"] = std::move(stds);

  json actions = json::object();
  const RewardModel& rm = profile.reward_model;
  for (ActionId a : kAllActions) {
    const auto ai = static_cast<Eigen::Index>(index(a));
    json weights = json::object();
    for (FeatureId f : kAllFeatures) {
      weights[std::string(name(f))] =
          rm.weights(ai, static_cast<Eigen::Index>(index(f)));
    }
    actions[std::string(name(a))] = {{"intercept", rm.intercept[ai]},
                                     {"weights", std::move(weights)},
                                     {"noiseStd", rm.noise_std[ai]}};
  }
  doc["rewardModel"] = {{"actions", std::move(actions)}};
  doc["runEffects"] = {
      {"interceptShiftStd", profile.run_effects.intercept_shift_std},
      {"actionShiftStd", profile.run_effects.action_shift_std}};
  if (profile.optimal_feature_set_index) {
    doc["optimalFeatureSetIndex"] = *profile.optimal_feature_set_index;
  } else {
    doc["optimalFeatureSetIndex"] = nullptr;
  }
  if (!profile.calibration.is_null()) doc["calibration"] = profile.calibration;
  return doc;
}

EnvProfile profile_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.contains("schemaVersion")) {
      throw ConfigError("profile: missing schemaVersion");
    }
    if (doc.at("schemaVersion").get<int>() != EnvProfile::kSchemaVersion) {
      throw ConfigError("profile: unsupported schemaVersion");
    }
    EnvProfile p = blank_profile();
    p.name = doc.value("name", std::string("unnamed"));
    p.woman_proportion = doc.at("womanProportion").get<double>();
    p.cluster_distribution =
        doc.at("clusterDistribution").get<std::array<double, kNumClusters>>();
    p.session_distribution =
        doc.at("sessionDistribution").get<std::array<double, kNumSessions>>();

    const auto& means = doc.at("featureMeans");
    const auto& stds = doc.at("featureStds");
    for_each_cell([&](Gender g, int c, int s) {
      for (FeatureId f : kAllFeatures) {
        const std::string key = cell_key(g, c, s, f);
        if (f == FeatureId::SessionNumber) {
          // Deterministic; stored entries are informational.
          p.mean(g, c, s)[index(f)] = session_feature(s);
          p.stddev(g, c, s)[index(f)] = 0.0;
          continue;
        }
        if (!means.contains(key) || !stds.contains(key)) {
          throw ConfigError("profile: missing feature entry " + key);
        }
        p.mean(g, c, s)[index(f)] = means.at(key).get<double>();
        p.stddev(g, c, s)[index(f)] = stds.at(key).get<double>();
      }
    });

    const auto& actions = doc.at("rewardModel").at("actions");
    for (ActionId a : kAllActions) {
      const auto ai = static_cast<Eigen::Index>(index(a));
      const auto& entry = actions.at(std::string(name(a)));
      p.reward_model.intercept[ai] = entry.at("intercept").get<double>();
      p.reward_model.noise_std[ai] = entry.at("noiseStd").get<double>();
      const auto& weights = entry.at("weights");
      for (auto it = weights.begin(); it != weights.end(); ++it) {
        auto f = parse_feature(it.key());
        if (!f) throw ConfigError("profile: unknown feature " + it.key());
        p.reward_model.weights(ai, static_cast<Eigen::Index>(index(*f))) =
            it.value().get<double>();
      }
    }
    if (doc.contains("runEffects")) {
      const auto& fx = doc.at("runEffects");
      p.run_effects.intercept_shift_std = fx.value("interceptShiftStd", 0.0);
      p.run_effects.action_shift_std = fx.value("actionShiftStd", 0.0);
    }
    if (doc.contains("optimalFeatureSetIndex") &&
        !doc.at("optimalFeatureSetIndex").is_null()) {
      p.optimal_feature_set_index =
          doc.at("optimalFeatureSetIndex").get<int>();
    }
    if (doc.contains("calibration")) p.calibration = doc.at("calibration");
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
}

EnvProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("profile " + path.string() + ": " + e.what());
  }
  return profile_from_json(doc);
}

void save_profile(const EnvProfile& profile,
                  const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write profile " + path.string());
  out << profile_to_json(profile).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fairbandit
