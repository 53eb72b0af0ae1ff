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

#include "fairbandit/thompson.hpp"

#include <cmath>
#include <string>

#include "fairbandit/error.hpp"

namespace fairbandit {

BetaBernoulliTs::BetaBernoulliTs(std::vector<BetaPrior> priors)
    : priors_(std::move(priors)) {
  if (priors_.empty()) throw ConfigError("Thompson Sampling: no arms");
  for (const BetaPrior& p : priors_) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.alpha) ||
        !std::isfinite(p.beta)) {
      throw ConfigError("Thompson Sampling: Beta parameters must be > 0");
    }
  }
  params_ = priors_;
}

int BetaBernoulliTs::select(RandomStream& rng) const {
  int best = 0;
  double best_draw = -1.0;
  for (int k = 0; k < num_arms(); ++k) {
    const BetaPrior& p = params_[static_cast<std::size_t>(k)];
    const double draw = rng.beta(p.alpha, p.beta);
    if (draw > best_draw) {
      best = k;
      best_draw = draw;
    }
  }
  return best;
}

bool BetaBernoulliTs::update(int arm, double reward, RandomStream& rng) {
  if (arm < 0 || arm >= num_arms()) {
    throw ContractError("Thompson Sampling: arm index out of range");
  }
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw ContractError("Thompson Sampling: reward " + std::to_string(reward) +
                        " outside [0,1]");
  }
  const bool success = rng.bernoulli(reward);
  BetaPrior& p = params_[static_cast<std::size_t>(arm)];
  if (success) {
    p.alpha += 1.0;
  } else {
    p.beta += 1.0;
  }
  return success;
}

double BetaBernoulliTs::total_mass() const {
  double m = 0.0;
  for (const BetaPrior& p : params_) m += p.alpha + p.beta;
  return m;
}

double BetaBernoulliTs::prior_mass() const {
  double m = 0.0;
  for (const BetaPrior& p : priors_) m += p.alpha + p.beta;
  return m;
}

}  // namespace fairbandit
