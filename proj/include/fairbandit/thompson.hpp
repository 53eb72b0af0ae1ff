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

#include <utility>
#include <vector>

#include "fairbandit/random.hpp"

namespace fairbandit {

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const { return alpha / (alpha + beta); }
};

// Beta-Bernoulli Thompson Sampling over K arms. Parameters are reals so that
// non-integer priors are representable; updates add exactly 1.
class BetaBernoulliTs {
 public:
  explicit BetaBernoulliTs(std::vector<BetaPrior> priors);

  int num_arms() const { return static_cast<int>(params_.size()); }
  const BetaPrior& posterior(int arm) const { return params_.at(arm); }
  const BetaPrior& prior(int arm) const { return priors_.at(arm); }

  // One Beta draw per arm, argmax with the lowest index on ties.
  int select(RandomStream& rng) const;

  // Bernoulli trial with success probability `reward`; success increments
  // alpha, failure increments beta. Returns the trial outcome.
  bool update(int arm, double reward, RandomStream& rng);

  // Sum over arms of alpha + beta.
  double total_mass() const;
  double prior_mass() const;

 private:
  std::vector<BetaPrior> priors_;
  std::vector<BetaPrior> params_;
};

}  // namespace fairbandit
