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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace fairbandit {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: the seed of a stream is a pure function of
// the master seed and an ordered list of counters (cell, run, purpose, ...).
// Adding runs or cells never changes the seeds of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : path) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream purposes used by the experiment runners.
enum class StreamPurpose : std::uint64_t { Environment = 1, Policy = 2 };

class RandomStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  engine_type& engine() { return engine_; }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double beta(double a, double b) {
    const double x = std::gamma_distribution<double>(a, 1.0)(engine_);
    const double y = std::gamma_distribution<double>(b, 1.0)(engine_);
    return x / (x + y);
  }

  // Index drawn from a normalized probability vector.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.size() - 1;
  }

 private:
  engine_type engine_;
};

}  // namespace fairbandit

namespace fairbandit {

// The environment stream drives interactions, reward noise and run effects;
// the policy stream drives level-1 sampling and Bernoulli feedback. Keeping
// them apart makes a one-set nested run consume the environment stream
// exactly like a plain LinUCB run.
struct RunStreams {
  RandomStream env;
  RandomStream policy;

  RunStreams(std::uint64_t master, std::uint64_t cell, std::uint64_t run)
      : env(derive_seed(master,
                        {cell, run,
                         static_cast<std::uint64_t>(StreamPurpose::Environment)})),
        policy(derive_seed(master,
                           {cell, run,
                            static_cast<std::uint64_t>(StreamPurpose::Policy)})) {}
};

}  // namespace fairbandit
