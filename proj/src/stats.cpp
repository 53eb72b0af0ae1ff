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

#include "fairbandit/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "fairbandit/error.hpp"

namespace fairbandit::stats {
namespace {

constexpr double kZ975 = 1.96;

struct Moments {
  double n;
  double mean;
  double var;
};

Moments moments(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw ContractError("t-test: each sample needs at least two values");
  }
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {static_cast<double>(xs.size()), m,
          ss / static_cast<double>(xs.size() - 1)};
}

}  // namespace

std::string_view label(Alternative alt) {
  switch (alt) {
    case Alternative::WomenBetter:
      return "H1";
    case Alternative::WomenWorse:
      return "H2";
    case Alternative::Unequal:
      return "H3";
  }
  return "H3";
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double t_upper_tail(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

double p_value(double t, double df, Alternative alternative) {
  const double upper = t_upper_tail(t, df);
  switch (alternative) {
    case Alternative::WomenBetter:
      return upper;
    case Alternative::WomenWorse:
      return t_upper_tail(-t, df);
    case Alternative::Unequal:
      return 2.0 * std::min(upper, 1.0 - upper);
  }
  return 1.0;
}

TestResult welch_test(std::span<const double> a, std::span<const double> b,
                      Alternative alternative) {
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va = ma.var / ma.n;
  const double vb = mb.var / mb.n;
  if (va + vb == 0.0) {
    throw DegenerateDataError("t-test: both samples have zero variance");
  }
  TestResult r;
  r.alternative = alternative;
  r.t_statistic = (ma.mean - mb.mean) / std::sqrt(va + vb);
  r.degrees_of_freedom = (va + vb) * (va + vb) /
                         (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  r.p_value = p_value(r.t_statistic, r.degrees_of_freedom, alternative);
  return r;
}

TestResult student_test(std::span<const double> a, std::span<const double> b,
                        Alternative alternative) {
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double df = ma.n + mb.n - 2.0;
  const double pooled = ((ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var) / df;
  if (pooled == 0.0) {
    throw DegenerateDataError("t-test: both samples have zero variance");
  }
  TestResult r;
  r.alternative = alternative;
  r.t_statistic =
      (ma.mean - mb.mean) / std::sqrt(pooled * (1.0 / ma.n + 1.0 / mb.n));
  r.degrees_of_freedom = df;
  r.p_value = p_value(r.t_statistic, df, alternative);
  return r;
}

double cohens_d(double mean_a, double std_a, long n_a, double mean_b,
                double std_b, long n_b) {
  if (n_a < 2 || n_b < 2) throw ContractError("Cohen's d: need n >= 2");
  if (!(std_a >= 0.0) || !(std_b >= 0.0)) {
    throw ContractError("Cohen's d: negative standard deviation");
  }
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  const double pooled = std::sqrt(((na - 1.0) * std_a * std_a +
                                   (nb - 1.0) * std_b * std_b) /
                                  (na + nb - 2.0));
  if (pooled == 0.0) {
    throw DegenerateDataError("Cohen's d: pooled standard deviation is 0");
  }
  return (mean_a - mean_b) / pooled;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  return cohens_d(mean(a), sample_std(a), static_cast<long>(a.size()),
                  mean(b), sample_std(b), static_cast<long>(b.size()));
}

std::pair<double, double> ci95(std::span<const double> xs) {
  if (xs.size() < 2) throw ContractError("ci95: need at least two samples");
  const double m = mean(xs);
  const double half =
      kZ975 * sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
  return {m - half, m + half};
}

}  // namespace fairbandit::stats
