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

#include <span>
#include <string_view>
#include <utility>

namespace fairbandit::stats {

// Direction of the alternative hypothesis for sample A relative to B.
// With A = women and B = men on a higher-is-better scale these are the
// H1 / H2 / H3 hypotheses of the fairness tables.
enum class Alternative { WomenBetter, WomenWorse, Unequal };

std::string_view label(Alternative alt);  // "H1", "H2", "H3"

struct TestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  Alternative alternative = Alternative::Unequal;
};

double mean(std::span<const double> xs);
// Sample (n - 1) standard deviation; 0 for fewer than two values.
double sample_std(std::span<const double> xs);

// Welch's unequal-variance t-test. Throws ContractError when a sample has
// fewer than two values and DegenerateDataError when both variances are 0.
TestResult welch_test(std::span<const double> a, std::span<const double> b,
                      Alternative alternative);

// Classic pooled-variance Student t-test, reported for sensitivity analysis.
TestResult student_test(std::span<const double> a, std::span<const double> b,
                        Alternative alternative);

// Upper tail P(T >= t) of Student's t with `df` degrees of freedom.
double t_upper_tail(double t, double df);

// p-value for the alternative given the statistic and df.
double p_value(double t, double df, Alternative alternative);

// (meanA - meanB) / pooled std. Throws DegenerateDataError if the pooled std
// is 0 and ContractError for n < 2 or negative stds.
double cohens_d(double mean_a, double std_a, long n_a, double mean_b,
                double std_b, long n_b);
double cohens_d(std::span<const double> a, std::span<const double> b);

// mean +/- 1.96 * s / sqrt(n). Throws ContractError for n < 2.
std::pair<double, double> ci95(std::span<const double> xs);

}  // namespace fairbandit::stats
