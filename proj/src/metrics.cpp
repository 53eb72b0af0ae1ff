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

#include "fairbandit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fairbandit/error.hpp"

namespace fairbandit {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view field, const char* what) {
  T value{};
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw IoError(std::string("run log: bad ") + what + " '" +
                  std::string(field) + "'");
  }
  return value;
}

bool parse_bool(std::string_view field) {
  if (field == "1") return true;
  if (field == "0") return false;
  throw IoError("run log: bad boolean '" + std::string(field) + "'");
}

}  // namespace

void validate(const PerformanceCriterion& c) {
  if (!(c.utility_weight >= 0.0) || !(c.fairness_weight >= 0.0) ||
      std::abs(c.utility_weight + c.fairness_weight - 1.0) > 1e-9) {
    throw ConfigError("criterion weights must be >= 0 and sum to 1");
  }
}

void RunAccumulator::add(const StepRecord& r) {
  if (r.t <= last_t_) {
    throw ContractError("run log: step index must be strictly increasing");
  }
  last_t_ = r.t;
  auto push = [&](Moments& m) {
    ++m.n;
    const double delta = r.reward - m.mean;
    m.mean += delta / static_cast<double>(m.n);
    m.m2 += delta * (r.reward - m.mean);
    if (!r.is_optimal_action) ++m.suboptimal;
  };
  push(by_gender_[index(r.gender)]);
  push(all_);
  flags_.push_back(r.is_optimal_set ? static_cast<std::int8_t>(*r.is_optimal_set)
                                    : std::int8_t{-1});
}

RunSummary RunAccumulator::summary() const {
  RunSummary s;
  for (Gender g : kAllGenders) {
    const Moments& m = by_gender_[index(g)];
    if (m.n == 0) continue;
    GenderStats gs;
    gs.count = m.n;
    gs.mean_reward = m.mean;
    gs.reward_std =
        m.n > 1 ? std::sqrt(m.m2 / static_cast<double>(m.n - 1)) : 0.0;
    gs.suboptimal_fraction =
        static_cast<double>(m.suboptimal) / static_cast<double>(m.n);
    s.by_gender[index(g)] = gs;
  }
  s.count = all_.n;
  s.mean_reward = all_.mean;
  if (s[Gender::Man] && s[Gender::Woman]) {
    s.fairness_gap =
        std::abs(s[Gender::Man]->mean_reward - s[Gender::Woman]->mean_reward);
  }
  return s;
}

RunSummary summarize(std::span<const StepRecord> log) {
  RunAccumulator acc;
  for (const StepRecord& r : log) acc.add(r);
  return acc.summary();
}

std::map<Gender, double> per_gender_average_reward(
    std::span<const StepRecord> log) {
  const RunSummary s = summarize(log);
  std::map<Gender, double> out;
  for (Gender g : kAllGenders) {
    if (s[g]) out[g] = s[g]->mean_reward;
  }
  return out;
}

std::map<Gender, double> suboptimal_fraction(std::span<const StepRecord> log) {
  const RunSummary s = summarize(log);
  std::map<Gender, double> out;
  for (Gender g : kAllGenders) {
    if (s[g]) out[g] = s[g]->suboptimal_fraction;
  }
  return out;
}

double interval_optimal_set_fraction(std::span<const std::int8_t> flags,
                                     std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw MetricError("optimal-set interval has lo > hi");
  lo = std::max<std::int64_t>(lo, 1);
  hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(flags.size()));
  if (lo > hi) throw MetricError("optimal-set interval is empty");
  std::int64_t hits = 0;
  for (std::int64_t t = lo; t <= hi; ++t) {
    const std::int8_t f = flags[static_cast<std::size_t>(t - 1)];
    if (f < 0) {
      throw MetricError(
          "set optimality unknown (profile has no optimalFeatureSetIndex)");
    }
    hits += f;
  }
  return static_cast<double>(hits) / static_cast<double>(hi - lo + 1);
}

double cumulative_optimal_set_fraction(std::span<const std::int8_t> flags,
                                       std::int64_t up_to) {
  return interval_optimal_set_fraction(flags, 1, up_to);
}

double interval_optimal_set_fraction(std::span<const StepRecord> log,
                                     std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw MetricError("optimal-set interval has lo > hi");
  std::int64_t hits = 0;
  std::int64_t n = 0;
  for (const StepRecord& r : log) {
    if (r.t < lo || r.t > hi) continue;
    if (!r.is_optimal_set) {
      throw MetricError(
          "set optimality unknown (profile has no optimalFeatureSetIndex)");
    }
    ++n;
    if (*r.is_optimal_set) ++hits;
  }
  if (n == 0) throw MetricError("optimal-set interval is empty");
  return static_cast<double>(hits) / static_cast<double>(n);
}

double cumulative_optimal_set_fraction(std::span<const StepRecord> log,
                                       std::int64_t up_to) {
  return interval_optimal_set_fraction(
      log, std::numeric_limits<std::int64_t>::min(), up_to);
}

double criterion_value(const RunSummary& summary,
                       const PerformanceCriterion& criterion) {
  if (!summary.fairness_gap) {
    throw MetricError("criterion needs both genders in the run");
  }
  return criterion.utility_weight * summary.mean_reward +
         criterion.fairness_weight * (1.0 - *summary.fairness_gap);
}

std::string format_record(const StepRecord& r) {
  std::string line;
  line.reserve(64);
  line += std::to_string(r.t);
  line += ',';
  if (r.set_id) line += std::to_string(*r.set_id);
  line += ',';
  line += name(r.action);
  line += ',';
  line += format_double(r.reward);
  line += ',';
  line += name(r.gender);
  line += ',';
  line += std::to_string(r.cluster);
  line += ',';
  line += std::to_string(r.session);
  line += ',';
  line += r.is_optimal_action ? '1' : '0';
  line += ',';
  if (r.is_optimal_set) line += *r.is_optimal_set ? '1' : '0';
  return line;
}

StepRecord parse_record(const std::string& line) {
  std::array<std::string_view, 9> fields;
  std::string_view rest(line);
  if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto comma = rest.find(',');
    if (i + 1 < fields.size()) {
      if (comma == std::string_view::npos) {
        throw IoError("run log: expected 9 columns in '" + line + "'");
      }
      fields[i] = rest.substr(0, comma);
      rest.remove_prefix(comma + 1);
    } else {
      if (comma != std::string_view::npos) {
        throw IoError("run log: too many columns in '" + line + "'");
      }
      fields[i] = rest;
    }
  }
  StepRecord r;
  r.t = parse_number<std::int64_t>(fields[0], "t");
  if (!fields[1].empty()) r.set_id = parse_number<int>(fields[1], "setId");
  auto action = parse_action(fields[2]);
  if (!action) throw IoError("run log: bad action '" + std::string(fields[2]) + "'");
  r.action = *action;
  r.reward = parse_number<double>(fields[3], "reward");
  auto gender = parse_gender(fields[4]);
  if (!gender) throw IoError("run log: bad gender '" + std::string(fields[4]) + "'");
  r.gender = *gender;
  r.cluster = parse_number<int>(fields[5], "cluster");
  r.session = parse_number<int>(fields[6], "session");
  r.is_optimal_action = parse_bool(fields[7]);
  if (!fields[8].empty()) r.is_optimal_set = parse_bool(fields[8]);
  return r;
}

void write_run_log(const std::filesystem::path& path,
                   std::span<const StepRecord> log) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write run log " + path.string());
  std::string buffer;
  buffer.reserve(log.size() * 48 + 128);
  buffer += kRunLogHeader;
  buffer += '\n';
  for (const StepRecord& r : log) {
    buffer += format_record(r);
    buffer += '\n';
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open run log " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty run log " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunLogHeader) {
    throw IoError("unexpected run log header in " + path.string());
  }
  RunLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.push_back(parse_record(line));
  }
  return log;
}

}  // namespace fairbandit
