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

#include "fairbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "fairbandit/error.hpp"
#include "fairbandit/linucb.hpp"
#include "fairbandit/stats.hpp"

namespace fairbandit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::uint64_t cell_key(const ExperimentConfig& config, std::size_t cell) {
  if (config.mode == Mode::Nested) return kNestedCellKey;
  return static_cast<std::uint64_t>(config.feature_sets[cell].id);
}

std::vector<std::string> cell_names(const ExperimentConfig& config) {
  std::vector<std::string> names;
  if (config.mode == Mode::Nested) {
    names.push_back(config.nested_cell);
  } else {
    for (const FeatureSet& s : config.feature_sets) {
      names.push_back(feature_set_label(s.id));
    }
  }
  return names;
}

fs::path run_log_path(const fs::path& out, const std::string& cell, int run) {
  return out / "runs" / cell / (std::to_string(run) + ".csv");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string_view name(Mode m) {
  switch (m) {
    case Mode::PerFeatureSet:
      return "per_feature_set";
    case Mode::Nested:
      return "nested";
    case Mode::Calibrate:
      return "calibrate";
  }
  return "per_feature_set";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::PerFeatureSet, Mode::Nested, Mode::Calibrate}) {
    if (name(m) == s) return m;
  }
  return std::nullopt;
}

// --- configuration ---------------------------------------------------------

void validate(const ExperimentConfig& config) {
  if (config.steps < 1) throw ConfigError("config: steps must be >= 1");
  if (config.runs < 1) throw ConfigError("config: runs must be >= 1");
  if (config.parallelism < 1) {
    throw ConfigError("config: parallelism must be >= 1");
  }
  if (!(config.alpha >= 0.0)) throw ConfigError("config: alpha must be >= 0");
  if (config.feature_sets.empty()) {
    throw ConfigError("config: at least one feature set is required");
  }
  std::vector<int> ids;
  for (const FeatureSet& s : config.feature_sets) {
    validate(s);
    ids.push_back(s.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("config: feature set ids must be unique");
  }
  validate(config.criterion);
  if (!config.priors.empty() &&
      config.priors.size() != config.feature_sets.size()) {
    throw ConfigError("config: need one prior per feature set");
  }
  for (const BetaPrior& p : config.priors) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) {
      throw ConfigError("config: Beta prior parameters must be > 0");
    }
  }
  if (config.nested_cell.empty() ||
      config.nested_cell.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("config: invalid nested cell name");
  }
}

std::vector<BetaPrior> effective_priors(const ExperimentConfig& config) {
  if (!config.priors.empty()) return config.priors;
  return std::vector<BetaPrior>(config.feature_sets.size(), BetaPrior{1.0, 2.0});
}

ExperimentConfig config_from_json(const json& doc, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    if (doc.contains("mode")) {
      auto m = parse_mode(doc.at("mode").get<std::string>());
      if (!m) throw ConfigError("config: unknown mode");
      c.mode = *m;
    }
    if (doc.contains("profile")) {
      fs::path p = doc.at("profile").get<std::string>();
      c.profile_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (doc.contains("featureSets")) {
      c.feature_sets.clear();
      int id = 0;
      for (const auto& entry : doc.at("featureSets")) {
        FeatureSet s;
        const json& members = entry.is_object() ? entry.at("features") : entry;
        s.id = entry.is_object() ? entry.value("id", id) : id;
        for (const auto& f : members) {
          auto fid = parse_feature(f.get<std::string>());
          if (!fid) {
            throw ConfigError("config: unknown feature " + f.get<std::string>());
          }
          s.members.push_back(*fid);
        }
        c.feature_sets.push_back(std::move(s));
        ++id;
      }
    }
    c.alpha = doc.value("alpha", c.alpha);
    if (doc.contains("priors")) {
      const json& pr = doc.at("priors");
      auto one = [](const json& j) {
        return BetaPrior{j.at("alpha").get<double>(), j.at("beta").get<double>()};
      };
      if (pr.is_object()) {
        c.priors.assign(c.feature_sets.size(), one(pr));
      } else {
        for (const auto& j : pr) c.priors.push_back(one(j));
      }
    }
    if (doc.contains("criterion")) {
      const json& cr = doc.at("criterion");
      c.criterion.utility_weight = cr.value("utilityWeight", 0.5);
      c.criterion.fairness_weight = cr.value("fairnessWeight", 0.5);
    }
    c.steps = doc.value("steps", c.steps);
    c.runs = doc.value("runs", c.runs);
    c.master_seed = doc.value("seed", c.master_seed);
    if (doc.contains("outputDir")) {
      fs::path p = doc.at("outputDir").get<std::string>();
      c.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    c.parallelism = doc.value("parallelism", c.parallelism);
    c.nested_cell = doc.value("nestedCell", c.nested_cell);
    c.write_logs = doc.value("writeLogs", c.write_logs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json sets = json::array();
  for (const FeatureSet& s : c.feature_sets) {
    json members = json::array();
    for (FeatureId f : s.members) members.push_back(std::string(name(f)));
    sets.push_back({{"id", s.id}, {"features", std::move(members)}});
  }
  json priors = json::array();
  for (const BetaPrior& p : effective_priors(c)) {
    priors.push_back({{"alpha", p.alpha}, {"beta", p.beta}});
  }
  return {{"mode", std::string(name(c.mode))},
          {"profile", c.profile_path.string()},
          {"featureSets", std::move(sets)},
          {"alpha", c.alpha},
          {"priors", std::move(priors)},
          {"criterion",
           {{"utilityWeight", c.criterion.utility_weight},
            {"fairnessWeight", c.criterion.fairness_weight}}},
          {"steps", c.steps},
          {"runs", c.runs},
          {"seed", c.master_seed},
          {"nestedCell", c.nested_cell}};
}

ExperimentConfig load_config(const fs::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

// --- simulation --------------------------------------------------------------

RunResult simulate_linucb_run(const EnvProfile& profile, const FeatureSet& set,
                              double alpha, std::int64_t steps,
                              RunStreams& streams, RunLog* log) {
  const EnvProfile run_profile = draw_run_profile(profile, streams.env);
  LinUcbd policy(static_cast<int>(set.members.size()), alpha,
                 static_cast<int>(kNumActions));
  RunAccumulator acc;
  if (log) log->reserve(log->size() + static_cast<std::size_t>(steps));
  for (std::int64_t t = 1; t <= steps; ++t) {
    const Interaction it = sample_interaction(run_profile, streams.env);
    const Eigen::VectorXd x = project_context(it, set);
    const auto action = static_cast<ActionId>(policy.select(x).arm);
    const double reward = realize_reward(run_profile, it, action, streams.env);
    policy.update(static_cast<int>(index(action)), x, reward);

    StepRecord rec;
    rec.t = t;
    rec.set_id = set.id;
    rec.action = action;
    rec.reward = reward;
    rec.gender = it.gender;
    rec.cluster = it.cluster;
    rec.session = it.session;
    rec.is_optimal_action = action == optimal_action(run_profile, it);
    if (run_profile.optimal_feature_set_index) {
      rec.is_optimal_set = set.id == *run_profile.optimal_feature_set_index;
    }
    acc.add(rec);
    if (log) log->push_back(rec);
  }
  return {acc.summary(), acc.optimal_set_flags()};
}

RunResult simulate_nested_run(const EnvProfile& profile,
                              const std::vector<FeatureSet>& sets,
                              const std::vector<BetaPrior>& priors,
                              double alpha,
                              const PerformanceCriterion& criterion,
                              std::int64_t steps, RunStreams& streams,
                              RunLog* log) {
  const EnvProfile run_profile = draw_run_profile(profile, streams.env);
  NestedRecommender policy(sets, priors, alpha, criterion);
  RunAccumulator acc;
  if (log) log->reserve(log->size() + static_cast<std::size_t>(steps));
  for (std::int64_t t = 1; t <= steps; ++t) {
    const Interaction it = sample_interaction(run_profile, streams.env);
    const StepRecord rec = policy.step(t, it, run_profile, streams);
    acc.add(rec);
    if (log) log->push_back(rec);
  }
  return {acc.summary(), acc.optimal_set_flags()};
}

void parallel_for(std::size_t n, int parallelism,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallelism)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<CellResult> run_cells(const ExperimentConfig& config,
                                  const EnvProfile& profile,
                                  std::vector<std::string>* warnings) {
  validate(config);
  validate(profile);
  if (config.mode == Mode::Calibrate) {
    throw ConfigError("run_cells: calibrate mode has no run cells");
  }
  const std::vector<std::string> names = cell_names(config);
  const std::vector<BetaPrior> priors = effective_priors(config);
  if (config.mode == Mode::Nested && !profile.optimal_feature_set_index &&
      warnings) {
    warnings->push_back(
        "profile has no optimalFeatureSetIndex; set optimality logged as "
        "unknown");
  }
  if (profile.optimal_feature_set_index) {
    const int opt = *profile.optimal_feature_set_index;
    const bool known = std::any_of(
        config.feature_sets.begin(), config.feature_sets.end(),
        [&](const FeatureSet& s) { return s.id == opt; });
    if (!known && warnings) {
      warnings->push_back("optimalFeatureSetIndex " + std::to_string(opt) +
                          " is not among the configured feature sets");
    }
  }

  std::vector<CellResult> cells(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    cells[c].name = names[c];
    cells[c].kind = config.mode == Mode::Nested ? CellKind::Nested
                                                : CellKind::PerFeatureSet;
    cells[c].runs.resize(static_cast<std::size_t>(config.runs));
  }
  const std::size_t runs = static_cast<std::size_t>(config.runs);
  parallel_for(names.size() * runs, config.parallelism, [&](std::size_t job) {
    const std::size_t c = job / runs;
    const int run = static_cast<int>(job % runs);
    RunStreams streams(config.master_seed, cell_key(config, c),
                       static_cast<std::uint64_t>(run));
    RunLog log;
    RunLog* log_ptr = config.write_logs ? &log : nullptr;
    if (config.mode == Mode::Nested) {
      cells[c].runs[static_cast<std::size_t>(run)] = simulate_nested_run(
          profile, config.feature_sets, priors, config.alpha, config.criterion,
          config.steps, streams, log_ptr);
    } else {
      cells[c].runs[static_cast<std::size_t>(run)] =
          simulate_linucb_run(profile, config.feature_sets[c], config.alpha,
                              config.steps, streams, log_ptr);
    }
    if (config.write_logs) {
      write_run_log(run_log_path(config.output_dir, names[c], run), log);
    }
  });
  return cells;
}

// --- aggregation -------------------------------------------------------------

namespace {

struct GenderSamples {
  std::vector<double> women;
  std::vector<double> men;
};

GenderSamples collect(const CellResult& cell, bool reward) {
  GenderSamples out;
  for (std::size_t r = 0; r < cell.runs.size(); ++r) {
    const RunSummary& s = cell.runs[r].summary;
    if (!s[Gender::Man] || !s[Gender::Woman]) {
      throw DegenerateDataError("cell " + cell.name + ": run " +
                                std::to_string(r) +
                                " lacks records for one gender");
    }
    out.women.push_back(reward ? s[Gender::Woman]->mean_reward
                               : s[Gender::Woman]->suboptimal_fraction);
    out.men.push_back(reward ? s[Gender::Man]->mean_reward
                             : s[Gender::Man]->suboptimal_fraction);
  }
  return out;
}

std::pair<double, double> safe_ci(std::span<const double> xs) {
  if (xs.size() < 2) {
    const double m = stats::mean(xs);
    return {m, m};
  }
  return stats::ci95(xs);
}

std::vector<double> negated(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  for (double& x : out) x = -x;
  return out;
}

void add_metric_rows(const CellResult& cell, bool reward,
                     std::vector<SummaryRow>& rows, json& figure) {
  const GenderSamples s = collect(cell, reward);
  // Tests run on a higher-is-better scale so H1 always means women better.
  const std::vector<double> w = reward ? s.women : negated(s.women);
  const std::vector<double> m = reward ? s.men : negated(s.men);
  const auto h1 = stats::welch_test(w, m, stats::Alternative::WomenBetter);
  const auto h2 = stats::welch_test(w, m, stats::Alternative::WomenWorse);
  const auto h3 = stats::welch_test(w, m, stats::Alternative::Unequal);
  stats::Alternative chosen = stats::Alternative::Unequal;
  double p = h3.p_value;
  if (h1.p_value < kSignificance) {
    chosen = stats::Alternative::WomenBetter;
    p = h1.p_value;
  } else if (h2.p_value < kSignificance) {
    chosen = stats::Alternative::WomenWorse;
    p = h2.p_value;
  }
  const double pooled_p = stats::student_test(w, m, chosen).p_value;
  const double d = stats::cohens_d(s.women, s.men);

  json fig_cell = {{"cell", cell.name}};
  for (Gender g : kAllGenders) {
    const std::vector<double>& xs = g == Gender::Woman ? s.women : s.men;
    SummaryRow row;
    row.metric = reward ? "average_reward" : "suboptimal_fraction";
    row.cell = cell.name;
    row.gender = g;
    row.runs = static_cast<int>(xs.size());
    row.mean = stats::mean(xs);
    row.std = stats::sample_std(xs);
    std::tie(row.ci_low, row.ci_high) = safe_ci(xs);
    row.hypothesis = std::string(stats::label(chosen));
    row.p_value = p;
    row.cohens_d = d;
    row.p_h1 = h1.p_value;
    row.p_h2 = h2.p_value;
    row.p_h3 = h3.p_value;
    row.p_pooled = pooled_p;
    fig_cell[std::string(name(g))] = {
        {"mean", row.mean}, {"ciLow", row.ci_low}, {"ciHigh", row.ci_high}};
    rows.push_back(std::move(row));
  }
  fig_cell["hypothesis"] = std::string(stats::label(chosen));
  fig_cell["pValue"] = p;
  figure["cells"].push_back(std::move(fig_cell));
}

json figure_header(const char* metric, double zoom_min) {
  return {{"metric", metric},
          {"unitOfAnalysis", "run-level means"},
          {"errorBars", "95% CI, normal approximation (mean +/- 1.96 s/sqrt(n))"},
          {"axisVariants",
           json::array({{{"name", "zero"}, {"yMin", 0.0}},
                        {{"name", "zoomed"}, {"yMin", zoom_min}}})},
          {"cells", json::array()}};
}

struct Envelope {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Envelope envelope(std::span<const double> xs) {
  Envelope e{stats::mean(xs), xs.empty() ? 0.0 : xs[0], xs.empty() ? 0.0 : xs[0]};
  for (double x : xs) {
    e.min = std::min(e.min, x);
    e.max = std::max(e.max, x);
  }
  return e;
}

void add_set_selection_figures(const CellResult& cell, json& fig3, json& fig4) {
  const std::size_t steps = cell.runs.front().optimal_set_flags.size();
  for (const RunResult& r : cell.runs) {
    if (r.optimal_set_flags.size() != steps) {
      throw DegenerateDataError("cell " + cell.name +
                                ": runs have different lengths");
    }
    if (std::any_of(r.optimal_set_flags.begin(), r.optimal_set_flags.end(),
                    [](std::int8_t f) { return f < 0; })) {
      fig3["cells"].push_back({{"cell", cell.name}, {"unknown", true}});
      fig4["cells"].push_back({{"cell", cell.name}, {"unknown", true}});
      return;
    }
  }
  if (steps == 0) return;
  const auto T = static_cast<std::int64_t>(steps);

  const std::int64_t stride = std::max<std::int64_t>(1, T / 500);
  std::vector<std::int64_t> xs;
  for (std::int64_t x = stride; x <= T; x += stride) xs.push_back(x);
  if (xs.back() != T) xs.push_back(T);

  json series = {{"cell", cell.name}, {"x", xs}};
  std::vector<double> means, mins, maxs;
  std::vector<double> at_x(cell.runs.size());
  std::vector<std::int64_t> hits(cell.runs.size(), 0);
  std::int64_t pos = 0;
  for (std::int64_t x : xs) {
    for (std::size_t r = 0; r < cell.runs.size(); ++r) {
      const auto& flags = cell.runs[r].optimal_set_flags;
      for (std::int64_t t = pos; t < x; ++t) hits[r] += flags[static_cast<std::size_t>(t)];
      at_x[r] = static_cast<double>(hits[r]) / static_cast<double>(x);
    }
    pos = x;
    const Envelope e = envelope(at_x);
    means.push_back(e.mean);
    mins.push_back(e.min);
    maxs.push_back(e.max);
  }
  series["mean"] = means;
  series["min"] = mins;
  series["max"] = maxs;
  fig3["cells"].push_back(std::move(series));

  const std::int64_t intervals = std::min<std::int64_t>(10, T);
  json bars = {{"cell", cell.name}, {"intervals", json::array()}};
  for (std::int64_t i = 0; i < intervals; ++i) {
    const std::int64_t lo = i * T / intervals + 1;
    const std::int64_t hi = (i + 1) * T / intervals;
    std::vector<double> fr;
    for (const RunResult& r : cell.runs) {
      fr.push_back(interval_optimal_set_fraction(r.optimal_set_flags, lo, hi));
    }
    const Envelope e = envelope(fr);
    bars["intervals"].push_back({{"lo", lo},
                                 {"hi", hi},
                                 {"mean", e.mean},
                                 {"min", e.min},
                                 {"max", e.max}});
  }
  fig4["cells"].push_back(std::move(bars));
}

}  // namespace

AggregateResult aggregate_cells(const std::vector<CellResult>& cells,
                                const PerformanceCriterion& criterion) {
  AggregateResult out;
  json fig1 = figure_header("average_reward", 0.38);
  json fig2 = figure_header("suboptimal_fraction", 0.10);
  json fig3 = {{"metric", "cumulative_optimal_set_fraction"},
               {"envelope", "min-max over runs"},
               {"cells", json::array()}};
  json fig4 = {{"metric", "interval_optimal_set_fraction"},
               {"envelope", "min-max over runs"},
               {"cells", json::array()}};
  for (const CellResult& cell : cells) {
    if (cell.runs.empty()) {
      throw DegenerateDataError("cell " + cell.name + " has no runs");
    }
    add_metric_rows(cell, true, out.summary, fig1);
    add_metric_rows(cell, false, out.summary, fig2);

    std::vector<double> crit, rewards, gaps;
    for (const RunResult& r : cell.runs) {
      crit.push_back(criterion_value(r.summary, criterion));
      rewards.push_back(r.summary.mean_reward);
      gaps.push_back(*r.summary.fairness_gap);
    }
    CriterionRow row;
    row.cell = cell.name;
    row.runs = static_cast<int>(crit.size());
    row.mean = stats::mean(crit);
    std::tie(row.ci_low, row.ci_high) = safe_ci(crit);
    row.mean_reward = stats::mean(rewards);
    row.mean_gap = stats::mean(gaps);
    out.criterion.push_back(row);

    if (cell.kind == CellKind::Nested) {
      add_set_selection_figures(cell, fig3, fig4);
    }
  }
  out.figures = {std::move(fig1), std::move(fig2), std::move(fig3),
                 std::move(fig4)};
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string s =
      "metric,cell,gender,runs,mean,std,ci_low,ci_high,hypothesis,p_value,"
      "cohens_d,p_h1,p_h2,p_h3,p_pooled\n";
  for (const SummaryRow& r : rows) {
    s += r.metric + ',' + r.cell + ',' + std::string(name(r.gender)) + ',' +
         std::to_string(r.runs) + ',' + fmt(r.mean) + ',' + fmt(r.std) + ',' +
         fmt(r.ci_low) + ',' + fmt(r.ci_high) + ',' + r.hypothesis + ',' +
         fmt(r.p_value) + ',' + fmt(r.cohens_d) + ',' + fmt(r.p_h1) + ',' +
         fmt(r.p_h2) + ',' + fmt(r.p_h3) + ',' + fmt(r.p_pooled) + '\n';
  }
  return s;
}

std::vector<fs::path> write_aggregate(const AggregateResult& result,
                                      const fs::path& out_dir) {
  std::vector<fs::path> written;
  auto put = [&](const fs::path& rel, const std::string& content) {
    write_file(out_dir / rel, content);
    written.push_back(rel);
  };
  put(fs::path("tables") / "summary.csv", summary_csv(result.summary));
  std::string crit = "cell,runs,criterion_mean,ci_low,ci_high,mean_reward,mean_gap\n";
  for (const CriterionRow& r : result.criterion) {
    crit += r.cell + ',' + std::to_string(r.runs) + ',' + fmt(r.mean) + ',' +
            fmt(r.ci_low) + ',' + fmt(r.ci_high) + ',' + fmt(r.mean_reward) +
            ',' + fmt(r.mean_gap) + '\n';
  }
  put(fs::path("tables") / "criterion.csv", crit);
  for (std::size_t i = 0; i < result.figures.size(); ++i) {
    put(fs::path("figures") / ("fig" + std::to_string(i + 1) + ".json"),
        result.figures[i].dump(1) + "\n");
  }
  return written;
}

std::vector<CellResult> read_cells(const fs::path& log_dir) {
  fs::path root = log_dir;
  if (fs::is_directory(log_dir / "runs")) root = log_dir / "runs";
  if (!fs::is_directory(root)) {
    throw IoError("log directory " + log_dir.string() + " does not exist");
  }
  std::vector<fs::path> cell_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) cell_dirs.push_back(e.path());
  }
  std::sort(cell_dirs.begin(), cell_dirs.end());
  std::vector<CellResult> cells;
  for (const fs::path& dir : cell_dirs) {
    CellResult cell;
    cell.name = dir.filename().string();
    cell.kind = cell.name.rfind("nested", 0) == 0 ? CellKind::Nested
                                                  : CellKind::PerFeatureSet;
    std::vector<std::pair<long, fs::path>> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
      const std::string stem = e.path().stem().string();
      long idx = 0;
      auto res = std::from_chars(stem.data(), stem.data() + stem.size(), idx);
      if (res.ec != std::errc() || res.ptr != stem.data() + stem.size()) continue;
      files.emplace_back(idx, e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw DegenerateDataError("cell " + cell.name + " has no run logs");
    }
    for (const auto& [idx, path] : files) {
      RunAccumulator acc;
      for (const StepRecord& r : read_run_log(path)) acc.add(r);
      cell.runs.push_back({acc.summary(), acc.optimal_set_flags()});
    }
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) {
    throw DegenerateDataError("no cells found under " + root.string());
  }
  return cells;
}

std::vector<fs::path> aggregate(const fs::path& log_dir, const fs::path& out_dir,
                                const PerformanceCriterion& criterion) {
  return write_aggregate(aggregate_cells(read_cells(log_dir), criterion),
                         out_dir);
}

// --- experiment pipelines ------------------------------------------------------

namespace {

json inventory(const fs::path& out_dir) {
  std::vector<fs::path> files;
  for (const char* sub : {"runs", "tables", "figures"}) {
    if (!fs::exists(out_dir / sub)) continue;
    for (const auto& e : fs::recursive_directory_iterator(out_dir / sub)) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), out_dir));
    }
  }
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const fs::path& rel : files) {
    const std::string content = read_file(out_dir / rel);
    list.push_back({{"path", rel.generic_string()},
                    {"bytes", content.size()},
                    {"fnv1a64", hex64(fnv1a64(content))}});
  }
  return list;
}

Manifest run_pipeline(const ExperimentConfig& config) {
  const std::string started = utc_now();
  const EnvProfile profile = load_profile(config.profile_path);
  std::vector<std::string> warnings;
  const std::vector<CellResult> cells = run_cells(config, profile, &warnings);

  try {
    write_aggregate(aggregate_cells(cells, config.criterion), config.output_dir);
  } catch (const Error& e) {
    warnings.push_back(std::string("aggregation skipped: ") + e.what());
  }

  json manifest;
  manifest["software"] = kSoftwareVersion;
  manifest["mode"] = std::string(name(config.mode));
  manifest["config"] = config_to_json(config);
  manifest["configHash"] = hex64(fnv1a64(config_to_json(config).dump()));
  manifest["profileName"] = profile.name;
  manifest["profileHash"] = hex64(fnv1a64(profile_to_json(profile).dump()));
  manifest["masterSeed"] = config.master_seed;
  manifest["seedDerivation"] =
      "splitmix64 chain over (masterSeed, cellKey, runIndex, purpose); "
      "purpose 1 = environment, 2 = policy; cellKey = set id or 1000 for "
      "nested";
  manifest["design"] =
      "interactions sampled independently per cell (unpaired across cells)";
  manifest["unitOfAnalysis"] = "run-level means; Welch t-test";
  json cells_json = json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    json seeds = json::array();
    for (int r = 0; r < config.runs; ++r) {
      const std::uint64_t key = cell_key(config, c);
      seeds.push_back(
          {{"run", r},
           {"env", derive_seed(config.master_seed,
                               {key, static_cast<std::uint64_t>(r),
                                static_cast<std::uint64_t>(
                                    StreamPurpose::Environment)})},
           {"policy", derive_seed(config.master_seed,
                                  {key, static_cast<std::uint64_t>(r),
                                   static_cast<std::uint64_t>(
                                       StreamPurpose::Policy)})}});
    }
    cells_json.push_back({{"name", cells[c].name},
                          {"cellKey", cell_key(config, c)},
                          {"seeds", std::move(seeds)}});
  }
  manifest["cells"] = std::move(cells_json);
  manifest["warnings"] = warnings;
  manifest["outputs"] = inventory(config.output_dir);
  write_file(config.output_dir / "manifest.json", manifest.dump(1) + "\n");

  // Wall-clock data lives outside the manifest so that outputs stay
  // byte-identical across repeated runs and parallelism degrees.
  write_file(config.output_dir / "run_info.json",
             json{{"started", started},
                  {"finished", utc_now()},
                  {"parallelism", config.parallelism}}
                     .dump(1) +
                 "\n");
  return {std::move(manifest)};
}

}  // namespace

Manifest run_per_feature_set(const ExperimentConfig& config) {
  if (config.mode != Mode::PerFeatureSet) {
    throw ConfigError("run_per_feature_set: config mode is not per_feature_set");
  }
  return run_pipeline(config);
}

Manifest run_nested(const ExperimentConfig& config) {
  if (config.mode != Mode::Nested) {
    throw ConfigError("run_nested: config mode is not nested");
  }
  return run_pipeline(config);
}

Manifest run_experiment(const ExperimentConfig& config) {
  switch (config.mode) {
    case Mode::PerFeatureSet:
      return run_per_feature_set(config);
    case Mode::Nested:
      return run_nested(config);
    case Mode::Calibrate: {
      const EnvProfile calibrated =
          calibrate(config, load_profile(config.profile_path));
      save_profile(calibrated, config.output_dir / "profile.json");
      return {profile_to_json(calibrated)};
    }
  }
  throw ConfigError("unknown mode");
}

// --- calibration ---------------------------------------------------------------

inline constexpr int kMinCalibrationRuns = 20;

EnvProfile calibrate(const ExperimentConfig& config, const EnvProfile& profile) {
  if (config.runs < kMinCalibrationRuns) {
    throw ConfigError("calibrate: needs at least 20 runs per feature set");
  }
  ExperimentConfig per_set = config;
  per_set.mode = Mode::PerFeatureSet;
  per_set.write_logs = false;
  EnvProfile uncalibrated = profile;
  uncalibrated.optimal_feature_set_index.reset();
  const std::vector<CellResult> cells = run_cells(per_set, uncalibrated);

  std::vector<CriterionRow> rows;
  for (const CellResult& cell : cells) {
    std::vector<double> crit, rewards, gaps;
    for (const RunResult& r : cell.runs) {
      crit.push_back(criterion_value(r.summary, config.criterion));
      rewards.push_back(r.summary.mean_reward);
      gaps.push_back(*r.summary.fairness_gap);
    }
    CriterionRow row;
    row.cell = cell.name;
    row.runs = static_cast<int>(crit.size());
    row.mean = stats::mean(crit);
    std::tie(row.ci_low, row.ci_high) = stats::ci95(crit);
    row.mean_reward = stats::mean(rewards);
    row.mean_gap = stats::mean(gaps);
    rows.push_back(row);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].mean > rows[best].mean) best = i;
  }
  std::optional<std::string> warning;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == best) continue;
    if (rows[i].ci_high >= rows[best].ci_low) {
      warning = "top feature set " + rows[best].cell +
                " is not separated from " + rows[i].cell +
                " (overlapping 95% CIs)";
      break;
    }
  }

  EnvProfile out = profile;
  out.optimal_feature_set_index = config.feature_sets[best].id;
  json table = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.push_back({{"featureSet", config.feature_sets[i].id},
                     {"label", rows[i].cell},
                     {"criterionMean", rows[i].mean},
                     {"ciLow", rows[i].ci_low},
                     {"ciHigh", rows[i].ci_high},
                     {"meanReward", rows[i].mean_reward},
                     {"meanGap", rows[i].mean_gap}});
  }
  out.calibration = {
      {"software", kSoftwareVersion},
      {"criterion",
       {{"utilityWeight", config.criterion.utility_weight},
        {"fairnessWeight", config.criterion.fairness_weight}}},
      {"alpha", config.alpha},
      {"runs", config.runs},
      {"steps", config.steps},
      {"seed", config.master_seed},
      {"optimalFeatureSetIndex", config.feature_sets[best].id},
      {"table", std::move(table)},
      {"warning", warning ? json(*warning) : json(nullptr)}};
  return out;
}

}  // namespace fairbandit
