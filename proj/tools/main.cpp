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

// Command-line front end: run, aggregate, calibrate, export-profile.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "fairbandit/error.hpp"
#include "fairbandit/harness.hpp"
#include "fairbandit/profiles.hpp"

namespace fb = fairbandit;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kIo = 2, kDegenerate = 3 };

struct RunArgs {
  std::string config;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> parallelism;
  std::optional<int> runs;
  std::optional<std::int64_t> steps;
  std::string profile;
};

fb::ExperimentConfig resolve(const RunArgs& a) {
  fb::ExperimentConfig c =
      a.config.empty() ? fb::ExperimentConfig{} : fb::load_config(a.config);
  if (!a.mode.empty()) {
    auto m = fb::parse_mode(a.mode);
    if (!m) throw fb::ConfigError("unknown mode '" + a.mode + "'");
    c.mode = *m;
  }
  if (a.seed) c.master_seed = *a.seed;
  if (!a.out.empty()) c.output_dir = a.out;
  if (a.parallelism) c.parallelism = *a.parallelism;
  if (a.runs) c.runs = *a.runs;
  if (a.steps) c.steps = *a.steps;
  if (!a.profile.empty()) c.profile_path = a.profile;
  if (c.profile_path.empty()) throw fb::ConfigError("no profile given");
  fb::validate(c);
  return c;
}

void print_warnings(const nlohmann::json& manifest) {
  if (!manifest.contains("warnings")) return;
  for (const auto& w : manifest["warnings"]) {
    std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware contextual bandit simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a seeded multi-run experiment");
  run->add_option("--config", run_args.config, "experiment config (JSON)");
  run->add_option("--mode", run_args.mode,
                  "per_feature_set | nested | calibrate");
  run->add_option("--seed", run_args.seed, "master seed");
  run->add_option("--out", run_args.out, "output directory");
  run->add_option("--parallelism", run_args.parallelism, "worker threads");
  run->add_option("--runs", run_args.runs, "runs per cell");
  run->add_option("--steps", run_args.steps, "interactions per run");
  run->add_option("--profile", run_args.profile, "environment profile (JSON)");

  std::string logs_dir, agg_out;
  double utility_weight = 0.5;
  auto* agg = app.add_subcommand("aggregate", "tables and figure data from logs");
  agg->add_option("--logs", logs_dir, "directory holding runs/")->required();
  agg->add_option("--out", agg_out, "output directory")->required();
  agg->add_option("--utility-weight", utility_weight,
                  "criterion utility weight (fairness gets the rest)");

  RunArgs cal_args;
  std::string cal_out;
  auto* cal = app.add_subcommand("calibrate",
                                 "find the optimal feature set for a profile");
  cal->add_option("--profile", cal_args.profile, "input profile")->required();
  cal->add_option("--out", cal_out, "calibrated profile path")->required();
  cal->add_option("--config", cal_args.config, "experiment config (JSON)");
  cal->add_option("--seed", cal_args.seed, "master seed");
  cal->add_option("--runs", cal_args.runs, "runs per feature set (>= 20)");
  cal->add_option("--steps", cal_args.steps, "interactions per run");
  cal->add_option("--parallelism", cal_args.parallelism, "worker threads");

  std::string export_name, export_out;
  auto* exp = app.add_subcommand("export-profile", "write a built-in profile");
  exp->add_option("--name", export_name, "neutral | calibrated")->required();
  exp->add_option("--out", export_out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      const fb::Manifest m = fb::run_experiment(resolve(run_args));
      print_warnings(m.doc);
    } else if (*agg) {
      const fb::PerformanceCriterion criterion{utility_weight,
                                               1.0 - utility_weight};
      fb::validate(criterion);
      for (const auto& p : fb::aggregate(logs_dir, agg_out, criterion)) {
        std::cout << (std::filesystem::path(agg_out) / p).string() << "\n";
      }
    } else if (*cal) {
      cal_args.mode = "calibrate";
      if (!cal_args.runs && cal_args.config.empty()) cal_args.runs = 20;
      const fb::ExperimentConfig c = resolve(cal_args);
      const fb::EnvProfile p = fb::calibrate(c, fb::load_profile(c.profile_path));
      fb::save_profile(p, cal_out);
      if (p.calibration.contains("warning") &&
          !p.calibration["warning"].is_null()) {
        std::cerr << "warning: " << p.calibration["warning"].get<std::string>()
                  << "\n";
      }
      std::cout << "optimal feature set index " << *p.optimal_feature_set_index
                << "\n";
    } else if (*exp) {
      if (export_name == "neutral") {
        fb::save_profile(fb::neutral_profile(), export_out);
      } else if (export_name == "calibrated") {
        fb::save_profile(fb::calibrated_profile(), export_out);
      } else {
        throw fb::ConfigError("unknown profile '" + export_name + "'");
      }
    }
  } catch (const fb::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const fb::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const fb::DegenerateDataError& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
