// Copyright 2026 The CascadeLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cascadelab/campaign.h"
#include "cascadelab/fault_points.h"
#include "cascadelab/scenario_parser.h"

namespace {

using cascadelab::CampaignConfig;

constexpr int kExitError = 2;

struct Flags {
  CampaignConfig config;
  size_t max_delay = 0;
  bool no_retrain = false;
  int phase = 0;

  void Finish() {
    if (max_delay > 0) config.max_delay_injections = max_delay;
    config.retrain_before_detect = !no_retrain;
  }
};

void AddConfigFlags(CLI::App* cmd, Flags& f) {
  auto& c = f.config;
  cmd->add_option("scenario", c.scenario_path, "Scenario file")
      ->required()
      ->envname("CASCADELAB_SCENARIO");
  cmd->add_option("-o,--output-dir", c.output_dir, "Artifact directory")
      ->envname("CASCADELAB_OUTPUT_DIR")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed)->envname("CASCADELAB_SEED")->capture_default_str();
  cmd->add_option("--budget-multiplier", c.budget_multiplier)
      ->envname("CASCADELAB_BUDGET_MULTIPLIER")
      ->capture_default_str();
  cmd->add_option("--epsilon", c.epsilon)->envname("CASCADELAB_EPSILON")->capture_default_str();
  cmd->add_option("--tau", c.tau)->envname("CASCADELAB_TAU")->capture_default_str();
  cmd->add_option("--p-value", c.p_value)->envname("CASCADELAB_P_VALUE")->capture_default_str();
  cmd->add_option("--delay-values", c.delay_values, "Loop delays in ms")
      ->delimiter(',')
      ->envname("CASCADELAB_DELAY_VALUES")
      ->capture_default_str();
  cmd->add_option("--timeout-min", c.timeout_min)
      ->envname("CASCADELAB_TIMEOUT_MIN")
      ->capture_default_str();
  cmd->add_option("--timeout-max", c.timeout_max)
      ->envname("CASCADELAB_TIMEOUT_MAX")
      ->capture_default_str();
  cmd->add_option("--beam-size", c.beam_size)
      ->envname("CASCADELAB_BEAM_SIZE")
      ->capture_default_str();
  cmd->add_option("--max-delay-injections", f.max_delay, "0 means unlimited")
      ->envname("CASCADELAB_MAX_DELAY_INJECTIONS");
  cmd->add_option("--max-depth", c.max_depth)
      ->envname("CASCADELAB_MAX_DEPTH")
      ->capture_default_str();
  cmd->add_option("-j,--workers", c.workers)
      ->envname("CASCADELAB_WORKERS")
      ->capture_default_str();
  cmd->add_flag("--no-retrain", f.no_retrain, "Keep phase-two cluster scores for detection")
      ->envname("CASCADELAB_NO_RETRAIN");
}

void AddPhase(CLI::App* cmd, Flags& f) {
  cmd->add_option("--phase", f.phase, "Allocation phase")
      ->required()
      ->check(CLI::Range(1, 3));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault-injection lab for self-sustaining cascading failures"};
  app.require_subcommand(1);
  Flags f;

  auto* profile = app.add_subcommand("profile", "Run fault-free profile passes");
  auto* schedule = app.add_subcommand("schedule", "Plan one allocation phase");
  auto* inject = app.add_subcommand("inject", "Run one phase's injections");
  auto* fca = app.add_subcommand("fca", "Analyze one phase's injections");
  auto* detect = app.add_subcommand("detect", "Stitch edges and search for cycles");
  auto* baseline = app.add_subcommand("baseline", "Run the self-causation baseline");
  auto* campaign = app.add_subcommand("campaign", "Run every stage in order");
  auto* validate = app.add_subcommand("validate", "Parse and lint a scenario");
  for (auto* cmd : {profile, schedule, inject, fca, detect, baseline, campaign}) {
    AddConfigFlags(cmd, f);
  }
  for (auto* cmd : {schedule, inject, fca}) AddPhase(cmd, f);
  std::string lint_path;
  validate->add_option("scenario", lint_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }
  f.Finish();

  try {
    if (validate->parsed()) {
      auto s = cascadelab::LoadScenarioFile(lint_path);
      auto faults = cascadelab::EnumerateFaultPoints(s);
      std::cout << "scenario " << s.name << ": " << s.components.size() << " components, "
                << s.tests.size() << " tests, " << s.loops.size() << " loops, "
                << faults.size() << " fault points\n";
      return 0;
    }
    if (profile->parsed()) {
      auto r = cascadelab::CmdProfile(f.config);
      std::cout << "profiled " << r.tests << " tests, " << r.traces << " traces\n";
    } else if (schedule->parsed()) {
      std::cout << "phase " << f.phase << ": "
                << cascadelab::CmdSchedule(f.config, f.phase) << " experiments scheduled\n";
    } else if (inject->parsed()) {
      std::cout << "phase " << f.phase << ": " << cascadelab::CmdInject(f.config, f.phase)
                << " injection runs\n";
    } else if (fca->parsed()) {
      std::cout << "phase " << f.phase << ": " << cascadelab::CmdFca(f.config, f.phase)
                << " experiments analyzed\n";
    } else if (detect->parsed() || campaign->parsed()) {
      auto r = detect->parsed() ? cascadelab::CmdDetect(f.config)
                                : cascadelab::CmdCampaign(f.config);
      std::cout << r.cycles << " cycles in " << r.cycle_clusters << " clusters"
                << (r.planted_found ? ", planted cycle found" : "") << "\n";
      return cascadelab::CampaignExitCode(r);
    } else if (baseline->parsed()) {
      auto r = cascadelab::CmdBaseline(f.config);
      std::cout << r.detected.size() << " self-causing faults"
                << (r.planted_found ? ", planted cycle found" : "") << "\n";
    }
  } catch (const cascadelab::CampaignError& e) {
    std::cerr << "error in stage " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
