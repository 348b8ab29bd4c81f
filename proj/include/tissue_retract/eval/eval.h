// Copyright 2026 The TissueRetract Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TISSUE_RETRACT_EVAL_EVAL_H_
#define TISSUE_RETRACT_EVAL_EVAL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tissue_retract/env/policy.h"
#include "tissue_retract/env/tissue_retract_env.h"

namespace tissue_retract::eval {

enum class Outcome { kSuccess, kImproperGrasp, kDistortion, kGripLoss, kTimeout };

std::string OutcomeName(Outcome outcome);
Outcome ParseOutcome(const std::string& name);

struct FailureConfig {
  double strain_threshold = 0.5;
};

// Tags an unsuccessful episode. When several apply the priority is
// distortion > grip_loss > improper_grasp > timeout. Throws invalid-argument
// for an empty or successful trace.
Outcome ClassifyFailure(const std::vector<env::Transition>& trace,
                        const FailureConfig& config = {});

// kSuccess when the last transition succeeded, else ClassifyFailure.
Outcome ClassifyEpisode(const std::vector<env::Transition>& trace,
                        const FailureConfig& config = {});

struct OutcomeCounts {
  int success = 0;
  int improper_grasp = 0;
  int distortion = 0;
  int grip_loss = 0;
  int timeout = 0;

  void Add(Outcome outcome);
  OutcomeCounts& operator+=(const OutcomeCounts& other);
  int total() const {
    return success + improper_grasp + distortion + grip_loss + timeout;
  }
  bool operator==(const OutcomeCounts&) const = default;
};

struct EvalRun {
  double success_rate = 0.0;
  std::vector<std::uint64_t> episode_seeds;
  std::vector<Outcome> outcomes;
  std::vector<int> lengths;
  OutcomeCounts counts;
};

std::uint64_t EvalEpisodeSeed(std::uint64_t seed, int episode);

// Runs `episodes` episodes, the i-th reset with EvalEpisodeSeed(seed, i).
EvalRun RunEval(env::TissueRetractEnv& env, env::Policy& policy, int episodes,
                std::uint64_t seed, const FailureConfig& config = {});

struct Aggregate {
  double mean_percent = 0.0;
  double ci95_halfwidth_percent = 0.0;
};

// Mean of per-seed percentages with a normal-approximation interval,
// 1.96 * s / sqrt(n). Throws insufficient-data for fewer than two rates.
Aggregate AggregateRates(const std::vector<double>& rates);

struct EvalReport {
  env::TaskId task = env::TaskId::kI;
  std::string algorithm;
  int demo_count = 0;
  int episodes_per_seed = 50;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_rates;
  std::optional<Aggregate> aggregate;  // empty with fewer than two seeds
  OutcomeCounts counts;

  bool operator==(const EvalReport& other) const;
};

// Fills per_seed_rates, counts and aggregate from one run per seed.
EvalReport MakeReport(env::TaskId task, const std::string& algorithm,
                      int demo_count, const std::vector<std::uint64_t>& seeds,
                      const std::vector<EvalRun>& runs);

nlohmann::json ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const nlohmann::json& j);

// "mean ± ci" or "n/a (insufficient-data)".
std::string FormatMeanCi(const EvalReport& report);
// Success-rate table with one row per report.
std::string FormatTable(const std::vector<EvalReport>& reports);
std::string CsvHeader();
std::string CsvRow(const EvalReport& report);

}  // namespace tissue_retract::eval

#endif  // TISSUE_RETRACT_EVAL_EVAL_H_
