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

#include "tissue_retract/eval/eval.h"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "tissue_retract/common/error.h"

namespace tissue_retract::eval {

std::string OutcomeName(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: return "success";
    case Outcome::kImproperGrasp: return "improper_grasp";
    case Outcome::kDistortion: return "distortion";
    case Outcome::kGripLoss: return "grip_loss";
    case Outcome::kTimeout: return "timeout";
  }
  return "timeout";
}

Outcome ParseOutcome(const std::string& name) {
  for (Outcome o : {Outcome::kSuccess, Outcome::kImproperGrasp,
                    Outcome::kDistortion, Outcome::kGripLoss,
                    Outcome::kTimeout}) {
    if (OutcomeName(o) == name) return o;
  }
  throw Error(ErrorCode::kParseError, "unknown outcome '" + name + "'");
}

Outcome ClassifyFailure(const std::vector<env::Transition>& trace,
                        const FailureConfig& config) {
  Require(!trace.empty(), ErrorCode::kInvalidArgument, "empty trace");
  Require(!trace.back().info.success, ErrorCode::kInvalidArgument,
          "trace ended in success");
  bool grasped = false;
  bool grip_lost = false;
  bool distorted = false;
  for (const env::Transition& tr : trace) {
    grasped = grasped || tr.obs.grasp_flag > 0.5 || tr.next_obs.grasp_flag > 0.5;
    grip_lost = grip_lost || tr.info.grip_lost;
    distorted = distorted || tr.info.max_strain > config.strain_threshold;
  }
  if (distorted) return Outcome::kDistortion;
  if (grip_lost) return Outcome::kGripLoss;
  if (!grasped) return Outcome::kImproperGrasp;
  return Outcome::kTimeout;
}

Outcome ClassifyEpisode(const std::vector<env::Transition>& trace,
                        const FailureConfig& config) {
  if (!trace.empty() && trace.back().info.success) return Outcome::kSuccess;
  return ClassifyFailure(trace, config);
}

void OutcomeCounts::Add(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: ++success; break;
    case Outcome::kImproperGrasp: ++improper_grasp; break;
    case Outcome::kDistortion: ++distortion; break;
    case Outcome::kGripLoss: ++grip_loss; break;
    case Outcome::kTimeout: ++timeout; break;
  }
}

OutcomeCounts& OutcomeCounts::operator+=(const OutcomeCounts& other) {
  success += other.success;
  improper_grasp += other.improper_grasp;
  distortion += other.distortion;
  grip_loss += other.grip_loss;
  timeout += other.timeout;
  return *this;
}

std::uint64_t EvalEpisodeSeed(std::uint64_t seed, int episode) {
  return DeriveSeed(DeriveSeed(seed, 0xE7A1), static_cast<std::uint64_t>(episode));
}

EvalRun RunEval(env::TissueRetractEnv& env, env::Policy& policy, int episodes,
                std::uint64_t seed, const FailureConfig& config) {
  Require(episodes >= 1, ErrorCode::kInvalidArgument,
          "episodes must be at least 1");
  EvalRun run;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t s = EvalEpisodeSeed(seed, i);
    const std::vector<env::Transition> trace = env::Rollout(env, policy, s);
    const Outcome outcome = ClassifyEpisode(trace, config);
    run.episode_seeds.push_back(s);
    run.outcomes.push_back(outcome);
    run.lengths.push_back(static_cast<int>(trace.size()));
    run.counts.Add(outcome);
  }
  run.success_rate = static_cast<double>(run.counts.success) / episodes;
  return run;
}

Aggregate AggregateRates(const std::vector<double>& rates) {
  Require(rates.size() >= 2, ErrorCode::kInsufficientData,
          "aggregation needs at least two seeds, got " +
              std::to_string(rates.size()));
  const double n = static_cast<double>(rates.size());
  double mean = 0.0;
  for (double r : rates) mean += 100.0 * r;
  mean /= n;
  double ss = 0.0;
  for (double r : rates) ss += (100.0 * r - mean) * (100.0 * r - mean);
  const double stdev = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * stdev / std::sqrt(n)};
}

bool EvalReport::operator==(const EvalReport& o) const {
  const bool agg_equal =
      aggregate.has_value() == o.aggregate.has_value() &&
      (!aggregate || (aggregate->mean_percent == o.aggregate->mean_percent &&
                      aggregate->ci95_halfwidth_percent ==
                          o.aggregate->ci95_halfwidth_percent));
  return task == o.task && algorithm == o.algorithm &&
         demo_count == o.demo_count &&
         episodes_per_seed == o.episodes_per_seed && seeds == o.seeds &&
         per_seed_rates == o.per_seed_rates && counts == o.counts && agg_equal;
}

EvalReport MakeReport(env::TaskId task, const std::string& algorithm,
                      int demo_count, const std::vector<std::uint64_t>& seeds,
                      const std::vector<EvalRun>& runs) {
  Require(seeds.size() == runs.size() && !runs.empty(),
          ErrorCode::kInvalidArgument, "one run per seed required");
  EvalReport report;
  report.task = task;
  report.algorithm = algorithm;
  report.demo_count = demo_count;
  report.seeds = seeds;
  report.episodes_per_seed = static_cast<int>(runs.front().outcomes.size());
  for (const EvalRun& run : runs) {
    report.per_seed_rates.push_back(run.success_rate);
    report.counts += run.counts;
  }
  if (runs.size() >= 2) report.aggregate = AggregateRates(report.per_seed_rates);
  return report;
}

nlohmann::json ReportToJson(const EvalReport& r) {
  nlohmann::json j = {
      {"type", "eval_report"},
      {"task", std::string(env::TaskName(r.task))},
      {"algorithm", r.algorithm},
      {"demo_count", r.demo_count},
      {"episodes_per_seed", r.episodes_per_seed},
      {"seeds", r.seeds},
      {"per_seed_rates", r.per_seed_rates},
      {"failure_counts",
       {{"success", r.counts.success},
        {"improper_grasp", r.counts.improper_grasp},
        {"distortion", r.counts.distortion},
        {"grip_loss", r.counts.grip_loss},
        {"timeout", r.counts.timeout}}}};
  if (r.aggregate) {
    j["mean_percent"] = r.aggregate->mean_percent;
    j["ci95_halfwidth_percent"] = r.aggregate->ci95_halfwidth_percent;
  } else {
    j["mean_percent"] = nullptr;
    j["ci95_halfwidth_percent"] = nullptr;
  }
  return j;
}

EvalReport ReportFromJson(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.task = env::ParseTaskId(j.at("task").get<std::string>());
    r.algorithm = j.at("algorithm").get<std::string>();
    r.demo_count = j.at("demo_count").get<int>();
    r.episodes_per_seed = j.at("episodes_per_seed").get<int>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.per_seed_rates = j.at("per_seed_rates").get<std::vector<double>>();
    const auto& c = j.at("failure_counts");
    r.counts.success = c.at("success").get<int>();
    r.counts.improper_grasp = c.at("improper_grasp").get<int>();
    r.counts.distortion = c.at("distortion").get<int>();
    r.counts.grip_loss = c.at("grip_loss").get<int>();
    r.counts.timeout = c.at("timeout").get<int>();
    if (!j.at("mean_percent").is_null()) {
      r.aggregate = Aggregate{j.at("mean_percent").get<double>(),
                              j.at("ci95_halfwidth_percent").get<double>()};
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("eval report: ") + e.what());
  }
}

namespace {

std::string Printf(const char* format, double a, double b = 0.0) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

std::string JoinRates(const std::vector<double>& rates, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) out += sep;
    out += Printf("%.4f", rates[i]);
  }
  return out;
}

}  // namespace

std::string FormatMeanCi(const EvalReport& r) {
  if (!r.aggregate) return "n/a (insufficient-data)";
  return Printf("%.1f ± %.1f", r.aggregate->mean_percent,
                r.aggregate->ci95_halfwidth_percent);
}

std::string FormatTable(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-5s %-8s %6s  %-24s %-24s %8s %8s %8s %8s\n",
                "task", "algo", "demos", "per-seed rates", "success % (95% CI)",
                "improper", "distort", "griploss", "timeout");
  out << line;
  for (const EvalReport& r : reports) {
    std::snprintf(line, sizeof(line),
                  "%-5s %-8s %6d  %-24s %-24s %8d %8d %8d %8d\n",
                  std::string(env::TaskName(r.task)).c_str(), r.algorithm.c_str(),
                  r.demo_count, JoinRates(r.per_seed_rates, " ").c_str(),
                  FormatMeanCi(r).c_str(), r.counts.improper_grasp,
                  r.counts.distortion, r.counts.grip_loss, r.counts.timeout);
    out << line;
  }
  return out.str();
}

std::string CsvHeader() {
  return "task,algorithm,demo_count,episodes_per_seed,seeds,per_seed_rates,"
         "mean_percent,ci95_halfwidth_percent,success,improper_grasp,"
         "distortion,grip_loss,timeout";
}

std::string CsvRow(const EvalReport& r) {
  std::ostringstream out;
  out << env::TaskName(r.task) << ',' << r.algorithm << ',' << r.demo_count
      << ',' << r.episodes_per_seed << ',';
  for (std::size_t i = 0; i < r.seeds.size(); ++i) {
    out << (i ? ";" : "") << r.seeds[i];
  }
  out << ',' << JoinRates(r.per_seed_rates, ";") << ',';
  if (r.aggregate) {
    out << Printf("%.4f", r.aggregate->mean_percent) << ','
        << Printf("%.4f", r.aggregate->ci95_halfwidth_percent);
  } else {
    out << ',';
  }
  out << ',' << r.counts.success << ',' << r.counts.improper_grasp << ','
      << r.counts.distortion << ',' << r.counts.grip_loss << ','
      << r.counts.timeout;
  return out.str();
}

}  // namespace tissue_retract::eval
