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

#include <algorithm>
#include <cmath>
#include <functional>

#include <gtest/gtest.h>
#include "tissue_retract/agents/agent.h"
#include "tissue_retract/common/error.h"
#include "tissue_retract/demo/demogen.h"

namespace tissue_retract::eval {
namespace {

void ExpectCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << ErrorCodeName(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

std::vector<env::Transition> Trace(int length) {
  std::vector<env::Transition> trace(length);
  for (env::Transition& t : trace) t.info.max_strain = 0.1;
  return trace;
}

void Grasp(std::vector<env::Transition>& trace, int from) {
  for (std::size_t t = from; t < trace.size(); ++t) {
    trace[t].next_obs.grasp_flag = 1.0;
    if (t > static_cast<std::size_t>(from)) trace[t].obs.grasp_flag = 1.0;
  }
}

TEST(AggregateTest, ZeroVariance) {
  const Aggregate a = AggregateRates({0.8, 0.8, 0.8});
  EXPECT_NEAR(a.mean_percent, 80.0, 1e-12);
  EXPECT_NEAR(a.ci95_halfwidth_percent, 0.0, 1e-12);
}

TEST(AggregateTest, HandComputedInterval) {
  // Deviations from 85 are -5, +5, 0: sample variance 50/2 = 25, s = 5.
  const Aggregate a = AggregateRates({0.80, 0.90, 0.85});
  EXPECT_NEAR(a.mean_percent, 85.0, 1e-9);
  EXPECT_NEAR(a.ci95_halfwidth_percent, 1.96 * 5.0 / std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(a.ci95_halfwidth_percent, 5.66, 0.005);
}

TEST(AggregateTest, PermutationInvariant) {
  std::vector<double> rates = {0.1, 0.42, 0.9, 0.66, 0.3};
  const Aggregate base = AggregateRates(rates);
  std::sort(rates.begin(), rates.end());
  do {
    const Aggregate a = AggregateRates(rates);
    EXPECT_NEAR(a.mean_percent, base.mean_percent, 1e-12);
    EXPECT_NEAR(a.ci95_halfwidth_percent, base.ci95_halfwidth_percent, 1e-12);
  } while (std::next_permutation(rates.begin(), rates.end()));
}

TEST(AggregateTest, SingleRateIsInsufficientData) {
  ExpectCode(ErrorCode::kInsufficientData, [] { AggregateRates({0.5}); });
  ExpectCode(ErrorCode::kInsufficientData, [] { AggregateRates({}); });
}

TEST(ClassifyTest, NeverGraspedIsImproperGrasp) {
  EXPECT_EQ(ClassifyFailure(Trace(50)), Outcome::kImproperGrasp);
}

TEST(ClassifyTest, GripLostAfterGrasp) {
  auto trace = Trace(50);
  Grasp(trace, 10);
  trace[30].info.grip_lost = true;
  EXPECT_EQ(ClassifyFailure(trace), Outcome::kGripLoss);
}

TEST(ClassifyTest, HighStrainIsDistortion) {
  auto trace = Trace(50);
  Grasp(trace, 10);
  trace[20].info.max_strain = 0.9;
  trace[30].info.grip_lost = true;
  EXPECT_EQ(ClassifyFailure(trace), Outcome::kDistortion);
  EXPECT_EQ(ClassifyFailure(trace, {.strain_threshold = 1.0}),
            Outcome::kGripLoss);
}

TEST(ClassifyTest, GraspedButShortIsTimeout) {
  auto trace = Trace(50);
  Grasp(trace, 5);
  EXPECT_EQ(ClassifyFailure(trace), Outcome::kTimeout);
}

TEST(ClassifyTest, SuccessfulTraceRejectedByFailureTagger) {
  auto trace = Trace(12);
  Grasp(trace, 3);
  trace.back().info.success = true;
  EXPECT_EQ(ClassifyEpisode(trace), Outcome::kSuccess);
  ExpectCode(ErrorCode::kInvalidArgument, [&] { ClassifyFailure(trace); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { ClassifyFailure({}); });
}

TEST(OutcomeTest, NamesRoundTrip) {
  for (Outcome o : {Outcome::kSuccess, Outcome::kImproperGrasp,
                    Outcome::kDistortion, Outcome::kGripLoss,
                    Outcome::kTimeout}) {
    EXPECT_EQ(ParseOutcome(OutcomeName(o)), o);
  }
}

TEST(RunEvalTest, ScriptedPolicySucceeds) {
  env::TissueRetractEnv env(env::EnvConfig{});
  demo::ScriptedPolicy policy({}, env.config().max_step);
  const EvalRun run = RunEval(env, policy, 50, 1);
  EXPECT_GE(run.success_rate, 0.98);
  EXPECT_EQ(run.counts.total(), 50);
  EXPECT_EQ(run.outcomes.size(), 50u);
}

TEST(RunEvalTest, UntrainedActorRarelySucceeds) {
  env::TissueRetractEnv env(env::EnvConfig{});
  agents::Agent agent(agents::AgentConfig{});
  agents::AgentPolicy policy(agent, false);
  const EvalRun run = RunEval(env, policy, 50, 1);
  EXPECT_LE(run.success_rate, 0.1);
  EXPECT_EQ(run.counts.total(), 50);
}

TEST(RunEvalTest, Deterministic) {
  env::TissueRetractEnv env(env::EnvConfig{});
  agents::AgentConfig config;
  config.hidden = {32, 32};
  agents::Agent agent(config);
  agents::AgentPolicy policy(agent, false);
  const EvalRun a = RunEval(env, policy, 10, 7);
  const EvalRun b = RunEval(env, policy, 10, 7);
  EXPECT_EQ(a.success_rate, b.success_rate);
  EXPECT_EQ(a.outcomes, b.outcomes);
  EXPECT_EQ(a.lengths, b.lengths);
  EXPECT_EQ(a.episode_seeds, b.episode_seeds);
  EXPECT_NE(EvalEpisodeSeed(7, 0), EvalEpisodeSeed(8, 0));
}

TEST(ReportTest, JsonRoundTripAndFormatting) {
  EvalRun r1, r2, r3;
  r1.success_rate = 0.80;
  r2.success_rate = 0.90;
  r3.success_rate = 0.85;
  r1.counts.success = 40;
  r1.counts.timeout = 10;
  const EvalReport report =
      MakeReport(env::TaskId::kIII, "col", 100, {1, 2, 3}, {r1, r2, r3});
  ASSERT_TRUE(report.aggregate.has_value());
  EXPECT_NEAR(report.aggregate->mean_percent, 85.0, 1e-9);
  EXPECT_EQ(report.counts.success, 40);
  EXPECT_EQ(ReportFromJson(ReportToJson(report)), report);
  EXPECT_EQ(FormatMeanCi(report), "85.0 ± 5.7");
  EXPECT_NE(FormatTable({report}).find("85.0 ± 5.7"), std::string::npos);
  EXPECT_NE(CsvRow(report).find("col"), std::string::npos);
}

TEST(ReportTest, SingleSeedHasNoAggregate) {
  EvalRun r;
  r.success_rate = 0.5;
  const EvalReport report = MakeReport(env::TaskId::kI, "ddpg", 0, {1}, {r});
  EXPECT_FALSE(report.aggregate.has_value());
  EXPECT_EQ(FormatMeanCi(report), "n/a (insufficient-data)");
  const nlohmann::json j = ReportToJson(report);
  EXPECT_TRUE(j["mean_percent"].is_null());
  EXPECT_EQ(ReportFromJson(j), report);
}

}  // namespace
}  // namespace tissue_retract::eval
