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

#include "tissue_retract/replay/replay_buffer.h"

#include <functional>

#include <gtest/gtest.h>
#include "tissue_retract/common/error.h"

namespace tissue_retract::replay {
namespace {

constexpr double kTol = 0.005;

double Reward(const Vec3& a, const Vec3& d) {
  return env::ComputeReward(a, d, kTol);
}

// Achieved goals encode (episode tag, step) so a relabeled goal identifies
// the transition it came from.
Vec3 Tag(int episode, int step) { return Vec3(episode, step, 0.0); }

Episode MakeEpisode(int tag, int length) {
  Episode episode(length);
  for (int t = 0; t < length; ++t) {
    env::Transition& tr = episode[t];
    tr.obs.achieved_goal = t == 0 ? Tag(tag, -1) : Tag(tag, t - 1);
    tr.next_obs.achieved_goal = Tag(tag, t);
    tr.obs.desired_goal = Vec3(-100, -100, -100);
    tr.next_obs.desired_goal = tr.obs.desired_goal;
    tr.reward = -1.0;
  }
  return episode;
}

void ExpectCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << ErrorCodeName(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(ReplayBufferTest, InsertCountsTransitions) {
  ReplayBuffer buffer(100, 1);
  EXPECT_TRUE(buffer.empty());
  buffer.InsertEpisode(MakeEpisode(0, 50));
  EXPECT_EQ(buffer.size(), 50u);
  EXPECT_EQ(buffer.num_episodes(), 1u);
}

TEST(ReplayBufferTest, EvictsOldestEpisodesFirst) {
  ReplayBuffer buffer(100, 1);
  for (int i = 0; i < 3; ++i) buffer.InsertEpisode(MakeEpisode(i, 50));
  EXPECT_EQ(buffer.size(), 100u);
  ASSERT_EQ(buffer.num_episodes(), 2u);
  EXPECT_EQ(buffer.episodes()[0][0].next_obs.achieved_goal, Tag(1, 0));
  EXPECT_EQ(buffer.EpisodeId(0), 1);
  EXPECT_EQ(buffer.EpisodeId(1), 2);
}

TEST(ReplayBufferTest, RejectsBadEpisodes) {
  ReplayBuffer buffer(10, 1);
  ExpectCode(ErrorCode::kInvalidArgument, [&] { buffer.InsertEpisode({}); });
  ExpectCode(ErrorCode::kInvalidArgument,
             [&] { buffer.InsertEpisode(MakeEpisode(0, 11)); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { ReplayBuffer bad(0, 1); });
}

TEST(ReplayBufferTest, EmptyBufferSampleIsInvalidState) {
  ReplayBuffer buffer(10, 1);
  ExpectCode(ErrorCode::kInvalidState,
             [&] { SampleHer(buffer, 4, {}, Reward); });
}

TEST(HerTest, OwnOutcomeGoalGivesZeroReward) {
  // A one-step episode can only relabel with its own outcome.
  ReplayBuffer buffer(10, 3);
  buffer.InsertEpisode(MakeEpisode(0, 1));
  for (const Sample& s : SampleHer(buffer, 50, {1000}, Reward)) {
    if (!s.relabeled) continue;
    EXPECT_EQ(s.transition.next_obs.desired_goal,
              s.transition.next_obs.achieved_goal);
    EXPECT_EQ(s.transition.reward, 0.0);
    EXPECT_TRUE(s.transition.done);
  }
}

TEST(HerTest, GoalsComeFromLaterStepsOfSameEpisode) {
  ReplayBuffer buffer(1000, 5);
  for (int i = 0; i < 12; ++i) buffer.InsertEpisode(MakeEpisode(i, 10 + i));
  int relabeled = 0;
  for (const Sample& s : SampleHer(buffer, 10000, {4}, Reward)) {
    if (!s.relabeled) {
      EXPECT_EQ(s.goal_step, -1);
      EXPECT_EQ(s.transition.obs.desired_goal, Vec3(-100, -100, -100));
      continue;
    }
    ++relabeled;
    const Vec3& goal = s.transition.obs.desired_goal;
    EXPECT_EQ(goal, s.transition.next_obs.desired_goal);
    const int source_tag = static_cast<int>(s.transition.next_obs.achieved_goal.x());
    EXPECT_EQ(static_cast<int>(goal.x()), source_tag);
    EXPECT_GE(static_cast<int>(goal.y()), s.step);
    EXPECT_EQ(static_cast<int>(goal.y()), s.goal_step);
  }
  EXPECT_GT(relabeled, 0);
}

TEST(HerTest, RelabelFractionNearFourFifths) {
  ReplayBuffer buffer(1000, 11);
  for (int i = 0; i < 10; ++i) buffer.InsertEpisode(MakeEpisode(i, 50));
  int relabeled = 0;
  for (const Sample& s : SampleHer(buffer, 10000, {4}, Reward)) {
    relabeled += s.relabeled;
  }
  const double fraction = relabeled / 10000.0;
  EXPECT_GE(fraction, 0.78);
  EXPECT_LE(fraction, 0.82);
}

TEST(HerTest, RewardsMatchRewardFunctionExactly) {
  ReplayBuffer buffer(1000, 13);
  // Goals spaced by one tolerance so both reward values occur.
  Episode episode = MakeEpisode(0, 50);
  for (int t = 0; t < 50; ++t) {
    episode[t].next_obs.achieved_goal = Vec3(0.0, 0.0, 0.004 * (t / 3));
  }
  buffer.InsertEpisode(episode);
  int zeros = 0;
  for (const Sample& s : SampleHer(buffer, 5000, {4}, Reward)) {
    const env::Transition& tr = s.transition;
    EXPECT_EQ(tr.reward, env::ComputeReward(tr.next_obs.achieved_goal,
                                            tr.next_obs.desired_goal, kTol));
    EXPECT_EQ(tr.done, tr.reward == 0.0);
    zeros += tr.reward == 0.0;
  }
  EXPECT_GT(zeros, 0);
}

TEST(HerTest, ZeroKLeavesGoalsUnchanged) {
  ReplayBuffer buffer(1000, 17);
  for (int i = 0; i < 4; ++i) buffer.InsertEpisode(MakeEpisode(i, 25));
  std::vector<int> hits(100, 0);
  for (const Sample& s : SampleHer(buffer, 20000, {0}, Reward)) {
    EXPECT_FALSE(s.relabeled);
    EXPECT_EQ(s.transition.obs.desired_goal, Vec3(-100, -100, -100));
    EXPECT_EQ(s.transition.reward, -1.0);
    ++hits[s.episode_id * 25 + s.step];
  }
  // Uniform over the 100 stored transitions: expected 200 hits each.
  for (int h : hits) {
    EXPECT_GT(h, 120);
    EXPECT_LT(h, 280);
  }
}

TEST(HerTest, NegativeKRejected) {
  ReplayBuffer buffer(10, 1);
  buffer.InsertEpisode(MakeEpisode(0, 5));
  ExpectCode(ErrorCode::kInvalidArgument,
             [&] { SampleHer(buffer, 1, {-1}, Reward); });
}

TEST(MixedSampleTest, QuarterDemoComposition) {
  ReplayBuffer agent(1000, 1);
  ReplayBuffer demo(1000, 2);
  agent.InsertEpisode(MakeEpisode(1, 50));
  demo.InsertEpisode(MakeEpisode(2, 50));
  const std::vector<Sample> batch =
      SampleMixed(agent, demo, 128, 0.25, {4}, {4}, Reward);
  ASSERT_EQ(batch.size(), 128u);
  int n_demo = 0;
  for (const Sample& s : batch) {
    const bool is_demo = s.provenance == Provenance::kDemo;
    n_demo += is_demo;
    EXPECT_EQ(static_cast<int>(s.transition.next_obs.achieved_goal.x()),
              is_demo ? 2 : 1);
  }
  EXPECT_EQ(n_demo, 32);
}

TEST(MixedSampleTest, DemoCountRoundsUp) {
  EXPECT_EQ(DemoCount(128, 0.25), 32);
  EXPECT_EQ(DemoCount(10, 0.25), 3);
  EXPECT_EQ(DemoCount(10, 0.0), 0);
  EXPECT_EQ(DemoCount(10, 1.0), 10);
}

TEST(MixedSampleTest, EmptyDemoBufferIsInvalidState) {
  ReplayBuffer agent(1000, 1);
  ReplayBuffer demo(1000, 2);
  agent.InsertEpisode(MakeEpisode(1, 50));
  ExpectCode(ErrorCode::kInvalidState,
             [&] { SampleMixed(agent, demo, 128, 0.25, {4}, {4}, Reward); });
  EXPECT_EQ(SampleMixed(agent, demo, 16, 0.0, {4}, {4}, Reward).size(), 16u);
}

TEST(MixedSampleTest, FractionOutOfRangeRejected) {
  ReplayBuffer agent(1000, 1);
  ReplayBuffer demo(1000, 2);
  agent.InsertEpisode(MakeEpisode(1, 5));
  demo.InsertEpisode(MakeEpisode(2, 5));
  ExpectCode(ErrorCode::kInvalidArgument,
             [&] { SampleMixed(agent, demo, 8, 1.5, {4}, {4}, Reward); });
}

}  // namespace
}  // namespace tissue_retract::replay
