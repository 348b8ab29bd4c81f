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


#include "tissue_retract/cli/cli.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "tissue_retract/common/error.h"
#include "tissue_retract/common/hash.h"
#include "tissue_retract/env/json_io.h"
#include "tissue_retract/env/policy.h"

namespace tissue_retract::cli {
namespace {

using nlohmann::json;

json DemoConfigToJson(const demo::DemoConfig& c) {
  return {{"clearance", c.clearance},
          {"advance_tolerance", c.advance_tolerance},
          {"hold_steps", c.hold_steps},
          {"attempts_per_episode", c.attempts_per_episode}};
}

demo::DemoConfig DemoConfigFromJson(const json& j) {
  demo::DemoConfig c;
  c.clearance = j.at("clearance").get<double>();
  c.advance_tolerance = j.at("advance_tolerance").get<double>();
  c.hold_steps = j.at("hold_steps").get<int>();
  c.attempts_per_episode = j.at("attempts_per_episode").get<int>();
  return c;
}

json ParseIniValue(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream file(path, std::ios::binary);
  Require(static_cast<bool>(file), ErrorCode::kInvalidArgument,
          "cannot write " + path.string());
  file << text;
  Require(static_cast<bool>(file), ErrorCode::kInvalidArgument,
          "write failed for " + path.string());
}

// Options shared by the commands that build settings.
struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> task;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonOptions& common, bool with_seed = true) {
  cmd->add_option("--config", common.config_path, "INI settings file")
      ->envname("TISSUE_RETRACT_CONFIG");
  cmd->add_option("--task", common.task, "task: I, II or III");
  if (with_seed) {
    cmd->add_option("--seed", common.seed, "root seed")
        ->envname("TISSUE_RETRACT_SEED");
  }
}

void LoadCommon(const CommonOptions& common, Settings& settings) {
  if (common.config_path) ApplyIniFile(*common.config_path, settings);
  if (common.task) settings.env.task.task_id = env::ParseTaskId(*common.task);
}

json DemoRef(const std::optional<std::string>& path,
             const demo::DemoCorpus* corpus) {
  if (!path || corpus == nullptr) return nullptr;
  return {{"path", *path},
          {"sha256", Sha256File(*path)},
          {"episodes", corpus->episodes.size()}};
}

// Deterministic manifest body; the on-disk run manifest adds timestamps.
json Manifest(const std::string& command, const Settings& settings,
              const json& extra) {
  json m = {{"type", "run_manifest"},
            {"command", command},
            {"version", kVersion},
            {"config", settings.ToJson()},
            {"env_config_hash", env::ConfigHash(settings.env)}};
  for (const auto& [key, value] : extra.items()) m[key] = value;
  return m;
}

void WriteRunManifest(const std::filesystem::path& dir, json manifest,
                      const std::string& started) {
  manifest["started_at"] = started;
  manifest["finished_at"] = Timestamp();
  WriteText(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- gen-demos

struct GenDemosOptions {
  CommonOptions common;
  int count = 0;
  std::string out = "demos.jsonl";
};

int GenDemos(const GenDemosOptions& o, std::ostream& out) {
  Settings settings;
  LoadCommon(o.common, settings);
  const std::uint64_t seed = o.common.seed.value_or(1);
  const demo::DemoCorpus corpus =
      demo::GenerateDemos(settings.env, o.count, seed, settings.demo);
  const std::filesystem::path out_path(o.out);
  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  demo::WriteCorpusFile(o.out, corpus);
  char line[256];
  std::snprintf(line, sizeof(line),
                "wrote %s: %d episodes, mean length %.2f, success fraction "
                "before filtering %.4f (%d attempts)\n",
                o.out.c_str(), corpus.manifest.episodes,
                corpus.MeanEpisodeLength(), corpus.SuccessFraction(),
                corpus.manifest.attempts);
  out << line << "sha256 " << Sha256File(o.out) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- train

struct TrainOptions {
  CommonOptions common;
  std::optional<std::string> algorithm;
  std::optional<int> episodes;
  std::optional<int> updates_per_episode;
  std::optional<int> eval_interval;
  std::optional<int> eval_episodes;
  std::optional<std::string> demos;
  std::string out_dir = "run";
};

int TrainCommand(const TrainOptions& o, std::ostream& out) {
  const std::string started = Timestamp();
  Settings settings;
  LoadCommon(o.common, settings);
  if (o.algorithm) settings.agent.algorithm = agents::ParseAlgorithm(*o.algorithm);
  if (o.episodes) settings.train.episodes = *o.episodes;
  if (o.updates_per_episode) {
    settings.train.updates_per_episode = *o.updates_per_episode;
  }
  if (o.eval_interval) settings.train.eval_interval = *o.eval_interval;
  if (o.eval_episodes) settings.train.eval_episodes = *o.eval_episodes;
  if (o.common.seed) {
    settings.train.seed = *o.common.seed;
    settings.agent.seed = *o.common.seed;
  }

  std::optional<demo::DemoCorpus> corpus;
  const bool wants_demos = agents::UsesDemonstrations(settings.agent.algorithm);
  if (o.demos && wants_demos) {
    corpus = demo::ReadCorpusFile(*o.demos);
  } else if (o.demos) {
    out << "note: ddpg ignores --demos\n";
  }

  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  const std::filesystem::path log_path = dir / "log.csv";
  const std::filesystem::path ckpt_path = dir / "checkpoint.json";
  std::ofstream log(log_path, std::ios::binary);
  Require(static_cast<bool>(log), ErrorCode::kInvalidArgument,
          "cannot write " + log_path.string());
  log << training::LogHeader() << "\n";

  const training::TrainResult result = training::Train(
      settings.env, settings.agent, settings.train,
      corpus ? &*corpus : nullptr, [&](const training::LogRow& row) {
        log << training::FormatLogRow(row) << "\n";
        if (row.eval_success_rate) {
          char line[96];
          std::snprintf(line, sizeof(line), "episode %d eval success %.3f\n",
                        row.episode, *row.eval_success_rate);
          out << line << std::flush;
        }
      });
  log.close();

  const json manifest = Manifest(
      "train", settings,
      {{"algorithm", agents::AlgorithmName(settings.agent.algorithm)},
       {"seed", settings.train.seed},
       {"demos", DemoRef(wants_demos ? o.demos : std::nullopt,
                         corpus ? &*corpus : nullptr)}});
  // The checkpoint's copy identifies inputs by content only, so reruns in
  // another directory produce identical bytes.
  json embedded = manifest;
  if (embedded["demos"].is_object()) embedded["demos"].erase("path");
  agents::WriteCheckpoint(ckpt_path.string(), result.agent, embedded);
  json run_manifest = manifest;
  run_manifest["outputs"] = {{"log", log_path.string()},
                             {"checkpoint", ckpt_path.string()}};
  WriteRunManifest(dir, run_manifest, started);
  if (result.final_eval_rate) {
    char line[96];
    std::snprintf(line, sizeof(line), "final eval success %.3f\n",
                  *result.final_eval_rate);
    out << line;
  }
  out << "wrote " << ckpt_path.string() << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- eval

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::optional<int> episodes;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir = "eval";
  std::optional<std::string> trace;
};

void WriteTraceHeader(std::ostream& trace, const json& manifest) {
  json header = manifest;
  header["type"] = "eval_trace";
  header.erase("checkpoint");
  header.erase("outputs");
  trace << header.dump() << "\n";
}

int EvalCommand(const EvalOptions& o, std::ostream& out) {
  const std::string started = Timestamp();
  Settings settings;
  std::optional<agents::Agent> agent;
  std::string label = "scripted";
  int demo_count = 0;
  if (o.checkpoint != "scripted") {
    agents::LoadedCheckpoint loaded = agents::ReadCheckpoint(o.checkpoint);
    if (loaded.manifest.contains("config") &&
        loaded.manifest["config"].contains("env")) {
      settings.env = loaded.manifest["config"]["env"].get<env::EnvConfig>();
    }
    if (!loaded.scripted) {
      agent = std::move(loaded.agent);
      label = agents::AlgorithmName(agent->config().algorithm);
      const json& demos = loaded.manifest.value("demos", json(nullptr));
      if (demos.is_object()) demo_count = demos.value("episodes", 0);
    }
  }
  LoadCommon(o.common, settings);
  const int episodes = o.episodes.value_or(50);
  Require(episodes >= 1, ErrorCode::kInvalidArgument,
          "episodes must be at least 1");
  Require(!o.seeds.empty(), ErrorCode::kInvalidArgument, "no seeds given");

  env::TissueRetractEnv environment(settings.env);
  demo::ScriptedPolicy scripted(settings.demo, settings.env.max_step);
  std::optional<agents::AgentPolicy> learned;
  if (agent) learned.emplace(*agent, false);
  env::Policy& policy =
      learned ? static_cast<env::Policy&>(*learned) : scripted;

  const std::filesystem::path dir(o.out_dir);
  const json manifest = Manifest(
      "eval", settings,
      {{"checkpoint", o.checkpoint},
       {"checkpoint_sha256",
        o.checkpoint == "scripted" ? json(nullptr)
                                   : json(Sha256File(o.checkpoint))},
       {"episodes_per_seed", episodes},
       {"seeds", o.seeds},
       {"outputs",
        {{"report", (dir / "report.json").string()},
         {"csv", (dir / "report.csv").string()},
         {"table", (dir / "table.txt").string()}}}});

  std::ofstream trace;
  if (o.trace) {
    const std::filesystem::path trace_path(*o.trace);
    if (trace_path.has_parent_path()) {
      std::filesystem::create_directories(trace_path.parent_path());
    }
    trace.open(trace_path, std::ios::binary);
    Require(static_cast<bool>(trace), ErrorCode::kInvalidArgument,
            "cannot write " + *o.trace);
    WriteTraceHeader(trace, manifest);
  }

  std::vector<eval::EvalRun> runs;
  for (std::uint64_t seed : o.seeds) {
    if (!o.trace) {
      runs.push_back(eval::RunEval(environment, policy, episodes, seed,
                                   settings.failure));
      continue;
    }
    // Same seeds and outcomes as RunEval, with every transition recorded.
    eval::EvalRun run;
    int successes = 0;
    for (int i = 0; i < episodes; ++i) {
      const std::uint64_t episode_seed = eval::EvalEpisodeSeed(seed, i);
      const std::vector<env::Transition> transitions =
          env::Rollout(environment, policy, episode_seed);
      const eval::Outcome outcome =
          eval::ClassifyEpisode(transitions, settings.failure);
      for (std::size_t t = 0; t < transitions.size(); ++t) {
        json line = transitions[t];
        line["seed"] = episode_seed;
        line["episode"] = i;
        line["t"] = t;
        trace << line.dump() << "\n";
      }
      run.episode_seeds.push_back(episode_seed);
      run.outcomes.push_back(outcome);
      run.lengths.push_back(static_cast<int>(transitions.size()));
      run.counts.Add(outcome);
      successes += outcome == eval::Outcome::kSuccess;
    }
    run.success_rate = static_cast<double>(successes) / episodes;
    runs.push_back(std::move(run));
  }

  eval::EvalReport report = eval::MakeReport(
      settings.env.task.task_id, label, demo_count, o.seeds, runs);
  report.episodes_per_seed = episodes;
  WriteText(dir / "report.json", eval::ReportToJson(report).dump(2) + "\n");
  WriteText(dir / "report.csv",
            eval::CsvHeader() + "\n" + eval::CsvRow(report) + "\n");
  const std::string table = eval::FormatTable({report});
  WriteText(dir / "table.txt", table);
  WriteRunManifest(dir, manifest, started);
  out << table;
  return kExitOk;
}

// ------------------------------------------------------------------- ablate

struct AblateOptions {
  CommonOptions common;
  std::vector<std::string> algorithms{"col"};
  std::vector<int> counts{25, 50, 100};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::optional<int> episodes;
  std::optional<int> updates_per_episode;
  int eval_episodes = 50;
  std::string demos;
  std::string out_dir = "ablation";
};

int AblateCommand(const AblateOptions& o, std::ostream& out) {
  const std::string started = Timestamp();
  Settings settings;
  LoadCommon(o.common, settings);
  if (o.episodes) settings.train.episodes = *o.episodes;
  if (o.updates_per_episode) {
    settings.train.updates_per_episode = *o.updates_per_episode;
  }
  training::AblationConfig ablation;
  for (const std::string& name : o.algorithms) {
    ablation.algorithms.push_back(agents::ParseAlgorithm(name));
  }
  ablation.demo_counts = o.counts;
  ablation.seeds = o.seeds;
  ablation.eval_episodes = o.eval_episodes;
  const demo::DemoCorpus corpus = demo::ReadCorpusFile(o.demos);

  const std::vector<training::AblationCell> cells = training::RunAblation(
      settings.env, settings.agent, settings.train, corpus, ablation);

  const std::filesystem::path dir(o.out_dir);
  std::vector<eval::EvalReport> reports;
  json report_json = json::array();
  std::string csv = eval::CsvHeader() + "\n";
  for (const training::AblationCell& cell : cells) {
    reports.push_back(cell.report);
    report_json.push_back(eval::ReportToJson(cell.report));
    csv += eval::CsvRow(cell.report) + "\n";
  }
  WriteText(dir / "reports.json", report_json.dump(2) + "\n");
  WriteText(dir / "ablation.csv", csv);
  const std::string table = eval::FormatTable(reports);
  WriteText(dir / "table.txt", table);
  json corpus_ref = {{"path", o.demos},
                     {"sha256", Sha256File(o.demos)},
                     {"episodes", corpus.episodes.size()}};
  WriteRunManifest(
      dir,
      Manifest("ablate", settings,
               {{"algorithms", o.algorithms},
                {"demo_counts", o.counts},
                {"seeds", o.seeds},
                {"eval_episodes", o.eval_episodes},
                {"demos", corpus_ref},
                {"outputs",
                 {{"reports", (dir / "reports.json").string()},
                  {"csv", (dir / "ablation.csv").string()},
                  {"table", (dir / "table.txt").string()}}}}),
      started);
  out << table;
  return kExitOk;
}

// ------------------------------------------------------------------- replay

struct ReplayOptions {
  std::string trace;
  double strain_threshold = eval::FailureConfig{}.strain_threshold;
};

std::string FormatVec(const Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.4f, %.4f, %.4f)", v.x(), v.y(), v.z());
  return buf;
}

void FlushEpisode(std::vector<env::Transition>& episode,
                  const eval::FailureConfig& failure, eval::OutcomeCounts& counts,
                  std::ostream& out) {
  if (episode.empty()) return;
  const eval::Outcome outcome = eval::ClassifyEpisode(episode, failure);
  counts.Add(outcome);
  char line[160];
  std::snprintf(line, sizeof(line), "  %zu steps, final reward %g, outcome %s\n",
                episode.size(), episode.back().reward,
                eval::OutcomeName(outcome).c_str());
  out << line;
  episode.clear();
}

int ReplayCommand(const ReplayOptions& o, std::ostream& out) {
  std::ifstream in(o.trace, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kInvalidArgument,
          "cannot read " + o.trace);
  const eval::FailureConfig failure{o.strain_threshold};
  eval::OutcomeCounts counts;
  std::vector<env::Transition> episode;
  json current_key;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    env::Transition tr;
    try {
      j = json::parse(text);
      if (j.contains("type")) continue;  // header line
      tr = j.get<env::Transition>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  o.trace + ": line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    const json key = {j.value("seed", json(nullptr)),
                      j.value("episode", json(nullptr))};
    if (key != current_key || j.value("t", -1) == 0) {
      FlushEpisode(episode, failure, counts, out);
      current_key = key;
      out << "episode " << j.value("episode", json(nullptr)).dump() << " seed "
          << j.value("seed", json(nullptr)).dump() << "\n";
    }
    char line[256];
    std::snprintf(line, sizeof(line),
                  "  t=%2d ee=%s anchor=%s grasp=%d reward=%g strain=%.4f%s\n",
                  j.value("t", static_cast<int>(episode.size())),
                  FormatVec(tr.next_obs.ee_position).c_str(),
                  FormatVec(tr.next_obs.anchor_position).c_str(),
                  tr.next_obs.grasp_flag > 0.5 ? 1 : 0, tr.reward,
                  tr.info.max_strain, tr.info.grip_lost ? " grip_lost" : "");
    out << line;
    episode.push_back(std::move(tr));
  }
  FlushEpisode(episode, failure, counts, out);
  Require(counts.total() > 0, ErrorCode::kParseError,
          o.trace + ": no transitions");
  out << "summary: " << counts.total() << " episodes, success "
      << counts.success << ", improper_grasp " << counts.improper_grasp
      << ", distortion " << counts.distortion << ", grip_loss "
      << counts.grip_loss << ", timeout " << counts.timeout << "\n";
  return kExitOk;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigurationError:
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

}  // namespace

json Settings::ToJson() const {
  return {{"env", env},
          {"agent", agents::AgentConfigToJson(agent)},
          {"train", training::TrainConfigToJson(train)},
          {"demo", DemoConfigToJson(demo)},
          {"eval", {{"strain_threshold", failure.strain_threshold}}}};
}

void ApplyIni(std::istream& in, Settings& settings) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigurationError,
                "settings file line " + std::to_string(e.line()) + ": " +
                    e.message());
  }
  json all = settings.ToJson();
  // The JSON form spells out the per-algorithm default widths; keep them
  // implicit unless the file sets them, so a later --algo still applies.
  bool sets_hidden = false;
  for (const auto& [section, keys] : tree) {
    Require(all.contains(section), ErrorCode::kConfigurationError,
            "unknown settings section [" + section + "]");
    Require(!keys.data().empty() || !keys.empty(),
            ErrorCode::kConfigurationError,
            "settings key outside a section: " + section);
    for (const auto& [key, value] : keys) {
      std::string pointer = "/" + section + "/" + key;
      for (char& c : pointer) {
        if (c == '.') c = '/';
      }
      const json::json_pointer ptr(pointer);
      Require(all.contains(ptr), ErrorCode::kConfigurationError,
              "unknown settings key " + section + "." + key);
      all[ptr] = ParseIniValue(value.data());
      if (section == "agent" && key.rfind("hidden", 0) == 0) sets_hidden = true;
    }
  }
  try {
    Settings updated;
    updated.env = all.at("env").get<env::EnvConfig>();
    updated.agent = agents::AgentConfigFromJson(all.at("agent"));
    if (!sets_hidden) updated.agent.hidden = settings.agent.hidden;
    updated.train = training::TrainConfigFromJson(all.at("train"));
    updated.demo = DemoConfigFromJson(all.at("demo"));
    updated.failure.strain_threshold =
        all.at("eval").at("strain_threshold").get<double>();
    settings = updated;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigurationError,
                std::string("bad settings value: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigurationError, e.what());
  }
}

void ApplyIniFile(const std::string& path, Settings& settings) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kConfigurationError,
          "cannot read settings file " + path);
  ApplyIni(in, settings);
}

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Soft-tissue retraction benchmark", "tissue_retract"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenDemosOptions gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-demos", "generate scripted demonstrations");
  AddCommon(gen_cmd, gen.common);
  gen_cmd->add_option("--count", gen.count, "successful episodes to keep")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen.out, "corpus path")
      ->envname("TISSUE_RETRACT_DEMOS");

  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "train one agent");
  AddCommon(train_cmd, train.common);
  train_cmd->add_option("--algo", train.algorithm,
                        "ddpg, sqil, ddpgbc, col or dex");
  train_cmd->add_option("--episodes", train.episodes)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--updates-per-episode", train.updates_per_episode)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--eval-interval", train.eval_interval,
                        "episodes between greedy evaluations, 0 disables");
  train_cmd->add_option("--eval-episodes", train.eval_episodes);
  train_cmd->add_option("--demos", train.demos, "demonstration corpus")
      ->envname("TISSUE_RETRACT_DEMOS");
  train_cmd->add_option("--out-dir", train.out_dir)
      ->envname("TISSUE_RETRACT_RUN_DIR");

  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  AddCommon(eval_cmd, ev.common, false);
  eval_cmd->add_option("--checkpoint", ev.checkpoint,
                       "checkpoint file, or 'scripted'")
      ->required();
  eval_cmd->add_option("--episodes", ev.episodes, "episodes per seed")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seeds", ev.seeds)->delimiter(',');
  eval_cmd->add_option("--out-dir", ev.out_dir)
      ->envname("TISSUE_RETRACT_RUN_DIR");
  eval_cmd->add_option("--trace", ev.trace,
                       "write every transition as JSON lines");

  AblateOptions ab;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "success rate versus demonstration count");
  AddCommon(ablate_cmd, ab.common, false);
  ablate_cmd->add_option("--algos", ab.algorithms)->delimiter(',');
  ablate_cmd->add_option("--counts", ab.counts)->delimiter(',');
  ablate_cmd->add_option("--seeds", ab.seeds)->delimiter(',');
  ablate_cmd->add_option("--episodes", ab.episodes, "training episodes")
      ->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--updates-per-episode", ab.updates_per_episode)
      ->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--eval-episodes", ab.eval_episodes)
      ->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--demos", ab.demos, "corpus holding the largest count")
      ->required()
      ->envname("TISSUE_RETRACT_DEMOS");
  ablate_cmd->add_option("--out-dir", ab.out_dir)
      ->envname("TISSUE_RETRACT_RUN_DIR");

  ReplayOptions rp;
  CLI::App* replay_cmd =
      app.add_subcommand("replay", "dump a trace or corpus step by step");
  replay_cmd->add_option("trace", rp.trace, "JSON-lines trace")->required();
  replay_cmd->add_option("--strain-threshold", rp.strain_threshold);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return GenDemos(gen, out);
    if (*train_cmd) return TrainCommand(train, out);
    if (*eval_cmd) return EvalCommand(ev, out);
    if (*ablate_cmd) return AblateCommand(ab, out);
    if (*replay_cmd) return ReplayCommand(rp, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tissue_retract::cli
