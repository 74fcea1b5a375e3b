#pragma once

// Experiment orchestration: run configuration, the per-seed round loop, the
// JSONL event log and replay.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip/channel.hpp"
#include "gossip/core.hpp"
#include "gossip/environments.hpp"
#include "gossip/llm_adapter.hpp"
#include "gossip/metrics.hpp"
#include "gossip/scheduler.hpp"
#include "gossip/strategies.hpp"

namespace gossip {

inline constexpr int kEventSchemaVersion = 1;

struct AgentSpec {
  std::string name;
  std::string policy;
  nlohmann::json params = nlohmann::json::object();
  std::optional<Role> role;  // fixed role (market, or investment with fixed sides)
};

struct PromptFlags {
  bool equilibrium_knowledge = false;
  bool reflection = false;
  bool self_report = false;
};

struct RunConfig {
  std::string experiment = "experiment";
  GameKind game = GameKind::Donation;

  // Environment parameters. Only the ones of `game` are read.
  double cost = 1.0;
  double benefit = 5.0;
  double endowment = 0.0;
  double multiplier = 3.0;
  MarketParams market;

  HorizonType horizon_type = HorizonType::InfiniteTruncated;
  int horizon_length = 36;
  double discount = 0.99;
  DiscountIndexing indexing = DiscountIndexing::Participation;
  MonitoringMode monitoring = MonitoringMode::GossipPublic;
  GossipProtocol protocol;
  bool graded_valence = false;
  std::optional<ScheduleMode> schedule;  // default depends on the game

  std::vector<AgentSpec> agents;  // expanded: one entry per agent
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  PromptFlags prompt_flags;
  EndpointConfig endpoint;
  std::filesystem::path prompts_dir;  // empty: the built-in location

  ScheduleMode schedule_mode() const;
  bool uses_llm() const;
  double endowment_for_game() const;
};

/// Parses the canonical JSON form. Unknown keys anywhere are Config errors.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& file);
/// Snapshot with every default resolved; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& cfg);

/// Cross-field checks (roster vs game, protocol vs monitoring, flags).
/// Throws Config or InvalidArgument.
void validate(const RunConfig& cfg);

/// Default agent names, cycled with a numeric suffix past the list.
std::string default_agent_name(std::size_t index);

/// The pairing schedule of one seed. Errors from the scheduler propagate.
Schedule build_schedule(const RunConfig& cfg, std::uint64_t seed);

/// Builds a policy from a roster entry. `llm` agents need `llm_factory`.
using LlmFactory = std::function<std::unique_ptr<AgentPolicy>(const AgentSpec&)>;
std::unique_ptr<AgentPolicy> make_policy(const AgentSpec& spec, const LlmFactory& llm_factory = {});

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<InteractionRecord> records;
  std::vector<GossipMessage> messages;
  std::vector<double> final_resources;
  MetricsSummary summary;
  std::vector<nlohmann::json> transcripts;  // llm agents only
};

struct RunArtifacts {
  std::filesystem::path event_log;
  std::filesystem::path summary_csv;
  std::filesystem::path agents_csv;
  std::filesystem::path config_snapshot;
  std::optional<std::filesystem::path> transcripts;
  std::vector<SeedResult> seeds;
};

struct RunOptions {
  /// Replaces the chat endpoint of every llm agent (tests, offline runs).
  std::shared_ptr<ChatEndpoint> endpoint_override;
  bool write_files = true;
};

/// Runs every seed and writes the artifacts. On a failure mid-run the partial
/// log is closed with a run_aborted event and the error is rethrown.
RunArtifacts run_experiment(const RunConfig& cfg, const RunOptions& options = {});

/// Runs one seed without touching the filesystem. Events go to `emit` if set.
SeedResult run_seed(const RunConfig& cfg, std::uint64_t seed, const RunOptions& options = {},
                    const std::function<void(const nlohmann::json&)>& emit = {});

struct ReplayResult {
  nlohmann::json config;
  std::vector<SeedResult> seeds;
  std::string summary_csv;
  std::string agents_csv;
};

/// Rebuilds records and messages from an event log, re-derives every reward
/// from the logged decisions and recomputes the metrics. Errors: ReplayIncomplete
/// (no run_end), ReplayMismatch (a logged reward or summary disagrees),
/// SchemaViolation (unknown schema version).
ReplayResult replay(const std::filesystem::path& event_log);
ReplayResult replay_lines(const std::vector<std::string>& lines);

/// JSON forms used in the log.
nlohmann::json decision_to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);
nlohmann::json message_to_json(const GossipMessage& m);
GossipMessage message_from_json(const nlohmann::json& j);

}  // namespace gossip
