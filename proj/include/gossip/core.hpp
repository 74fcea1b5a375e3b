#pragma once

// Domain types shared by every module: actions, tones, gossip messages, the
// public pool, per-agent memory, interaction records and discounted returns.

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gossip/errors.hpp"

namespace gossip {

using AgentIndex = std::size_t;

enum class Action { Cooperate, Defect };

// Declaration order is the valence order: Praising > Neutral > the three negatives.
enum class Tone { Praising, Neutral, Mocking, Complaint, Criticism };
inline constexpr std::array<Tone, 5> kAllTones = {Tone::Praising, Tone::Neutral, Tone::Mocking,
                                                  Tone::Complaint, Tone::Criticism};

enum class HorizonType { Finite, InfiniteTruncated };
enum class MonitoringMode { Private, PerfectPublic, GossipPublic };
enum class DiscountIndexing { Participation, Global };

enum class Quality { High, Low };
enum class Purchase { Customized, Standardized, None };

enum class Role { Donor, Recipient, Player, Investor, Responder, Seller, Buyer };

struct Amount {
  double value = 0.0;
  friend bool operator==(const Amount&, const Amount&) = default;
};

/// One participant's move: binary action, continuous amount, or a market choice.
using Decision = std::variant<Action, Amount, Quality, Purchase>;

std::string_view to_string(Action a);
std::string_view to_string(Tone t);
std::string_view to_string(HorizonType h);
std::string_view to_string(MonitoringMode m);
std::string_view to_string(Quality q);
std::string_view to_string(Purchase p);
std::string_view to_string(Role r);
std::string decision_to_string(const Decision& d);

// Parsers accept the lowercase names produced by to_string; they throw
// InvalidArgument (or InvalidTone for tones) on anything else.
Action parse_action(std::string_view s);
Tone parse_tone(std::string_view s);
HorizonType parse_horizon(std::string_view s);
MonitoringMode parse_monitoring(std::string_view s);
Quality parse_quality(std::string_view s);
Purchase parse_purchase(std::string_view s);
Role parse_role(std::string_view s);

/// The tuple of a repeated donation game (also reused by the other matrix game).
struct GameParams {
  int n_agents = 2;
  HorizonType horizon_type = HorizonType::InfiniteTruncated;
  int horizon_length = 1;
  double discount = 0.99;
  double endowment = 0.0;
  double cost = 1.0;
  double benefit = 5.0;

  /// Throws InvalidArgument unless b > c > 0, 0 < gamma <= 1, T >= 1, n >= 2, e >= 0.
  void validate() const;
};

struct TonedPayload {
  Tone tone = Tone::Neutral;
  std::string text;
  // Explicit action claim, when the author states one. Otherwise a claim is
  // read off the tone sign (see channel.hpp).
  std::optional<Action> claimed;
};

struct BinaryPayload {
  int bit = 0;
};

struct SelfReportPayload {
  Action claimed = Action::Cooperate;
  std::string text;
};

using Payload = std::variant<TonedPayload, BinaryPayload, SelfReportPayload>;

struct GossipMessage {
  int round = 1;
  AgentIndex witness = 0;
  AgentIndex subject = 0;
  Payload payload;
  // Engine-side ground truth; stripped before a message reaches any agent.
  std::optional<Action> ground_truth;
  std::optional<bool> truthful_hint;
};

/// Append-only, ordered by (round, publication index).
class PublicPool {
 public:
  /// Throws RoundRegression if msg.round is below the last published round.
  void append(GossipMessage msg);

  const std::vector<GossipMessage>& messages() const noexcept { return messages_; }
  std::size_t size() const noexcept { return messages_.size(); }
  bool empty() const noexcept { return messages_.empty(); }
  int last_round() const noexcept { return messages_.empty() ? 0 : messages_.back().round; }

 private:
  std::vector<GossipMessage> messages_;
};

struct MemoryEntry {
  int round = 0;
  std::string observation;
  std::string own_action;
  std::string message;
  double reward = 0.0;
  std::string reflection;
};

class AgentMemory {
 public:
  AgentMemory() = default;
  explicit AgentMemory(AgentIndex owner) : owner_(owner) {}

  void append(MemoryEntry entry);

  AgentIndex owner() const noexcept { return owner_; }
  const std::vector<MemoryEntry>& entries() const noexcept { return entries_; }

 private:
  AgentIndex owner_ = 0;
  std::vector<MemoryEntry> entries_;
};

struct Participant {
  AgentIndex agent = 0;
  Role role = Role::Player;
  std::optional<Decision> decision;  // empty for a passive recipient
  double reward = 0.0;
  double resources_before = 0.0;
  double resources_after = 0.0;
};

struct InteractionRecord {
  int round = 0;
  std::array<Participant, 2> participants;
};

struct RoundReward {
  int round = 0;
  double reward = 0.0;
};

/// Sum_k gamma^(k-1) r_k over the agent's k-th participation.
double discounted_return(std::span<const double> rewards, double gamma);
/// Sum gamma^(t-1) r_t using global round indices t.
double discounted_return(std::span<const RoundReward> rewards, double gamma);

struct PublicAction {
  int round = 0;
  AgentIndex actor = 0;
  AgentIndex partner = 0;
  Role role = Role::Player;
  Decision decision;
};

/// Everything the engine holds that observations are assembled from.
struct EnvState {
  int round = 0;
  std::vector<double> resources;
  std::vector<AgentMemory> memories;
  std::vector<InteractionRecord> history;
};

/// What one agent sees when asked to act or gossip.
struct Observation {
  int round = 0;
  MonitoringMode mode = MonitoringMode::GossipPublic;
  AgentIndex self = 0;
  double own_resources = 0.0;
  std::vector<MemoryEntry> memory;
  std::vector<GossipMessage> messages;      // GossipPublic only; hints stripped
  std::vector<PublicAction> public_actions;  // PerfectPublic only

  // Filled in by the round loop for the current interaction.
  Role role = Role::Player;
  std::optional<AgentIndex> partner;
  std::optional<double> partner_resources;
  std::optional<double> received_investment;  // responder: I chosen this round
  std::optional<double> received_transfer;    // responder: m * I
  std::shared_ptr<const std::vector<std::string>> names;

  std::string name_of(AgentIndex i) const;
};

Observation visible_observation(AgentIndex agent, const EnvState& env, const PublicPool& pool,
                                MonitoringMode mode);

}  // namespace gossip
