#pragma once

// Chat-completion backed agents: prompt templates, reply parsing, the HTTP
// client and the AgentPolicy that ties them together.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gossip/channel.hpp"
#include "gossip/environments.hpp"
#include "gossip/strategies.hpp"

namespace gossip {

// --- templates ----------------------------------------------------------------

enum class PromptCategory { Rule, Action, Gossip };

/// Flags read by {{if name}} / {{else}} / {{end}} lines. Unknown names are
/// errors, so a typo in a template cannot silently drop a block.
struct TemplateFlags {
  bool gossip = true;
  bool eq_knowledge = false;
  bool infinite = true;
  bool binary = false;
  bool convention = false;

  bool get(std::string_view name) const;
};

using VarMap = std::map<std::string, std::string, std::less<>>;

class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string body, PromptCategory category);

  static PromptTemplate load(const std::filesystem::path& file, PromptCategory category);

  const std::string& id() const noexcept { return id_; }
  const std::string& body() const noexcept { return body_; }
  PromptCategory category() const noexcept { return category_; }

  /// Every $name in the body, across all conditional branches.
  const std::set<std::string>& required_vars() const noexcept { return required_; }

  /// Selects conditional blocks, fills [HORIZON-TYPE], then substitutes $vars
  /// in one pass. Throws MissingVariable for a placeholder left unbound in the
  /// selected text.
  std::string render(const VarMap& vars, const TemplateFlags& flags) const;

 private:
  std::string id_;
  std::string body_;
  PromptCategory category_;
  std::set<std::string> required_;
};

/// Keeps lines whose enclosing conditions hold; directive lines are dropped.
std::string select_blocks(std::string_view body, const TemplateFlags& flags);

/// Single-pass $name substitution (names match [A-Za-z_][A-Za-z0-9_]*).
/// Substituted values are never rescanned.
std::string substitute(std::string_view text, const VarMap& vars);

/// Loads every *.txt file under `dir`, keyed by stem.
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir);

  const PromptTemplate& get(const std::string& id) const;
  bool contains(const std::string& id) const { return templates_.count(id) != 0; }
  const std::map<std::string, PromptTemplate>& all() const noexcept { return templates_; }

 private:
  std::map<std::string, PromptTemplate> templates_;
};

/// Template ids used by a game: rule first, then role-specific prompts.
std::string rule_template_id(GameKind game);
std::string action_template_id(GameKind game, Role role);
std::string gossip_template_id(GameKind game, Role witness_role);
inline constexpr const char* kSelfReportTemplate = "donation_self_report";

// --- reply parsing --------------------------------------------------------------

enum class Schema {
  DonorAction,
  PlayerAction,
  InvestorAction,
  ResponderAction,
  SellerAction,
  BuyerAction,
  ToneGossip,
  BinaryGossip,
  SelfReport,
};

std::string_view to_string(Schema s);
Schema action_schema(Role role);

struct ParsedDecision {
  std::optional<Decision> decision;  // action schemas
  std::optional<Payload> payload;    // gossip and self-report schemas
  std::string justification;
};

/// Returns the first balanced {...} span that parses as a JSON object, skipping
/// fences and prose. Throws Malformed if there is none.
std::string extract_json_object(std::string_view text);

/// Validates keys and value domains. Enum values compare case-insensitively
/// after trimming; extra keys are ignored. Continuous actions must lie in
/// [0, upper]. Errors: Malformed, SchemaViolation, OutOfRange.
ParsedDecision parse_decision(std::string_view text, Schema schema,
                              std::optional<double> upper = std::nullopt);

/// Canonical reply for a decision; parse_decision(serialize_decision(...)) is
/// the identity on well-formed decisions.
std::string serialize_decision(const ParsedDecision& d, Schema schema);

// --- transport --------------------------------------------------------------------

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int max_retries = 3;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds backoff{250};
  /// Environment variable holding the bearer token; empty disables auth.
  std::string token_env = "OPENAI_API_KEY";
};

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual std::string complete(const std::string& system, const std::string& user) = 0;
};

/// POST {base_url}/chat/completions. max_retries R allows R+1 attempts with
/// exponential backoff on transport failures and 429/5xx replies.
/// Errors: AuthMissing (before any request), Transport, Timeout, Malformed.
class HttpChatEndpoint final : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(EndpointConfig cfg);
  std::string complete(const std::string& system, const std::string& user) override;

  const EndpointConfig& config() const noexcept { return cfg_; }

 private:
  EndpointConfig cfg_;
};

// --- agent --------------------------------------------------------------------------

struct PromptContext {
  GameKind game = GameKind::Donation;
  HorizonType horizon = HorizonType::InfiniteTruncated;
  int horizon_length = 1;
  double discount = 0.99;
  double endowment = 0.0;
  double cost = 1.0;
  double benefit = 5.0;
  double multiplier = 3.0;
  MarketParams market;
  GossipProtocol protocol;
  MonitoringMode monitoring = MonitoringMode::GossipPublic;
  bool eq_knowledge = false;
  std::size_t memory_window = 20;
};

struct TranscriptEntry {
  std::string agent;
  int round = 0;
  std::string kind;  // act | gossip | self_report
  int attempt = 0;
  std::string system;
  std::string user;
  std::string response;
  std::string error;  // empty when the reply was accepted
};

using TranscriptSink = std::function<void(const TranscriptEntry&)>;

inline constexpr int kReplyRetryBudget = 2;

class LlmAgent final : public AgentPolicy {
 public:
  LlmAgent(std::shared_ptr<ChatEndpoint> endpoint, std::shared_ptr<const TemplateSet> templates,
           PromptContext ctx, TranscriptSink sink = {});

  std::string_view id() const override { return "llm"; }
  ActReply act(const Observation& obs) override;
  std::optional<GossipReply> gossip(const Observation& obs, const GossipContext& ctx) override;
  std::optional<GossipReply> self_report(const Observation& obs, Action own_action,
                                         const GossipProtocol& protocol) override;

  /// Variables bound for every prompt of this agent (rule prompt included).
  VarMap common_vars(const Observation& obs) const;
  TemplateFlags flags() const;

 private:
  ParsedDecision ask(const Observation& obs, const std::string& kind,
                     const std::string& template_id, const VarMap& vars, Schema schema,
                     std::optional<double> upper);

  std::shared_ptr<ChatEndpoint> endpoint_;
  std::shared_ptr<const TemplateSet> templates_;
  PromptContext ctx_;
  TranscriptSink sink_;
};

/// $stm: the last `window` memory entries, one compact line each.
std::string render_memory(const std::vector<MemoryEntry>& memory, std::size_t window);
/// $historical_messages: every visible message, oldest first.
std::string render_messages(const Observation& obs);

}  // namespace gossip
