#pragma once

// The gossip layer: protocol variants, publication checks, and the structured
// reading of messages that scripted agents and metrics rely on.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gossip/core.hpp"

namespace gossip {

enum class ProtocolVariant {
  HierarchicalTones,
  BinaryWithConvention,
  BinaryNoConvention,
  TonesPlusSelfReport,
  Disabled,
};

std::string_view to_string(ProtocolVariant v);
ProtocolVariant parse_protocol(std::string_view s);

inline constexpr std::string_view kDefaultConvention =
    "All agents share a common convention: \"1\" indicates a positive/approving signal and "
    "\"0\" indicates a negative/warning signal.";

struct GossipProtocol {
  ProtocolVariant variant = ProtocolVariant::HierarchicalTones;
  std::optional<std::string> convention_text;

  bool enabled() const noexcept { return variant != ProtocolVariant::Disabled; }
  bool uses_tones() const noexcept {
    return variant == ProtocolVariant::HierarchicalTones ||
           variant == ProtocolVariant::TonesPlusSelfReport;
  }
  bool uses_bits() const noexcept {
    return variant == ProtocolVariant::BinaryWithConvention ||
           variant == ProtocolVariant::BinaryNoConvention;
  }
  bool allows_self_report() const noexcept {
    return variant == ProtocolVariant::TonesPlusSelfReport;
  }
  /// Convention injected into prompts; empty unless BinaryWithConvention.
  std::string convention() const;
};

inline constexpr std::size_t kMaxGossipWords = 150;

/// Keeps the first `max_words` whitespace-separated words. Sets `truncated` when
/// anything was cut.
std::string truncate_words(std::string_view text, std::size_t max_words, bool& truncated);

struct PublishOutcome {
  bool truncated = false;
};

/// Validates `msg` against the active protocol and appends it. Free text longer
/// than kMaxGossipWords is truncated (reported through the outcome).
/// Errors: ProtocolMismatch, InvalidArgument (bad bit, witness/subject mismatch),
/// RoundRegression.
PublishOutcome validate_and_publish(PublicPool& pool, GossipMessage msg,
                                    const GossipProtocol& protocol);

enum class ValenceScale { Sign, Graded };

/// Sign: Praising +1, Neutral 0, the three negative tones -1.
/// Graded: Mocking -1, Complaint -2, Criticism -3.
int tone_valence(Tone t, ValenceScale scale = ValenceScale::Sign);

/// The action a message asserts about its subject, if any. Toned messages use
/// their explicit claim, else the tone sign (neutral claims nothing).
std::optional<Action> claimed_action(const GossipMessage& msg);

struct ReputationView {
  AgentIndex subject = 0;
  int valence_sum = 0;
  int claimed_cooperations = 0;
  int claimed_defections = 0;
  bool ever_reported_defect = false;

  int image() const noexcept { return claimed_cooperations - claimed_defections; }
};

ReputationView derive_reputation(std::span<const GossipMessage> messages, AgentIndex subject,
                                 ValenceScale scale = ValenceScale::Sign);

inline ReputationView derive_reputation(const PublicPool& pool, AgentIndex subject,
                                        ValenceScale scale = ValenceScale::Sign) {
  return derive_reputation(std::span<const GossipMessage>(pool.messages()), subject, scale);
}

/// True iff the message's claim matches what actually happened. Throws NoClaim
/// when the payload asserts nothing.
bool honesty_label(const GossipMessage& msg, Action ground_truth);

}  // namespace gossip
