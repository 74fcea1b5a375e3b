#include "gossip/channel.hpp"

#include <cctype>

namespace gossip {

std::string_view to_string(ProtocolVariant v) {
  switch (v) {
    case ProtocolVariant::HierarchicalTones: return "tones";
    case ProtocolVariant::BinaryWithConvention: return "binary_convention";
    case ProtocolVariant::BinaryNoConvention: return "binary_no_convention";
    case ProtocolVariant::TonesPlusSelfReport: return "tones_self_report";
    case ProtocolVariant::Disabled: return "disabled";
  }
  return "disabled";
}

ProtocolVariant parse_protocol(std::string_view s) {
  for (auto v : {ProtocolVariant::HierarchicalTones, ProtocolVariant::BinaryWithConvention,
                 ProtocolVariant::BinaryNoConvention, ProtocolVariant::TonesPlusSelfReport,
                 ProtocolVariant::Disabled}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown gossip protocol '" + std::string(s) + "'");
}

std::string GossipProtocol::convention() const {
  if (variant != ProtocolVariant::BinaryWithConvention) return {};
  return convention_text ? *convention_text : std::string(kDefaultConvention);
}

std::string truncate_words(std::string_view text, std::size_t max_words, bool& truncated) {
  truncated = false;
  std::size_t words = 0;
  std::size_t i = 0;
  const auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    if (i == text.size()) break;
    if (words == max_words) {
      truncated = true;
      std::size_t end = i;
      while (end > 0 && space(text[end - 1])) --end;
      return std::string(text.substr(0, end));
    }
    ++words;
    while (i < text.size() && !space(text[i])) ++i;
  }
  return std::string(text);
}

PublishOutcome validate_and_publish(PublicPool& pool, GossipMessage msg,
                                    const GossipProtocol& protocol) {
  PublishOutcome outcome;
  if (!protocol.enabled()) {
    throw Error(ErrorCode::ProtocolMismatch, "gossip is disabled for this run");
  }

  if (auto* toned = std::get_if<TonedPayload>(&msg.payload)) {
    if (!protocol.uses_tones()) {
      throw Error(ErrorCode::ProtocolMismatch, "toned message under a binary protocol");
    }
    toned->text = truncate_words(toned->text, kMaxGossipWords, outcome.truncated);
  } else if (const auto* bin = std::get_if<BinaryPayload>(&msg.payload)) {
    if (!protocol.uses_bits()) {
      throw Error(ErrorCode::ProtocolMismatch, "binary signal under a toned protocol");
    }
    if (bin->bit != 0 && bin->bit != 1) {
      throw Error(ErrorCode::InvalidArgument, "binary signal must be 0 or 1");
    }
  } else if (auto* report = std::get_if<SelfReportPayload>(&msg.payload)) {
    if (!protocol.allows_self_report()) {
      throw Error(ErrorCode::ProtocolMismatch, "self-reports are not part of this protocol");
    }
    report->text = truncate_words(report->text, kMaxGossipWords, outcome.truncated);
  }

  const bool self_report = std::holds_alternative<SelfReportPayload>(msg.payload);
  if (self_report && msg.witness != msg.subject) {
    throw Error(ErrorCode::InvalidArgument, "a self-report must be about its author");
  }
  if (!self_report && msg.witness == msg.subject) {
    throw Error(ErrorCode::InvalidArgument, "a witness cannot gossip about itself");
  }
  pool.append(std::move(msg));
  return outcome;
}

int tone_valence(Tone t, ValenceScale scale) {
  switch (t) {
    case Tone::Praising: return 1;
    case Tone::Neutral: return 0;
    case Tone::Mocking: return -1;
    case Tone::Complaint: return scale == ValenceScale::Graded ? -2 : -1;
    case Tone::Criticism: return scale == ValenceScale::Graded ? -3 : -1;
  }
  return 0;
}

std::optional<Action> claimed_action(const GossipMessage& msg) {
  if (const auto* toned = std::get_if<TonedPayload>(&msg.payload)) {
    if (toned->claimed) return toned->claimed;
    const int v = tone_valence(toned->tone);
    if (v > 0) return Action::Cooperate;
    if (v < 0) return Action::Defect;
    return std::nullopt;
  }
  if (const auto* bin = std::get_if<BinaryPayload>(&msg.payload)) {
    return bin->bit == 1 ? Action::Cooperate : Action::Defect;
  }
  return std::get<SelfReportPayload>(msg.payload).claimed;
}

ReputationView derive_reputation(std::span<const GossipMessage> messages, AgentIndex subject,
                                 ValenceScale scale) {
  ReputationView view;
  view.subject = subject;
  for (const auto& m : messages) {
    if (m.subject != subject) continue;
    int valence = 0;
    if (const auto* toned = std::get_if<TonedPayload>(&m.payload)) {
      valence = tone_valence(toned->tone, scale);
      view.valence_sum += valence;
    }
    const auto claim = claimed_action(m);
    if (claim == Action::Cooperate) ++view.claimed_cooperations;
    if (claim == Action::Defect) ++view.claimed_defections;
    if (valence < 0 || claim == Action::Defect) view.ever_reported_defect = true;
  }
  return view;
}

bool honesty_label(const GossipMessage& msg, Action ground_truth) {
  const auto claim = claimed_action(msg);
  if (!claim) throw Error(ErrorCode::NoClaim, "message carries no action claim");
  return *claim == ground_truth;
}

}  // namespace gossip
