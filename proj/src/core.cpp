#include "gossip/core.hpp"

#include <cmath>

namespace gossip {

std::string_view to_string(Action a) { return a == Action::Cooperate ? "cooperate" : "defect"; }

std::string_view to_string(Tone t) {
  switch (t) {
    case Tone::Praising: return "praising";
    case Tone::Neutral: return "neutral";
    case Tone::Mocking: return "mocking";
    case Tone::Complaint: return "complaint";
    case Tone::Criticism: return "criticism";
  }
  return "neutral";
}

std::string_view to_string(HorizonType h) {
  return h == HorizonType::Finite ? "finite" : "infinite";
}

std::string_view to_string(MonitoringMode m) {
  switch (m) {
    case MonitoringMode::Private: return "private";
    case MonitoringMode::PerfectPublic: return "perfect_public";
    case MonitoringMode::GossipPublic: return "gossip_public";
  }
  return "gossip_public";
}

std::string_view to_string(Quality q) { return q == Quality::High ? "H" : "L"; }

std::string_view to_string(Purchase p) {
  switch (p) {
    case Purchase::Customized: return "c";
    case Purchase::Standardized: return "s";
    case Purchase::None: return "none";
  }
  return "none";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Donor: return "donor";
    case Role::Recipient: return "recipient";
    case Role::Player: return "player";
    case Role::Investor: return "investor";
    case Role::Responder: return "responder";
    case Role::Seller: return "seller";
    case Role::Buyer: return "buyer";
  }
  return "player";
}

std::string decision_to_string(const Decision& d) {
  struct Visitor {
    std::string operator()(Action a) const { return std::string(to_string(a)); }
    std::string operator()(Amount a) const { return std::to_string(a.value); }
    std::string operator()(Quality q) const { return std::string(to_string(q)); }
    std::string operator()(Purchase p) const { return std::string(to_string(p)); }
  };
  return std::visit(Visitor{}, d);
}

namespace {

[[noreturn]] void bad(std::string_view what, std::string_view value) {
  throw Error(ErrorCode::InvalidArgument, std::string(what) + " '" + std::string(value) + "'");
}

}  // namespace

Action parse_action(std::string_view s) {
  if (s == "cooperate") return Action::Cooperate;
  if (s == "defect") return Action::Defect;
  bad("unknown action", s);
}

Tone parse_tone(std::string_view s) {
  for (Tone t : kAllTones) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::InvalidTone, "unknown tone '" + std::string(s) + "'");
}

HorizonType parse_horizon(std::string_view s) {
  if (s == "finite") return HorizonType::Finite;
  if (s == "infinite") return HorizonType::InfiniteTruncated;
  bad("unknown horizon type", s);
}

MonitoringMode parse_monitoring(std::string_view s) {
  if (s == "private") return MonitoringMode::Private;
  if (s == "perfect_public") return MonitoringMode::PerfectPublic;
  if (s == "gossip_public") return MonitoringMode::GossipPublic;
  bad("unknown monitoring mode", s);
}

Quality parse_quality(std::string_view s) {
  if (s == "H") return Quality::High;
  if (s == "L") return Quality::Low;
  bad("unknown quality", s);
}

Purchase parse_purchase(std::string_view s) {
  if (s == "c") return Purchase::Customized;
  if (s == "s") return Purchase::Standardized;
  if (s == "none") return Purchase::None;
  bad("unknown purchase", s);
}

Role parse_role(std::string_view s) {
  for (Role r : {Role::Donor, Role::Recipient, Role::Player, Role::Investor, Role::Responder,
                 Role::Seller, Role::Buyer}) {
    if (to_string(r) == s) return r;
  }
  bad("unknown role", s);
}

void GameParams::validate() const {
  if (n_agents < 2) throw Error(ErrorCode::InvalidArgument, "n_agents must be >= 2");
  if (horizon_length < 1) throw Error(ErrorCode::InvalidArgument, "horizon length must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "discount must lie in (0, 1]");
  }
  if (!(endowment >= 0.0)) throw Error(ErrorCode::InvalidArgument, "endowment must be >= 0");
  if (!(cost > 0.0)) throw Error(ErrorCode::InvalidArgument, "cost must be > 0");
  if (!(benefit > cost)) throw Error(ErrorCode::InvalidArgument, "benefit must exceed cost");
}

void PublicPool::append(GossipMessage msg) {
  if (!messages_.empty() && msg.round < messages_.back().round) {
    throw Error(ErrorCode::RoundRegression,
                "message for round " + std::to_string(msg.round) + " after round " +
                    std::to_string(messages_.back().round));
  }
  messages_.push_back(std::move(msg));
}

void AgentMemory::append(MemoryEntry entry) {
  if (!entries_.empty() && entry.round < entries_.back().round) {
    throw Error(ErrorCode::RoundRegression, "memory entries must be appended in round order");
  }
  entries_.push_back(std::move(entry));
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

double discounted_return(std::span<const RoundReward> rewards, double gamma) {
  double total = 0.0;
  for (const auto& rr : rewards) total += std::pow(gamma, rr.round - 1) * rr.reward;
  return total;
}

std::string Observation::name_of(AgentIndex i) const {
  if (names && i < names->size()) return (*names)[i];
  return "agent" + std::to_string(i);
}

Observation visible_observation(AgentIndex agent, const EnvState& env, const PublicPool& pool,
                                MonitoringMode mode) {
  Observation obs;
  obs.round = env.round;
  obs.mode = mode;
  obs.self = agent;
  if (agent < env.resources.size()) obs.own_resources = env.resources[agent];
  if (agent < env.memories.size()) obs.memory = env.memories[agent].entries();

  if (mode == MonitoringMode::GossipPublic) {
    obs.messages.reserve(pool.size());
    for (const auto& m : pool.messages()) {
      GossipMessage visible = m;
      visible.ground_truth.reset();
      visible.truthful_hint.reset();
      obs.messages.push_back(std::move(visible));
    }
  } else if (mode == MonitoringMode::PerfectPublic) {
    for (const auto& rec : env.history) {
      for (std::size_t k = 0; k < rec.participants.size(); ++k) {
        const auto& p = rec.participants[k];
        if (!p.decision) continue;
        obs.public_actions.push_back(
            {rec.round, p.agent, rec.participants[1 - k].agent, p.role, *p.decision});
      }
    }
  }
  return obs;
}

}  // namespace gossip
