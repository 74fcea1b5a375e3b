#include "gossip/strategies.hpp"

#include <algorithm>

namespace gossip {

std::string_view to_string(GossipRule r) {
  switch (r) {
    case GossipRule::Truthful: return "truthful";
    case GossipRule::Inverted: return "inverted";
    case GossipRule::Silent: return "silent";
  }
  return "silent";
}

GossipRule parse_gossip_rule(std::string_view s) {
  if (s == "truthful") return GossipRule::Truthful;
  if (s == "inverted" || s == "liar") return GossipRule::Inverted;
  if (s == "silent") return GossipRule::Silent;
  throw Error(ErrorCode::InvalidArgument, "unknown gossip rule '" + std::string(s) + "'");
}

std::string_view to_string(GrimScope s) {
  return s == GrimScope::Global ? "global" : "per_target";
}

GrimScope parse_grim_scope(std::string_view s) {
  if (s == "per_target") return GrimScope::PerTarget;
  if (s == "global") return GrimScope::Global;
  throw Error(ErrorCode::InvalidArgument, "unknown grim scope '" + std::string(s) + "'");
}

AbstractProfile abstract_profile_by_name(std::string_view name) {
  AbstractProfile p;
  p.label = std::string(name);
  if (name == "grim") return p;
  if (name == "grim_global") {
    p.scope = GrimScope::Global;
    return p;
  }
  if (name == "grim_liar") {
    p.gossip = GossipRule::Inverted;
    return p;
  }
  if (name == "grim_silent") {
    p.gossip = GossipRule::Silent;
    return p;
  }
  if (name == "all_defect") {
    p.vs_clean = p.vs_flagged = p.own_when_flagged = Action::Defect;
    return p;
  }
  if (name == "all_cooperate") {
    p.vs_clean = p.vs_flagged = p.own_when_flagged = Action::Cooperate;
    return p;
  }
  if (name == "image_scorer") {
    throw Error(ErrorCode::Unabstractable,
                "image_scorer decisions depend on signed counts, not on a clean/flagged state");
  }
  throw Error(ErrorCode::InvalidArgument, "unknown profile '" + std::string(name) + "'");
}

std::optional<GossipReply> AgentPolicy::self_report(const Observation&, Action,
                                                    const GossipProtocol&) {
  return std::nullopt;
}

std::string AgentPolicy::reflect(const Observation&) { return {}; }

Action cooperative_reading(Role role, const Decision& d, std::optional<double> invested) {
  if (const auto* a = std::get_if<Action>(&d)) return *a;
  if (const auto* q = std::get_if<Quality>(&d)) {
    return *q == Quality::High ? Action::Cooperate : Action::Defect;
  }
  if (const auto* p = std::get_if<Purchase>(&d)) {
    return *p == Purchase::Customized ? Action::Cooperate : Action::Defect;
  }
  const double amount = std::get<Amount>(d).value;
  if (role == Role::Responder) {
    return amount >= invested.value_or(0.0) ? Action::Cooperate : Action::Defect;
  }
  return amount > 0.0 ? Action::Cooperate : Action::Defect;
}

namespace {

std::optional<double> invested_in_round(const Observation& obs, int round, AgentIndex investor) {
  for (const auto& pa : obs.public_actions) {
    if (pa.round == round && pa.actor == investor && pa.role == Role::Investor) {
      return std::get<Amount>(pa.decision).value;
    }
  }
  return std::nullopt;
}

bool public_defection(const Observation& obs, const PublicAction& pa) {
  std::optional<double> invested;
  if (pa.role == Role::Responder) invested = invested_in_round(obs, pa.round, pa.partner);
  return cooperative_reading(pa.role, pa.decision, invested) == Action::Defect;
}

}  // namespace

bool is_flagged(const Observation& obs, AgentIndex subject, GrimScope scope) {
  const bool global = scope == GrimScope::Global;
  switch (obs.mode) {
    case MonitoringMode::Private:
      return false;
    case MonitoringMode::PerfectPublic:
      return std::any_of(obs.public_actions.begin(), obs.public_actions.end(),
                         [&](const PublicAction& pa) {
                           return (global || pa.actor == subject) && public_defection(obs, pa);
                         });
    case MonitoringMode::GossipPublic:
      if (!global) return derive_reputation(obs.messages, subject).ever_reported_defect;
      return std::any_of(obs.messages.begin(), obs.messages.end(), [&](const GossipMessage& m) {
        return derive_reputation(std::span<const GossipMessage>(&m, 1), m.subject)
            .ever_reported_defect;
      });
  }
  return false;
}

int visible_image(const Observation& obs, AgentIndex subject) {
  if (obs.mode == MonitoringMode::GossipPublic) {
    return derive_reputation(obs.messages, subject).image();
  }
  int image = 0;
  for (const auto& pa : obs.public_actions) {
    if (pa.actor != subject) continue;
    image += public_defection(obs, pa) ? -1 : 1;
  }
  return image;
}

Decision role_decision(const Observation& obs, Action intent) {
  const bool coop = intent == Action::Cooperate;
  switch (obs.role) {
    case Role::Donor:
    case Role::Player:
      return intent;
    case Role::Seller:
      return coop ? Quality::High : Quality::Low;
    case Role::Buyer:
      return coop ? Purchase::Customized : Purchase::None;
    case Role::Investor:
      return Amount{coop ? std::max(obs.own_resources, 0.0) : 0.0};
    case Role::Responder:
      return Amount{coop ? obs.received_transfer.value_or(0.0) / 2.0 : 0.0};
    case Role::Recipient:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "a recipient has no move to make");
}

std::optional<Payload> scripted_report(GossipRule rule, const GossipProtocol& protocol,
                                       const Observation& obs, const GossipContext& ctx) {
  if (rule == GossipRule::Silent || !protocol.enabled()) return std::nullopt;
  Action claim = ctx.reading;
  if (rule == GossipRule::Inverted) {
    claim = claim == Action::Cooperate ? Action::Defect : Action::Cooperate;
  }
  if (protocol.uses_bits()) return BinaryPayload{claim == Action::Cooperate ? 1 : 0};

  const std::string subject = obs.name_of(ctx.subject);
  const std::string witness = obs.name_of(obs.self);
  const std::string round = std::to_string(obs.round);
  TonedPayload toned;
  toned.claimed = claim;
  if (claim == Action::Cooperate) {
    toned.tone = Tone::Praising;
    toned.text = subject + " cooperated with " + witness + " in round " + round + ".";
  } else {
    toned.tone = Tone::Criticism;
    toned.text = subject + " defected against " + witness + " in round " + round + ".";
  }
  return toned;
}

namespace {

class ScriptedPolicy : public AgentPolicy {
 public:
  ScriptedPolicy(std::string id, GossipRule rule) : id_(std::move(id)), rule_(rule) {}

  std::string_view id() const override { return id_; }

  std::optional<GossipReply> gossip(const Observation& obs, const GossipContext& ctx) override {
    if (ctx.protocol == nullptr) return std::nullopt;
    auto payload = scripted_report(rule_, *ctx.protocol, obs, ctx);
    if (!payload) return std::nullopt;
    return GossipReply{std::move(*payload), {}};
  }

  std::optional<GossipReply> self_report(const Observation& obs, Action own,
                                         const GossipProtocol& protocol) override {
    if (rule_ == GossipRule::Silent || !protocol.allows_self_report()) return std::nullopt;
    Action claim = own;
    if (rule_ == GossipRule::Inverted) {
      claim = own == Action::Cooperate ? Action::Defect : Action::Cooperate;
    }
    SelfReportPayload report{claim, obs.name_of(obs.self) +
                                        (claim == Action::Cooperate ? " cooperated" : " defected") +
                                        " in round " + std::to_string(obs.round) + "."};
    return GossipReply{std::move(report), {}};
  }

 protected:
  GossipRule rule() const noexcept { return rule_; }

 private:
  std::string id_;
  GossipRule rule_;
};

class Unconditional final : public ScriptedPolicy {
 public:
  Unconditional(std::string id, Action intent, GossipRule rule)
      : ScriptedPolicy(std::move(id), rule), intent_(intent) {}

  ActReply act(const Observation& obs) override { return {role_decision(obs, intent_), {}}; }

  std::optional<AbstractProfile> abstract_profile() const override {
    AbstractProfile p;
    p.label = std::string(id());
    p.vs_clean = p.vs_flagged = p.own_when_flagged = intent_;
    p.gossip = rule();
    return p;
  }

 private:
  Action intent_;
};

class GrimTrigger final : public ScriptedPolicy {
 public:
  GrimTrigger(std::string id, GrimScope scope, GossipRule rule)
      : ScriptedPolicy(std::move(id), rule), scope_(scope) {}

  ActReply act(const Observation& obs) override {
    if (obs.role == Role::Seller) return {role_decision(obs, Action::Cooperate), {}};
    // Once flagged itself the agent expects nothing back and stops paying.
    const bool self_flagged = obs.role != Role::Buyer && is_flagged(obs, obs.self, scope_);
    const bool partner_flagged = obs.partner && is_flagged(obs, *obs.partner, scope_);
    const Action intent = (self_flagged || partner_flagged) ? Action::Defect : Action::Cooperate;
    return {role_decision(obs, intent), {}};
  }

  std::optional<AbstractProfile> abstract_profile() const override {
    AbstractProfile p;
    p.label = std::string(id());
    p.gossip = rule();
    p.scope = scope_;
    return p;
  }

 private:
  GrimScope scope_;
};

class ImageScorer final : public ScriptedPolicy {
 public:
  ImageScorer(int k, GossipRule rule) : ScriptedPolicy("image_scorer", rule), k_(k) {}

  ActReply act(const Observation& obs) override {
    const int image = obs.partner ? visible_image(obs, *obs.partner) : 0;
    return {role_decision(obs, image >= k_ ? Action::Cooperate : Action::Defect), {}};
  }

 private:
  int k_;
};

class FractionInvestor final : public ScriptedPolicy {
 public:
  FractionInvestor(double alpha, GossipRule rule)
      : ScriptedPolicy("investor_fraction", rule), alpha_(alpha) {}

  ActReply act(const Observation& obs) override {
    if (obs.role != Role::Investor) {
      throw Error(ErrorCode::InvalidArgument, "investor_fraction only plays the investor role");
    }
    return {Amount{alpha_ * std::max(obs.own_resources, 0.0)}, {}};
  }

 private:
  double alpha_;
};

class FractionResponder final : public ScriptedPolicy {
 public:
  FractionResponder(double beta, GossipRule rule)
      : ScriptedPolicy("responder_fraction", rule), beta_(beta) {}

  ActReply act(const Observation& obs) override {
    if (obs.role != Role::Responder) {
      throw Error(ErrorCode::InvalidArgument, "responder_fraction only plays the responder role");
    }
    return {Amount{beta_ * obs.received_transfer.value_or(0.0)}, {}};
  }

 private:
  double beta_;
};

class FixedSeller final : public ScriptedPolicy {
 public:
  FixedSeller(Quality q, GossipRule rule) : ScriptedPolicy("seller_fixed", rule), q_(q) {}

  ActReply act(const Observation& obs) override {
    if (obs.role != Role::Seller) {
      throw Error(ErrorCode::InvalidArgument, "seller_fixed only plays the seller role");
    }
    return {q_, {}};
  }

 private:
  Quality q_;
};

void check_fraction(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

std::unique_ptr<AgentPolicy> always_cooperate(GossipRule rule) {
  return std::make_unique<Unconditional>("always_cooperate", Action::Cooperate, rule);
}

std::unique_ptr<AgentPolicy> always_defect(GossipRule rule) {
  return std::make_unique<Unconditional>("always_defect", Action::Defect, rule);
}

std::unique_ptr<AgentPolicy> always_defect_silent() {
  return std::make_unique<Unconditional>("always_defect_silent", Action::Defect,
                                         GossipRule::Silent);
}

std::unique_ptr<AgentPolicy> grim_trigger_public(GrimScope scope, GossipRule rule) {
  return std::make_unique<GrimTrigger>("grim_trigger_public", scope, rule);
}

std::unique_ptr<AgentPolicy> liar_reporter(GrimScope scope) {
  return std::make_unique<GrimTrigger>("liar_reporter", scope, GossipRule::Inverted);
}

std::unique_ptr<AgentPolicy> image_scorer(int threshold, GossipRule rule) {
  return std::make_unique<ImageScorer>(threshold, rule);
}

std::unique_ptr<AgentPolicy> fraction_investor(double alpha, GossipRule rule) {
  check_fraction(alpha, "alpha");
  return std::make_unique<FractionInvestor>(alpha, rule);
}

std::unique_ptr<AgentPolicy> fraction_responder(double beta, GossipRule rule) {
  check_fraction(beta, "beta");
  return std::make_unique<FractionResponder>(beta, rule);
}

std::unique_ptr<AgentPolicy> fixed_seller(Quality q, GossipRule rule) {
  return std::make_unique<FixedSeller>(q, rule);
}

std::unique_ptr<AgentPolicy> grim_buyer(GrimScope scope, GossipRule rule) {
  return std::make_unique<GrimTrigger>("grim_buyer", scope, rule);
}

}  // namespace gossip
