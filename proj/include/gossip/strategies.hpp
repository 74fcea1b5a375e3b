#pragma once

// Agent behaviour contract plus the scripted roster.

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "gossip/channel.hpp"
#include "gossip/core.hpp"

namespace gossip {

enum class GossipRule { Truthful, Inverted, Silent };
enum class GrimScope { PerTarget, Global };

std::string_view to_string(GossipRule r);
GossipRule parse_gossip_rule(std::string_view s);
std::string_view to_string(GrimScope s);
GrimScope parse_grim_scope(std::string_view s);

/// Decision rules of a strategy over the {clean, flagged} abstraction. Used by
/// the equilibrium checker; partners are assumed clean on the equilibrium path.
struct AbstractProfile {
  std::string label;
  Action vs_clean = Action::Cooperate;    // action against an unflagged partner
  Action vs_flagged = Action::Defect;     // action against a flagged partner
  Action own_when_flagged = Action::Defect;  // own play once the agent itself is flagged
  GossipRule gossip = GossipRule::Truthful;
  GrimScope scope = GrimScope::PerTarget;
};

/// Named profiles: grim, grim_global, grim_liar, grim_silent, all_defect,
/// all_cooperate. image_scorer is recognised but throws Unabstractable.
AbstractProfile abstract_profile_by_name(std::string_view name);

struct ActReply {
  Decision decision;
  std::string justification;
};

struct GossipReply {
  Payload payload;
  std::string justification;
};

/// What the witness saw in the interaction it is about to gossip on.
struct GossipContext {
  AgentIndex subject = 0;
  Role subject_role = Role::Player;
  Decision observed;                       // the subject's move
  Action reading = Action::Cooperate;      // cooperative/defective reading of `observed`
  std::optional<Decision> own_decision;    // the witness's move, if it acted
  double own_reward = 0.0;
  double subject_reward = 0.0;
  const GossipProtocol* protocol = nullptr;
};

class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;

  virtual std::string_view id() const = 0;

  virtual ActReply act(const Observation& obs) = 0;

  /// nullopt when the policy stays silent.
  virtual std::optional<GossipReply> gossip(const Observation& obs, const GossipContext& ctx) = 0;

  /// Only called when the protocol carries self-reports.
  virtual std::optional<GossipReply> self_report(const Observation& obs, Action own_action,
                                                 const GossipProtocol& protocol);

  /// Separate reflection hook; the round loop records its output when non-empty.
  virtual std::string reflect(const Observation& obs);

  virtual std::optional<AbstractProfile> abstract_profile() const { return std::nullopt; }
};

// --- helpers shared by scripted policies -------------------------------------

/// True when `subject` counts as flagged from what `obs` makes visible.
/// Global scope: true when anyone at all is flagged.
bool is_flagged(const Observation& obs, AgentIndex subject, GrimScope scope = GrimScope::PerTarget);

/// Claimed cooperations minus claimed defections (gossip) or observed ones
/// (perfect monitoring).
int visible_image(const Observation& obs, AgentIndex subject);

/// Cooperative reading of a move, used for witness reports and ground truth.
/// Responder: returned >= invested. Investor: invested > 0. Seller: H. Buyer: c.
Action cooperative_reading(Role role, const Decision& d, std::optional<double> invested = {});

/// The move a scripted agent makes in `obs.role` when it means to cooperate
/// (or defect). Responders return half the transfer when cooperating.
Decision role_decision(const Observation& obs, Action intent);

/// Scripted witness message per rule; nullopt for Silent.
std::optional<Payload> scripted_report(GossipRule rule, const GossipProtocol& protocol,
                                       const Observation& obs, const GossipContext& ctx);

// --- roster -------------------------------------------------------------------

std::unique_ptr<AgentPolicy> always_cooperate(GossipRule rule = GossipRule::Truthful);
std::unique_ptr<AgentPolicy> always_defect(GossipRule rule = GossipRule::Truthful);
std::unique_ptr<AgentPolicy> always_defect_silent();
std::unique_ptr<AgentPolicy> grim_trigger_public(GrimScope scope = GrimScope::PerTarget,
                                                 GossipRule rule = GossipRule::Truthful);
/// Grim play with inverted reports.
std::unique_ptr<AgentPolicy> liar_reporter(GrimScope scope = GrimScope::PerTarget);
std::unique_ptr<AgentPolicy> image_scorer(int threshold = 0,
                                          GossipRule rule = GossipRule::Truthful);
std::unique_ptr<AgentPolicy> fraction_investor(double alpha,
                                               GossipRule rule = GossipRule::Truthful);
std::unique_ptr<AgentPolicy> fraction_responder(double beta,
                                                GossipRule rule = GossipRule::Truthful);
std::unique_ptr<AgentPolicy> fixed_seller(Quality q, GossipRule rule = GossipRule::Truthful);
/// Buys customized from clean sellers, walks away from flagged ones.
std::unique_ptr<AgentPolicy> grim_buyer(GrimScope scope = GrimScope::PerTarget,
                                        GossipRule rule = GossipRule::Truthful);

}  // namespace gossip
