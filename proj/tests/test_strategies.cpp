#include <gtest/gtest.h>

#include "gossip/environments.hpp"
#include "gossip/strategies.hpp"

using namespace gossip;

namespace {

auto kNames = std::make_shared<const std::vector<std::string>>(
    std::vector<std::string>{"John", "Kate", "Max", "Jack"});

Observation obs_for(AgentIndex self, Role role, AgentIndex partner,
                    std::vector<GossipMessage> messages = {}) {
  Observation o;
  o.round = 5;
  o.mode = MonitoringMode::GossipPublic;
  o.self = self;
  o.role = role;
  o.partner = partner;
  o.messages = std::move(messages);
  o.names = kNames;
  return o;
}

GossipMessage criticism(AgentIndex witness, AgentIndex subject) {
  return {2, witness, subject, TonedPayload{Tone::Criticism, "bad", std::nullopt}, {}, {}};
}

const GossipProtocol kTones{ProtocolVariant::HierarchicalTones, {}};
const GossipProtocol kBits{ProtocolVariant::BinaryWithConvention, {}};

}  // namespace

TEST(Grim, CooperatesWithCleanPartner) {
  auto g = grim_trigger_public();
  EXPECT_EQ(std::get<Action>(g->act(obs_for(0, Role::Donor, 1)).decision), Action::Cooperate);
}

TEST(Grim, DefectsAgainstFlaggedPartner) {
  auto g = grim_trigger_public();
  const auto o = obs_for(0, Role::Donor, 1, {criticism(2, 1)});
  EXPECT_EQ(std::get<Action>(g->act(o).decision), Action::Defect);
  // Another agent's flag does not matter to the per-target variant...
  const auto other = obs_for(0, Role::Donor, 3, {criticism(2, 1)});
  EXPECT_EQ(std::get<Action>(g->act(other).decision), Action::Cooperate);
  // ...but does to the global one.
  auto global = grim_trigger_public(GrimScope::Global);
  EXPECT_EQ(std::get<Action>(global->act(other).decision), Action::Defect);
}

TEST(Grim, StopsOnceItselfFlagged) {
  auto g = grim_trigger_public();
  const auto o = obs_for(0, Role::Donor, 1, {criticism(3, 0)});
  EXPECT_EQ(std::get<Action>(g->act(o).decision), Action::Defect);
}

TEST(Grim, PerfectMonitoringReadsActions) {
  auto g = grim_trigger_public();
  auto o = obs_for(0, Role::Player, 1);
  o.mode = MonitoringMode::PerfectPublic;
  o.public_actions.push_back({1, 1, 2, Role::Player, Action::Defect});
  EXPECT_EQ(std::get<Action>(g->act(o).decision), Action::Defect);
  o.mode = MonitoringMode::Private;
  EXPECT_EQ(std::get<Action>(g->act(o).decision), Action::Cooperate);
}

TEST(Reports, TruthfulInvertedSilent) {
  const auto o = obs_for(1, Role::Recipient, 0);
  GossipContext ctx;
  ctx.subject = 0;
  ctx.subject_role = Role::Donor;
  ctx.observed = Action::Defect;
  ctx.reading = Action::Defect;
  ctx.protocol = &kTones;

  auto truthful = grim_trigger_public()->gossip(o, ctx);
  ASSERT_TRUE(truthful);
  const auto& t = std::get<TonedPayload>(truthful->payload);
  EXPECT_EQ(t.tone, Tone::Criticism);
  EXPECT_EQ(t.claimed, Action::Defect);
  EXPECT_EQ(t.text, "John defected against Kate in round 5.");

  auto liar = liar_reporter()->gossip(o, ctx);
  ASSERT_TRUE(liar);
  EXPECT_EQ(std::get<TonedPayload>(liar->payload).tone, Tone::Praising);

  EXPECT_FALSE(always_defect_silent()->gossip(o, ctx).has_value());

  ctx.protocol = &kBits;
  auto bit = grim_trigger_public()->gossip(o, ctx);
  ASSERT_TRUE(bit);
  EXPECT_EQ(std::get<BinaryPayload>(bit->payload).bit, 0);
}

TEST(Reports, SelfReportOnlyWhenAllowed) {
  const auto o = obs_for(0, Role::Donor, 1);
  const GossipProtocol sr{ProtocolVariant::TonesPlusSelfReport, {}};
  auto report = grim_trigger_public()->self_report(o, Action::Cooperate, sr);
  ASSERT_TRUE(report);
  EXPECT_EQ(std::get<SelfReportPayload>(report->payload).claimed, Action::Cooperate);
  auto lie = liar_reporter()->self_report(o, Action::Defect, sr);
  ASSERT_TRUE(lie);
  EXPECT_EQ(std::get<SelfReportPayload>(lie->payload).claimed, Action::Cooperate);
  EXPECT_FALSE(grim_trigger_public()->self_report(o, Action::Cooperate, kTones));
}

TEST(ImageScorer, ThresholdOnVisibleImage) {
  std::vector<GossipMessage> msgs = {criticism(2, 1)};
  auto s = image_scorer(0);
  EXPECT_EQ(std::get<Action>(s->act(obs_for(0, Role::Donor, 1, msgs)).decision), Action::Defect);
  msgs.push_back({3, 3, 1, TonedPayload{Tone::Praising, "", std::nullopt}, {}, {}});
  EXPECT_EQ(std::get<Action>(s->act(obs_for(0, Role::Donor, 1, msgs)).decision), Action::Cooperate);
  EXPECT_THROW(abstract_profile_by_name("image_scorer"), Error);
}

TEST(Fractions, InvestorAndResponder) {
  auto inv = fraction_investor(0.5);
  auto o = obs_for(0, Role::Investor, 1);
  o.own_resources = 20;
  EXPECT_EQ(std::get<Amount>(inv->act(o).decision).value, 10);
  auto resp = fraction_responder(0.5);
  auto r = obs_for(1, Role::Responder, 0);
  r.received_investment = 10;
  r.received_transfer = 30;
  EXPECT_EQ(std::get<Amount>(resp->act(r).decision).value, 15);
  EXPECT_THROW(inv->act(r), Error);
  EXPECT_THROW(fraction_investor(1.5), Error);
  EXPECT_THROW(fraction_responder(-0.1), Error);
}

TEST(Market, GrimBuyerWalksAwayFromFlaggedSeller) {
  auto buyer = grim_buyer();
  const auto clean = obs_for(1, Role::Buyer, 0);
  EXPECT_EQ(std::get<Purchase>(buyer->act(clean).decision), Purchase::Customized);
  const auto flagged = obs_for(1, Role::Buyer, 0, {criticism(2, 0)});
  const Purchase p = std::get<Purchase>(buyer->act(flagged).decision);
  EXPECT_EQ(p, Purchase::None);
  EXPECT_EQ(market_payoff(Quality::Low, p, MarketParams{}), (RewardPair{0, 0}));
  auto seller = fixed_seller(Quality::High);
  EXPECT_EQ(std::get<Quality>(seller->act(obs_for(0, Role::Seller, 1)).decision), Quality::High);
}

TEST(Reading, CooperativeReadings) {
  EXPECT_EQ(cooperative_reading(Role::Responder, Amount{10}, 10.0), Action::Cooperate);
  EXPECT_EQ(cooperative_reading(Role::Responder, Amount{9.99}, 10.0), Action::Defect);
  EXPECT_EQ(cooperative_reading(Role::Investor, Amount{0}), Action::Defect);
  EXPECT_EQ(cooperative_reading(Role::Seller, Quality::Low), Action::Defect);
  EXPECT_EQ(cooperative_reading(Role::Buyer, Purchase::Standardized), Action::Defect);
}

TEST(Profiles, Abstractions) {
  EXPECT_EQ(abstract_profile_by_name("grim").vs_clean, Action::Cooperate);
  EXPECT_EQ(abstract_profile_by_name("all_defect").vs_clean, Action::Defect);
  EXPECT_EQ(abstract_profile_by_name("grim_liar").gossip, GossipRule::Inverted);
  EXPECT_EQ(grim_trigger_public()->abstract_profile()->vs_flagged, Action::Defect);
  EXPECT_FALSE(image_scorer()->abstract_profile().has_value());
}
