#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gossip/core.hpp"

using namespace gossip;

namespace {

// Oracle: Horner-free direct power sum.
double naive_return(const std::vector<double>& r, double gamma) {
  double g = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) g += std::pow(gamma, static_cast<double>(k)) * r[k];
  return g;
}

}  // namespace

TEST(DiscountedReturn, FullCooperationIrStream) {
  const std::vector<double> r{4, 4, 4, 4};
  EXPECT_NEAR(discounted_return(r, 0.99), 15.761596, 1e-12);
  EXPECT_NEAR(discounted_return(r, 0.99), naive_return(r, 0.99), 1e-12);
}

TEST(DiscountedReturn, AlternatingDonationStreams) {
  const std::vector<double> donor_first{-1, 5, -1, 5, -1, 5, -1, 5};
  const std::vector<double> recipient_first{5, -1, 5, -1, 5, -1, 5, -1};
  EXPECT_NEAR(discounted_return(donor_first, 0.99), naive_return(donor_first, 0.99), 1e-12);
  EXPECT_NEAR(discounted_return(recipient_first, 0.99), naive_return(recipient_first, 0.99), 1e-12);
  EXPECT_NEAR(discounted_return(donor_first, 0.99), 15.334595829633948, 1e-12);
  EXPECT_NEAR(discounted_return(recipient_first, 0.99), 15.56752639919801, 1e-12);
}

TEST(DiscountedReturn, GlobalIndexingUsesRoundNumbers) {
  const std::vector<RoundReward> r{{1, 4}, {3, 4}};
  EXPECT_NEAR(discounted_return(r, 0.5), 4 + 0.25 * 4, 1e-15);
}

TEST(DiscountedReturn, EmptyIsZero) {
  EXPECT_EQ(discounted_return(std::vector<double>{}, 0.9), 0.0);
}

TEST(GameParams, Validation) {
  GameParams p;
  p.n_agents = 9;
  p.horizon_length = 36;
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.benefit = 0.5;
  EXPECT_THROW(bad.validate(), Error);
  bad = p;
  bad.discount = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = p;
  bad.n_agents = 1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(PublicPool, RejectsRoundRegression) {
  PublicPool pool;
  pool.append({3, 0, 1, TonedPayload{}, {}, {}});
  pool.append({3, 1, 0, TonedPayload{}, {}, {}});
  try {
    pool.append({2, 0, 1, TonedPayload{}, {}, {}});
    FAIL() << "expected RoundRegression";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RoundRegression);
  }
  EXPECT_EQ(pool.size(), 2u);
}

TEST(Observation, GossipModeStripsGroundTruth) {
  EnvState env;
  env.round = 2;
  env.resources = {1.0, 2.0};
  env.memories = {AgentMemory(0), AgentMemory(1)};
  PublicPool pool;
  pool.append({1, 1, 0, TonedPayload{Tone::Praising, "ok", Action::Cooperate}, Action::Cooperate, true});
  const auto obs = visible_observation(0, env, pool, MonitoringMode::GossipPublic);
  ASSERT_EQ(obs.messages.size(), 1u);
  EXPECT_FALSE(obs.messages[0].ground_truth.has_value());
  EXPECT_FALSE(obs.messages[0].truthful_hint.has_value());
  EXPECT_TRUE(obs.public_actions.empty());
  EXPECT_EQ(obs.own_resources, 1.0);
}

TEST(Observation, PerfectPublicShowsActionsOnly) {
  EnvState env;
  env.round = 2;
  env.resources = {0.0, 0.0};
  InteractionRecord rec;
  rec.round = 1;
  rec.participants[0] = {0, Role::Donor, Action::Defect, 0, 0, 0};
  rec.participants[1] = {1, Role::Recipient, std::nullopt, 0, 0, 0};
  env.history.push_back(rec);
  PublicPool pool;
  pool.append({1, 1, 0, TonedPayload{}, {}, {}});
  const auto obs = visible_observation(1, env, pool, MonitoringMode::PerfectPublic);
  EXPECT_TRUE(obs.messages.empty());
  ASSERT_EQ(obs.public_actions.size(), 1u);
  EXPECT_EQ(obs.public_actions[0].actor, 0u);
  EXPECT_EQ(std::get<Action>(obs.public_actions[0].decision), Action::Defect);

  const auto priv = visible_observation(1, env, pool, MonitoringMode::Private);
  EXPECT_TRUE(priv.messages.empty());
  EXPECT_TRUE(priv.public_actions.empty());
}

TEST(Parsing, RoundTripsNames) {
  for (Tone t : kAllTones) EXPECT_EQ(parse_tone(to_string(t)), t);
  EXPECT_EQ(parse_action("cooperate"), Action::Cooperate);
  EXPECT_EQ(parse_quality("H"), Quality::High);
  EXPECT_EQ(parse_purchase("none"), Purchase::None);
  try {
    parse_tone("sarcastic");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidTone);
  }
}
