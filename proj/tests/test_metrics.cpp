#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "gossip/metrics.hpp"
#include "gossip/rng.hpp"

using namespace gossip;

namespace {

// --- naive oracles ---------------------------------------------------------------

double oracle_gini(const std::vector<double>& g) {
  double sum = 0.0;
  for (double x : g) sum += x;
  if (sum == 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) num += std::fabs(g[i] - g[j]);
  return num / (2.0 * static_cast<double>(g.size()) * sum);
}

struct Fixture {
  std::size_t n = 0;
  std::vector<InteractionRecord> records;
  std::vector<GossipMessage> messages;
};

// Donation-style records: random donor/recipient, random C/D, plus one
// witness message per round with a random tone.
Fixture random_fixture(Rng& rng) {
  Fixture f;
  f.n = 2 + rng.below(8);
  const int T = 1 + static_cast<int>(rng.below(36));
  for (int t = 1; t <= T; ++t) {
    const AgentIndex d = rng.below(f.n);
    AgentIndex r = rng.below(f.n - 1);
    if (r >= d) ++r;
    const Action a = rng.below(2) == 0 ? Action::Cooperate : Action::Defect;
    InteractionRecord rec;
    rec.round = t;
    rec.participants[0] = {d, Role::Donor, a, a == Action::Cooperate ? -1.0 : 0.0, 0, 0};
    rec.participants[1] = {r, Role::Recipient, std::nullopt, a == Action::Cooperate ? 5.0 : 0.0, 0, 0};
    f.records.push_back(rec);
    const Tone tone = kAllTones[rng.below(5)];
    f.messages.push_back({t, r, d, TonedPayload{tone, "", std::nullopt}, a, std::nullopt});
  }
  return f;
}

}  // namespace

TEST(Gini, HandValues) {
  const std::vector<double> one_rich{1, 0, 0};
  EXPECT_EQ(gini(one_rich), 2.0 / 3.0);
  EXPECT_EQ(gini(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(gini(std::vector<double>{3, 3, 3}), 0.0);
  EXPECT_EQ(gini(std::vector<double>{}), 0.0);
}

TEST(Gini, ScaleInvariantForPositiveReturns) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> g(5), scaled(5);
    const double alpha = 0.1 + 10 * rng.uniform();
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = 0.01 + rng.uniform();
      scaled[k] = alpha * g[k];
    }
    EXPECT_NEAR(gini(g), gini(scaled), 1e-12);
  }
}

TEST(Gini, MixedSignsReportedRaw) {
  const std::vector<double> g{-3, 1, 1};
  EXPECT_NEAR(gini(g), oracle_gini(g), 1e-15);
  EXPECT_LT(gini(g), 0.0);
}

TEST(MetricOracles, TwoHundredRandomFixtures) {
  Rng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    const Fixture f = random_fixture(rng);
    const double gamma = 0.5 + 0.49 * rng.uniform();

    // cooperation ratio and image scores by recount
    int coop = 0, total = 0;
    std::map<AgentIndex, int> image, turns;
    std::map<AgentIndex, std::vector<double>> stream;
    std::map<AgentIndex, std::vector<std::pair<int, double>>> timed;
    for (const auto& rec : f.records) {
      const auto& d = rec.participants[0];
      const bool c = std::get<Action>(*d.decision) == Action::Cooperate;
      ++total;
      coop += c;
      image[d.agent] += c ? 1 : -1;
      ++turns[d.agent];
      for (const auto& p : rec.participants) {
        stream[p.agent].push_back(p.reward);
        timed[p.agent].push_back({rec.round, p.reward});
      }
    }
    EXPECT_EQ(cooperation_ratio(f.records), static_cast<double>(coop) / total);

    std::vector<double> returns;
    for (AgentIndex i = 0; i < f.n; ++i) {
      EXPECT_EQ(image_score(f.records, i), image[i]);
      EXPECT_EQ(acting_turns(f.records, i), turns[i]);
      EXPECT_LE(std::abs(image_score(f.records, i)), acting_turns(f.records, i));

      double g = 0.0, gg = 0.0;
      for (std::size_t k = 0; k < stream[i].size(); ++k) {
        g += std::pow(gamma, static_cast<double>(k)) * stream[i][k];
      }
      for (auto [round, r] : timed[i]) gg += std::pow(gamma, round - 1) * r;
      EXPECT_NEAR(agent_discounted_return(f.records, i, gamma, DiscountIndexing::Participation), g, 1e-9);
      EXPECT_NEAR(agent_discounted_return(f.records, i, gamma, DiscountIndexing::Global), gg, 1e-9);
      returns.push_back(g);
    }
    EXPECT_NEAR(gini(returns), oracle_gini(returns), 1e-9);

    // tone proportions
    std::array<std::array<int, 5>, 2> counts{};
    for (const auto& m : f.messages) {
      const auto& t = std::get<TonedPayload>(m.payload);
      ++counts[*m.ground_truth == Action::Cooperate ? 0 : 1][static_cast<int>(t.tone)];
    }
    const auto h = tone_histogram(f.messages);
    for (int col = 0; col < 2; ++col) {
      int n = 0;
      for (int c : counts[col]) n += c;
      const auto props = h.tone_proportions(col == 0 ? Action::Cooperate : Action::Defect);
      for (int k = 0; k < 5; ++k) {
        EXPECT_EQ(h.tones[col][k], counts[col][k]);
        EXPECT_NEAR(props[k], n == 0 ? 0.0 : static_cast<double>(counts[col][k]) / n, 1e-12);
      }
    }
  }
}

TEST(ImageScore, DonorTurnExamples) {
  std::vector<InteractionRecord> recs;
  const Action seq[] = {Action::Cooperate, Action::Cooperate, Action::Cooperate, Action::Defect};
  for (int t = 0; t < 4; ++t) {
    InteractionRecord r;
    r.round = t + 1;
    r.participants[0] = {0, Role::Donor, seq[t], 0, 0, 0};
    r.participants[1] = {1, Role::Recipient, std::nullopt, 0, 0, 0};
    recs.push_back(r);
  }
  EXPECT_EQ(image_score(recs, 0), 2);
  EXPECT_EQ(image_score(recs, 1), 0);
}

TEST(Honesty, RatioOverClaims) {
  std::vector<GossipMessage> m = {
      {1, 1, 0, TonedPayload{Tone::Praising, "", std::nullopt}, Action::Cooperate, {}},
      {1, 1, 0, TonedPayload{Tone::Praising, "", std::nullopt}, Action::Defect, {}},
      {1, 1, 0, TonedPayload{Tone::Neutral, "", std::nullopt}, Action::Defect, {}},
      {1, 1, 0, BinaryPayload{0}, Action::Defect, {}},
  };
  EXPECT_NEAR(*honesty(m), 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(honesty(std::vector<GossipMessage>{}).has_value());
}

TEST(ToneHistogram, ExcludesSelfReports) {
  std::vector<GossipMessage> m = {
      {1, 0, 0, SelfReportPayload{Action::Cooperate, ""}, Action::Cooperate, {}},
      {1, 1, 0, BinaryPayload{1}, Action::Cooperate, {}},
  };
  const auto h = tone_histogram(m);
  EXPECT_EQ(h.tone_total(Action::Cooperate), 0);
  EXPECT_EQ(h.bit_total(Action::Cooperate), 1);
  EXPECT_EQ(h.bit_proportions(Action::Cooperate)[1], 1.0);
}

TEST(Rates, InvestmentFixture) {
  InteractionRecord r;
  r.round = 1;
  r.participants[0] = {0, Role::Investor, Amount{10}, 5, 20, 25};
  r.participants[1] = {1, Role::Responder, Amount{15}, 15, 10, 25};
  const std::vector<InteractionRecord> recs{r};
  const auto rates = investment_rates(recs, 3);
  EXPECT_EQ(*rates.investment_ratio, 0.5);
  EXPECT_EQ(*rates.returned_ratio, 0.5);
}

TEST(Rates, MarketNoneCountsInDenominator) {
  std::vector<InteractionRecord> recs;
  for (Purchase p : {Purchase::None, Purchase::Customized}) {
    InteractionRecord r;
    r.participants[0] = {0, Role::Seller, Quality::High, 0, 0, 0};
    r.participants[1] = {1, Role::Buyer, p, 0, 0, 0};
    recs.push_back(r);
  }
  const auto m = market_rates(recs);
  EXPECT_EQ(*m.high_quality_rate, 1.0);
  EXPECT_EQ(*m.customized_rate, 0.5);
}

TEST(Aggregate, MeanAndStderr) {
  const auto a = aggregate(std::vector<double>{1, 2, 3});
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_NEAR(a.stderr_, 0.5773502691896258, 1e-15);
  const auto same = aggregate(std::vector<double>{4, 4, 4, 4, 4});
  EXPECT_EQ(same.stderr_, 0.0);
  const auto one = aggregate(std::vector<double>{7});
  EXPECT_TRUE(one.single_sample);
  EXPECT_EQ(one.stderr_, 0.0);
}

TEST(Csv, LayoutAndRoundTripFormatting) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(15.761596), "15.761596");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
  MetricsSummary s;
  s.cooperation_ratio = 1;
  const std::vector<std::uint64_t> seeds{1, 2};
  const std::vector<MetricsSummary> sums{s, s};
  const std::string csv = summary_csv("exp", seeds, sums);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).rfind("experiment,seed,cooperation_ratio", 0), 0u);
  EXPECT_NE(csv.find("\nexp,mean,1,"), std::string::npos);
  EXPECT_NE(csv.find("\nexp,stderr,0,"), std::string::npos);
  EXPECT_EQ(summary_fields(s).size() + 2, summary_columns().size());
}
