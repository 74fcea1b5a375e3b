#pragma once

// Evaluation metrics over interaction records and the public pool, plus the
// CSV layout of the run summary.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gossip/core.hpp"

namespace gossip {

/// Cooperative binary decisions over all binary decisions (donors in the
/// donation game, both players in the matrix game). 0 when there are none.
double cooperation_ratio(std::span<const InteractionRecord> records);

/// Cooperations minus defections over the agent's own binary decisions.
int image_score(std::span<const InteractionRecord> records, AgentIndex agent);

/// Number of binary decisions the agent made (its acting-role turns).
int acting_turns(std::span<const InteractionRecord> records, AgentIndex agent);

/// Sum_ij |G_i - G_j| / (2 n Sum G); 0 when Sum G is 0 or the input is empty.
/// Mixed-sign inputs are reported unmodified.
double gini(std::span<const double> returns);

/// The agent's rewards in participation order, with round indices.
std::vector<RoundReward> rewards_of(std::span<const InteractionRecord> records, AgentIndex agent);

double agent_discounted_return(std::span<const InteractionRecord> records, AgentIndex agent,
                               double gamma, DiscountIndexing indexing);

/// Total reward divided by the agent's participation count (0 if it never played).
double reward_per_round(std::span<const InteractionRecord> records, AgentIndex agent);

/// Truthful claim-bearing reports over claim-bearing reports; only messages
/// carrying engine ground truth count. nullopt when there are none.
std::optional<double> honesty(std::span<const GossipMessage> messages);

struct ToneHistogram {
  // [observed action][tone]; self-reports are excluded.
  std::array<std::array<int, 5>, 2> tones{};
  // [observed action][bit]
  std::array<std::array<int, 2>, 2> bits{};

  int tone_total(Action observed) const;
  int bit_total(Action observed) const;
  /// Column normalised to 1; all zeros when the column is empty.
  std::array<double, 5> tone_proportions(Action observed) const;
  std::array<double, 2> bit_proportions(Action observed) const;
};

ToneHistogram tone_histogram(std::span<const GossipMessage> messages);

struct MarketRates {
  std::optional<double> high_quality_rate;
  std::optional<double> customized_rate;
};

/// H choices over seller decisions; c purchases over buyer decisions (none
/// stays in the denominator).
MarketRates market_rates(std::span<const InteractionRecord> records);

struct InvestmentRates {
  std::optional<double> investment_ratio;  // mean I / pre-round investor resources
  std::optional<double> returned_ratio;    // mean R / (m I) over rounds with I > 0
};

InvestmentRates investment_rates(std::span<const InteractionRecord> records, double multiplier);

struct Aggregate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t k = 0;
  bool single_sample = false;  // k == 1: stderr reported as 0
};

/// Mean and sample standard error s / sqrt(k).
Aggregate aggregate(std::span<const double> values);

struct AgentMetrics {
  AgentIndex agent = 0;
  int participations = 0;
  int acting_turns = 0;
  int image_score = 0;
  double reward_per_round = 0.0;
  double discounted_return = 0.0;
  double final_resources = 0.0;
};

struct MetricsSummary {
  double cooperation_ratio = 0.0;
  double image_score = 0.0;       // mean over agents with acting turns
  double reward_per_round = 0.0;  // mean over agents that played
  double discounted_return = 0.0; // mean over all agents
  double gini = 0.0;
  std::optional<double> honesty;
  ToneHistogram tones;
  InvestmentRates investment;
  MarketRates market;
  std::vector<AgentMetrics> agents;
};

struct SummaryInputs {
  std::size_t n_agents = 0;
  double discount = 0.99;
  DiscountIndexing indexing = DiscountIndexing::Participation;
  double multiplier = 3.0;
  std::vector<double> final_resources;  // optional; copied into AgentMetrics
};

MetricsSummary summarize(std::span<const InteractionRecord> records,
                         std::span<const GossipMessage> messages, const SummaryInputs& in);

// --- CSV ----------------------------------------------------------------------

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Column names of summary.csv.
const std::vector<std::string>& summary_columns();
std::vector<std::string> summary_fields(const MetricsSummary& s);

/// summary.csv text: one row per seed, then a "mean" and a "stderr" row.
std::string summary_csv(const std::string& experiment, std::span<const std::uint64_t> seeds,
                        std::span<const MetricsSummary> summaries);

/// agents.csv text: one row per (seed, agent).
std::string agents_csv(const std::string& experiment, std::span<const std::uint64_t> seeds,
                       std::span<const MetricsSummary> summaries,
                       std::span<const std::string> names);

}  // namespace gossip
