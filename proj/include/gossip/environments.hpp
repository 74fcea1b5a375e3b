#pragma once

// Stage payoffs for the four testbeds and the per-agent resource ledger.

#include <array>
#include <vector>

#include "gossip/core.hpp"

namespace gossip {

enum class GameKind { Donation, IR, Investment, Market };

std::string_view to_string(GameKind g);
GameKind parse_game(std::string_view s);

/// Rewards of the two participants of one interaction, in pairing order.
struct RewardPair {
  double first = 0.0;
  double second = 0.0;
  friend bool operator==(const RewardPair&, const RewardPair&) = default;
};

struct DonationParams {
  double cost = 1.0;
  double benefit = 5.0;
  double endowment = 0.0;
  void validate() const;
};

struct IRParams {
  double cost = 1.0;
  double benefit = 5.0;
  double endowment = 0.0;
  void validate() const;
};

struct InvestmentParams {
  double multiplier = 3.0;
  double endowment = 10.0;
  void validate() const;
};

struct MarketParams {
  double price_customized = 3.0;
  double price_standardized = 1.0;
  double cost_high = 1.0;
  double cost_low = 0.0;
  double value_high_customized = 6.0;
  double value_high_standardized = 3.0;
  double value_low_customized = 3.0;
  double value_low_standardized = 2.0;
  double endowment = 0.0;

  double price(Purchase p) const;
  double cost(Quality q) const;
  double value(Quality q, Purchase p) const;
};

/// Cooperate -> (-c, b); Defect -> (0, 0). Order is (donor, recipient).
RewardPair donation_payoff(Action donor_action, const DonationParams& p);

/// Prisoner's-dilemma matrix built from (c, b).
RewardPair ir_payoff(Action a_i, Action a_j, const IRParams& p);

/// Investor reward -I + R, responder reward m*I - R. Throws ActionOutOfRange
/// unless 0 <= I <= investor_resources and 0 <= R <= m*I.
RewardPair investment_step(double investment, double returned, double investor_resources,
                           const InvestmentParams& p);

/// Order is (seller, buyer). No trade -> (0, 0).
RewardPair market_payoff(Quality q, Purchase purchase, const MarketParams& p);

/// [quality][purchase] for purchase in {c, s}: the 2x2 product-choice table.
std::array<std::array<RewardPair, 2>, 2> product_choice_matrix(const MarketParams& p);

class ResourceLedger {
 public:
  ResourceLedger(std::size_t n_agents, double endowment)
      : initial_(endowment), balances_(n_agents, endowment) {}

  void credit(AgentIndex agent, double reward) { balances_.at(agent) += reward; }
  double balance(AgentIndex agent) const { return balances_.at(agent); }
  const std::vector<double>& balances() const noexcept { return balances_; }
  double initial() const noexcept { return initial_; }

 private:
  double initial_;
  std::vector<double> balances_;
};

}  // namespace gossip
