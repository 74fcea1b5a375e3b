#include "gossip/environments.hpp"

#include <string>

namespace gossip {

namespace {

void check_cost_benefit(double c, double b) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "cost must be > 0");
  if (!(b > c)) throw Error(ErrorCode::InvalidArgument, "benefit must exceed cost");
}

}  // namespace

std::string_view to_string(GameKind g) {
  switch (g) {
    case GameKind::Donation: return "donation";
    case GameKind::IR: return "ir";
    case GameKind::Investment: return "investment";
    case GameKind::Market: return "market";
  }
  return "donation";
}

GameKind parse_game(std::string_view s) {
  for (auto g : {GameKind::Donation, GameKind::IR, GameKind::Investment, GameKind::Market}) {
    if (to_string(g) == s) return g;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown game '" + std::string(s) + "'");
}

void DonationParams::validate() const {
  check_cost_benefit(cost, benefit);
  if (!(endowment >= 0.0)) throw Error(ErrorCode::InvalidArgument, "endowment must be >= 0");
}

void IRParams::validate() const {
  check_cost_benefit(cost, benefit);
  if (!(endowment >= 0.0)) throw Error(ErrorCode::InvalidArgument, "endowment must be >= 0");
}

void InvestmentParams::validate() const {
  if (!(multiplier > 1.0)) throw Error(ErrorCode::InvalidArgument, "multiplier must exceed 1");
  if (!(endowment >= 0.0)) throw Error(ErrorCode::InvalidArgument, "endowment must be >= 0");
}

double MarketParams::price(Purchase p) const {
  switch (p) {
    case Purchase::Customized: return price_customized;
    case Purchase::Standardized: return price_standardized;
    case Purchase::None: return 0.0;
  }
  return 0.0;
}

double MarketParams::cost(Quality q) const { return q == Quality::High ? cost_high : cost_low; }

double MarketParams::value(Quality q, Purchase p) const {
  if (p == Purchase::None) return 0.0;
  if (q == Quality::High) {
    return p == Purchase::Customized ? value_high_customized : value_high_standardized;
  }
  return p == Purchase::Customized ? value_low_customized : value_low_standardized;
}

RewardPair donation_payoff(Action donor_action, const DonationParams& p) {
  if (donor_action == Action::Cooperate) return {-p.cost, p.benefit};
  return {0.0, 0.0};
}

RewardPair ir_payoff(Action a_i, Action a_j, const IRParams& p) {
  const bool ci = a_i == Action::Cooperate;
  const bool cj = a_j == Action::Cooperate;
  // Each player pays c for its own cooperation and receives b from the other's.
  return {(cj ? p.benefit : 0.0) - (ci ? p.cost : 0.0),
          (ci ? p.benefit : 0.0) - (cj ? p.cost : 0.0)};
}

RewardPair investment_step(double investment, double returned, double investor_resources,
                           const InvestmentParams& p) {
  if (!(investment >= 0.0 && investment <= investor_resources)) {
    throw Error(ErrorCode::ActionOutOfRange,
                "investment " + std::to_string(investment) + " outside [0, " +
                    std::to_string(investor_resources) + "]");
  }
  const double transferred = p.multiplier * investment;
  if (!(returned >= 0.0 && returned <= transferred)) {
    throw Error(ErrorCode::ActionOutOfRange, "return " + std::to_string(returned) +
                                                 " outside [0, " + std::to_string(transferred) +
                                                 "]");
  }
  return {-investment + returned, transferred - returned};
}

RewardPair market_payoff(Quality q, Purchase purchase, const MarketParams& p) {
  if (purchase == Purchase::None) return {0.0, 0.0};
  return {p.price(purchase) - p.cost(q), p.value(q, purchase) - p.price(purchase)};
}

std::array<std::array<RewardPair, 2>, 2> product_choice_matrix(const MarketParams& p) {
  std::array<std::array<RewardPair, 2>, 2> m{};
  const std::array<Quality, 2> qs = {Quality::High, Quality::Low};
  const std::array<Purchase, 2> ps = {Purchase::Customized, Purchase::Standardized};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) m[i][j] = market_payoff(qs[i], ps[j], p);
  }
  return m;
}

}  // namespace gossip
