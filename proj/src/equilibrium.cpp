#include "gossip/equilibrium.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "gossip/environments.hpp"

namespace gossip {

std::string_view to_string(MatrixGame g) { return g == MatrixGame::IR ? "ir" : "donation"; }

MatrixGame parse_matrix_game(std::string_view s) {
  if (s == "donation") return MatrixGame::Donation;
  if (s == "ir") return MatrixGame::IR;
  throw Error(ErrorCode::InvalidArgument, "unknown matrix game '" + std::string(s) + "'");
}

std::string_view to_string(AbstractFlag f) { return f == AbstractFlag::Clean ? "clean" : "flagged"; }

double grim_cooperation_value(double gamma, double b, double c) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "discount must lie in (0, 1]");
  }
  if (gamma == 1.0) {
    throw Error(ErrorCode::DivisionByZero, "undiscounted limit: the alternating stream diverges");
  }
  return (gamma * b - c) / (1.0 - gamma * gamma);
}

bool spe_condition(double gamma, double b, double c) { return gamma >= c / b; }

namespace {

// Nodes of the focal agent's abstract process. Donation alternates donor and
// recipient phases; the IR game has a single simultaneous phase.
enum class Phase { Donor, Recipient, Player };

struct Node {
  AbstractFlag flag;
  Phase phase;
};

class Model {
 public:
  Model(const AbstractProfile& profile, const DeviationSetup& setup)
      : profile_(profile), setup_(setup) {
    setup_.params.validate();
  }

  double gamma() const { return setup_.params.discount; }

  Action on_path(AbstractFlag f) const {
    return f == AbstractFlag::Clean ? profile_.vs_clean : profile_.own_when_flagged;
  }

  Action partner_move(AbstractFlag f) const {
    if (f == AbstractFlag::Flagged) return profile_.vs_flagged;
    // Under global grim a flagged focal agent would also turn its partners; a
    // clean focal agent faces clean partners either way.
    return profile_.vs_clean;
  }

  bool reported_defect(Action a) const {
    switch (setup_.monitoring) {
      case MonitoringMode::Private: return false;
      case MonitoringMode::PerfectPublic: return a == Action::Defect;
      case MonitoringMode::GossipPublic: break;
    }
    switch (profile_.gossip) {
      case GossipRule::Truthful: return a == Action::Defect;
      case GossipRule::Inverted: return a == Action::Cooperate;
      case GossipRule::Silent: return false;
    }
    return false;
  }

  // Reward and successor when the focal agent plays `a` (ignored in a
  // recipient phase).
  std::pair<double, Node> step(Node n, Action a) const {
    const auto& p = setup_.params;
    switch (n.phase) {
      case Phase::Donor: {
        const double r = donation_payoff(a, {p.cost, p.benefit, 0.0}).first;
        return {r, {next_flag(n.flag, a), Phase::Recipient}};
      }
      case Phase::Recipient: {
        const double r = donation_payoff(partner_move(n.flag), {p.cost, p.benefit, 0.0}).second;
        return {r, {n.flag, Phase::Donor}};
      }
      case Phase::Player: {
        const double r = ir_payoff(a, partner_move(n.flag), {p.cost, p.benefit, 0.0}).first;
        return {r, {next_flag(n.flag, a), Phase::Player}};
      }
    }
    return {0.0, n};
  }

  std::pair<double, Node> step_on_path(Node n) const { return step(n, on_path(n.flag)); }

  // Value of following the profile for `k` more participations.
  double value_finite(Node n, int k) const {
    double total = 0.0;
    double weight = 1.0;
    for (int i = 0; i < k; ++i) {
      auto [r, next] = step_on_path(n);
      total += weight * r;
      weight *= gamma();
      n = next;
    }
    return total;
  }

  // Stationary value: solves (I - gamma P) V = r on the node graph.
  double value_infinite(Node start) const {
    std::vector<Node> nodes;
    for (auto f : {AbstractFlag::Clean, AbstractFlag::Flagged}) {
      if (setup_.game == MatrixGame::IR) {
        nodes.push_back({f, Phase::Player});
      } else {
        nodes.push_back({f, Phase::Donor});
        nodes.push_back({f, Phase::Recipient});
      }
    }
    const std::size_t m = nodes.size();
    auto index = [&](Node n) {
      for (std::size_t i = 0; i < m; ++i) {
        if (nodes[i].flag == n.flag && nodes[i].phase == n.phase) return i;
      }
      return m;
    };
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      auto [r, next] = step_on_path(nodes[i]);
      a[i][i] += 1.0;
      a[i][index(next)] -= gamma();
      a[i][m] = r;
    }
    for (std::size_t col = 0; col < m; ++col) {
      std::size_t piv = col;
      for (std::size_t row = col + 1; row < m; ++row) {
        if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
      }
      if (std::abs(a[piv][col]) < 1e-14) {
        throw Error(ErrorCode::DivisionByZero, "value system is singular (undiscounted game)");
      }
      std::swap(a[piv], a[col]);
      for (std::size_t row = 0; row < m; ++row) {
        if (row == col) continue;
        const double f = a[row][col] / a[col][col];
        for (std::size_t k = col; k <= m; ++k) a[row][k] -= f * a[col][k];
      }
    }
    const std::size_t s = index(start);
    return a[s][m] / a[s][s];
  }

  double max_abs_reward() const {
    const auto& p = setup_.params;
    return std::max(std::abs(p.benefit), std::abs(p.cost));
  }

 private:
  AbstractFlag next_flag(AbstractFlag f, Action a) const {
    if (f == AbstractFlag::Flagged || reported_defect(a)) return AbstractFlag::Flagged;
    return AbstractFlag::Clean;
  }

  AbstractProfile profile_;
  DeviationSetup setup_;
};

Action other(Action a) { return a == Action::Cooperate ? Action::Defect : Action::Cooperate; }

std::string base_assumptions(const DeviationSetup& s) {
  std::string text =
      "homogeneous population; partners clean on path; no pair meets twice; monitoring=";
  text += to_string(s.monitoring);
  if (s.game == MatrixGame::Donation) text += "; focal agent alternates donor/recipient";
  return text;
}

int finite_participations(const DeviationSetup& s) {
  if (s.participations > 0) return s.participations;
  return std::max(1, 2 * s.params.horizon_length / s.params.n_agents);
}

void check_mode(CheckMode mode) {
  if (mode.kind == CheckMode::Truncated && mode.horizon < 1) {
    throw Error(ErrorCode::InvalidArgument, "truncation horizon must be >= 1");
  }
}

}  // namespace

std::vector<ValueReport> one_shot_deviation_check(const AbstractProfile& profile,
                                                  const DeviationSetup& setup, CheckMode mode) {
  check_mode(mode);
  const Model model(profile, setup);
  const Phase decide = setup.game == MatrixGame::IR ? Phase::Player : Phase::Donor;
  const double g = model.gamma();
  std::vector<ValueReport> out;

  auto report = [&](AbstractFlag f, int remaining, double on_path, double deviation,
                    double tail) {
    ValueReport r;
    r.label = profile.label;
    r.state = f;
    r.remaining = remaining;
    r.value_on_path = on_path;
    r.value_deviation = deviation;
    r.margin = on_path - deviation;
    r.tail_bound = tail;
    r.spe_holds = r.margin >= -(kMarginTolerance + 2.0 * tail);
    r.assumptions = base_assumptions(setup);
    out.push_back(std::move(r));
  };

  if (setup.params.horizon_type == HorizonType::Finite) {
    const int k_max = finite_participations(setup);
    for (int k = 1; k <= k_max; ++k) {
      for (auto f : {AbstractFlag::Clean, AbstractFlag::Flagged}) {
        const Node n{f, decide};
        const double on_path = model.value_finite(n, k);
        auto [r, next] = model.step(n, other(model.on_path(f)));
        report(f, k, on_path, r + g * model.value_finite(next, k - 1), 0.0);
      }
    }
    for (auto& r : out) r.assumptions += "; finite horizon";
    return out;
  }

  for (auto f : {AbstractFlag::Clean, AbstractFlag::Flagged}) {
    const Node n{f, decide};
    auto [r, next] = model.step(n, other(model.on_path(f)));
    if (mode.kind == CheckMode::ClosedForm) {
      report(f, 0, model.value_infinite(n), r + g * model.value_infinite(next), 0.0);
    } else {
      const int h = mode.horizon;
      const double tail = std::pow(g, h) * model.max_abs_reward() / (1.0 - g);
      report(f, 0, model.value_finite(n, h), r + g * model.value_finite(next, h - 1), tail);
    }
  }
  return out;
}

bool spe_holds(const std::vector<ValueReport>& reports) {
  for (const auto& r : reports) {
    if (!r.spe_holds) return false;
  }
  return true;
}

std::vector<ValueReport> recipient_gossip_deviation_check(const AbstractProfile& profile,
                                                          const DeviationSetup& setup,
                                                          CheckMode mode) {
  check_mode(mode);
  const Model model(profile, setup);
  const Phase listen = setup.game == MatrixGame::IR ? Phase::Player : Phase::Recipient;
  std::vector<ValueReport> out;
  for (auto f : {AbstractFlag::Clean, AbstractFlag::Flagged}) {
    const Node n{f, listen};
    // The message changes only the donor's flag. The recipient never meets that
    // donor again, and its own flag moves only on reports about itself, so both
    // branches continue from the same node.
    double truthful = 0.0;
    double inverted = 0.0;
    double tail = 0.0;
    if (mode.kind == CheckMode::ClosedForm &&
        setup.params.horizon_type != HorizonType::Finite) {
      truthful = model.value_infinite(n);
      inverted = model.value_infinite(n);
    } else {
      const int h = setup.params.horizon_type == HorizonType::Finite
                        ? finite_participations(setup)
                        : mode.horizon;
      truthful = model.value_finite(n, h);
      inverted = model.value_finite(n, h);
      if (setup.params.horizon_type != HorizonType::Finite) {
        tail = std::pow(model.gamma(), h) * model.max_abs_reward() / (1.0 - model.gamma());
      }
    }
    ValueReport r;
    r.label = profile.label;
    r.state = f;
    r.value_on_path = truthful;
    r.value_deviation = inverted;
    r.margin = truthful - inverted;
    r.tail_bound = tail;
    r.spe_holds = r.margin >= -kMarginTolerance;
    r.assumptions = base_assumptions(setup) + "; own value read from the recipient node";
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StageChoice> backward_induction_finite(MatrixGame game, int T, double c, double b,
                                                   double gamma) {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "T must be >= 1");
  if (!(c > 0.0) || !(b > c)) throw Error(ErrorCode::InvalidArgument, "need b > c > 0");
  const IRParams ir{c, b, 0.0};
  const DonationParams dp{c, b, 0.0};

  auto stage = [&](Action own, Action partner) {
    if (game == MatrixGame::IR) return ir_payoff(own, partner, ir).first;
    return donation_payoff(own, dp).first + donation_payoff(partner, dp).second;
  };

  // Continuation per history class (clean, flagged) under the already-solved
  // tail of the game. Classes are indexed by the focal agent's own flag.
  std::array<double, 2> cont = {0.0, 0.0};
  std::vector<StageChoice> out(static_cast<std::size_t>(T));
  for (int t = T; t >= 1; --t) {
    std::array<double, 2> next_cont{};
    std::array<Action, 2> chosen{};
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int h = 0; h < 2; ++h) {
      // Reporting moves the class to flagged after a defection; the tail play
      // is the same in both classes so this never changes the comparison.
      auto q = [&](Action own, Action partner) {
        const int h_next = (h == 1 || own == Action::Defect) ? 1 : 0;
        return stage(own, partner) + gamma * cont[static_cast<std::size_t>(h_next)];
      };
      double margin_d = std::numeric_limits<double>::infinity();
      double margin_c = std::numeric_limits<double>::infinity();
      for (auto partner : {Action::Cooperate, Action::Defect}) {
        const double gap = q(Action::Defect, partner) - q(Action::Cooperate, partner);
        margin_d = std::min(margin_d, gap);
        margin_c = std::min(margin_c, -gap);
      }
      const Action best = margin_d >= margin_c ? Action::Defect : Action::Cooperate;
      chosen[static_cast<std::size_t>(h)] = best;
      worst_margin = std::min(worst_margin, std::max(margin_d, margin_c));
      // Symmetric profile: the partner plays the same induced action.
      next_cont[static_cast<std::size_t>(h)] = q(best, best);
    }
    cont = next_cont;
    if (chosen[0] != chosen[1]) {
      throw Error(ErrorCode::Unabstractable, "induced play differs across history classes");
    }
    out[static_cast<std::size_t>(t - 1)] = {t, chosen[0], worst_margin};
  }
  return out;
}

DominanceReport private_monitoring_dominance(double gamma, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "cost must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "discount must lie in (0, 1]");
  }
  return {gamma, c,
          "no agent observes another's move, so play against future partners cannot depend on it"};
}

}  // namespace gossip
