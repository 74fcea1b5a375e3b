#pragma once

// Closed-form values and one-shot deviation checks for the two matrix games.

#include <string>
#include <vector>

#include "gossip/core.hpp"
#include "gossip/strategies.hpp"

namespace gossip {

enum class MatrixGame { Donation, IR };

std::string_view to_string(MatrixGame g);
MatrixGame parse_matrix_game(std::string_view s);

inline constexpr double kMarginTolerance = 1e-9;
inline constexpr int kDefaultCheckHorizon = 2000;

/// (gamma*b - c) / (1 - gamma^2): the value of the alternating -c, b stream.
/// Throws DivisionByZero at gamma = 1, InvalidArgument outside (0, 1].
double grim_cooperation_value(double gamma, double b, double c);

/// gamma >= c / b.
bool spe_condition(double gamma, double b, double c);

enum class AbstractFlag { Clean, Flagged };
std::string_view to_string(AbstractFlag f);

struct ValueReport {
  std::string label;
  AbstractFlag state = AbstractFlag::Clean;
  int remaining = 0;  // participations left; 0 for the infinite game
  double value_on_path = 0.0;
  double value_deviation = 0.0;
  double margin = 0.0;  // on-path minus best one-step deviation
  double tail_bound = 0.0;
  bool spe_holds = true;
  std::string assumptions;
};

struct CheckMode {
  enum Kind { ClosedForm, Truncated } kind = ClosedForm;
  int horizon = kDefaultCheckHorizon;
};

struct DeviationSetup {
  MatrixGame game = MatrixGame::Donation;
  GameParams params;
  MonitoringMode monitoring = MonitoringMode::GossipPublic;
  /// Participations per agent for a finite horizon; ignored when infinite.
  /// 0 derives it from the schedule as 2T/n.
  int participations = 0;
};

/// One report per reachable abstract state (and per remaining-participation
/// count in a finite game). The focal agent starts as donor in the donation game.
std::vector<ValueReport> one_shot_deviation_check(const AbstractProfile& profile,
                                                  const DeviationSetup& setup,
                                                  CheckMode mode = {});

/// Convenience: true iff every report holds.
bool spe_holds(const std::vector<ValueReport>& reports);

/// Compares the recipient's continuation value when its message about the donor
/// is truthful against the inverted message, from each abstract state.
std::vector<ValueReport> recipient_gossip_deviation_check(const AbstractProfile& profile,
                                                          const DeviationSetup& setup,
                                                          CheckMode mode = {});

struct StageChoice {
  int round = 0;
  Action action = Action::Defect;
  double margin = 0.0;  // value of the chosen action minus the alternative, worst case
};

/// Backward induction over T rounds; stage payoffs do not depend on history.
std::vector<StageChoice> backward_induction_finite(MatrixGame game, int T, double c, double b,
                                                   double gamma = 1.0);

struct DominanceReport {
  double gamma = 0.0;
  double gap = 0.0;  // advantage of defecting over cooperating in every state
  std::string assumptions;
};

/// Without public information a deviation is never detected, so defecting
/// beats cooperating by exactly c. Throws InvalidArgument unless c > 0.
DominanceReport private_monitoring_dominance(double gamma, double c);

}  // namespace gossip
