#pragma once

// Pairing schedules. Every schedule is generated up front for the whole run and
// never repeats an unordered pair.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gossip/core.hpp"
#include "gossip/rng.hpp"

namespace gossip {

enum class ScheduleMode {
  Donation,         // one ordered (donor, recipient) dyad per round, roles alternate per agent
  Simultaneous,     // one unordered dyad per round
  Partition,        // all agents split into disjoint pairs each round
  BipartiteSingle,  // one (seller, buyer) dyad per round
  BipartiteFull,    // a perfect seller/buyer matching per round
};

std::string_view to_string(ScheduleMode m);
ScheduleMode parse_schedule_mode(std::string_view s);

/// `first` is the acting/first-moving side whenever the mode is ordered
/// (donor, investor, seller).
struct Pairing {
  AgentIndex first = 0;
  AgentIndex second = 0;
  friend bool operator==(const Pairing&, const Pairing&) = default;
};

struct ScheduleRound {
  std::vector<Pairing> pairs;
  std::vector<AgentIndex> idle;
};

struct Schedule {
  ScheduleMode mode = ScheduleMode::Simultaneous;
  std::size_t n_agents = 0;
  std::vector<ScheduleRound> rounds;
};

inline constexpr int kDefaultRestartBudget = 1000;

/// Throws Infeasible if T > n(n-1)/2, SchedulingDeadlock if the randomized
/// backtracking search fails `restart_budget` times in a row.
Schedule donation_schedule(std::size_t n, int T, std::uint64_t seed,
                           int restart_budget = kDefaultRestartBudget);

Schedule simultaneous_schedule(std::size_t n, int T, std::uint64_t seed);

struct Partition {
  std::vector<Pairing> pairs;
  std::vector<AgentIndex> idle;
};

/// Uniformly random split of `available` into floor(n/2) pairs; one idles if n is odd.
Partition partition_round(std::vector<AgentIndex> available, Rng& rng);

/// Partition mode with the no-repeat guarantee (a relabelled round-robin rotation).
/// Feasible for T <= n-1 (n even) or T <= n (n odd).
Schedule partition_schedule(std::size_t n, int T, std::uint64_t seed);

/// Sellers and buyers are agent indices. Single mode needs T <= |S|*|B|; full mode
/// needs |S| == |B| and T <= |S|.
Schedule bipartite_schedule(const std::vector<AgentIndex>& sellers,
                            const std::vector<AgentIndex>& buyers, int T, std::uint64_t seed,
                            ScheduleMode mode);

/// All invariant violations of `schedule`; empty means valid.
std::vector<std::string> check_schedule(const Schedule& schedule);

/// Canonical text form, one line per round: "t: a>b c>d | idle e".
std::string serialize(const Schedule& schedule);

}  // namespace gossip
