#include "gossip/scheduler.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace gossip {

std::string_view to_string(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::Donation: return "donation";
    case ScheduleMode::Simultaneous: return "simultaneous";
    case ScheduleMode::Partition: return "partition";
    case ScheduleMode::BipartiteSingle: return "bipartite_single";
    case ScheduleMode::BipartiteFull: return "bipartite_full";
  }
  return "simultaneous";
}

ScheduleMode parse_schedule_mode(std::string_view s) {
  for (auto m : {ScheduleMode::Donation, ScheduleMode::Simultaneous, ScheduleMode::Partition,
                 ScheduleMode::BipartiteSingle, ScheduleMode::BipartiteFull}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schedule mode '" + std::string(s) + "'");
}

namespace {

long long pair_count(std::size_t n) {
  return static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
}

void require_feasible(std::size_t n, int T) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 agents");
  if (T < 0) throw Error(ErrorCode::InvalidArgument, "negative horizon");
  if (T > pair_count(n)) {
    throw Error(ErrorCode::Infeasible, "T=" + std::to_string(T) + " exceeds C(" +
                                           std::to_string(n) + ",2)=" +
                                           std::to_string(pair_count(n)));
  }
}

enum class NextRole : unsigned char { Either, Donor, Recipient };

// Randomized depth-first construction. Candidates at each step are unused
// pairs whose orientation agrees with both agents' next required role.
class DonationSearch {
 public:
  DonationSearch(std::size_t n, int T, Rng rng, long node_budget)
      : n_(n), T_(T), rng_(rng), budget_(node_budget), used_(n * n, 0), next_(n, NextRole::Either) {}

  bool run(std::vector<Pairing>& out) {
    if (!dfs()) return false;
    out = seq_;
    return true;
  }

 private:
  bool can(AgentIndex a, NextRole want) const {
    return next_[a] == NextRole::Either || next_[a] == want;
  }

  bool dfs() {
    if (static_cast<int>(seq_.size()) == T_) return true;
    if (++expansions_ > budget_) return false;

    std::vector<Pairing> candidates;
    for (AgentIndex i = 0; i < n_; ++i) {
      for (AgentIndex j = i + 1; j < n_; ++j) {
        if (used_[i * n_ + j]) continue;
        if (can(i, NextRole::Donor) && can(j, NextRole::Recipient)) candidates.push_back({i, j});
        if (can(j, NextRole::Donor) && can(i, NextRole::Recipient)) candidates.push_back({j, i});
      }
    }
    rng_.shuffle(std::span<Pairing>(candidates));

    for (const auto& p : candidates) {
      const AgentIndex lo = std::min(p.first, p.second);
      const AgentIndex hi = std::max(p.first, p.second);
      const NextRole prev_d = next_[p.first];
      const NextRole prev_r = next_[p.second];
      used_[lo * n_ + hi] = 1;
      next_[p.first] = NextRole::Recipient;
      next_[p.second] = NextRole::Donor;
      seq_.push_back(p);
      if (dfs()) return true;
      if (expansions_ > budget_) return false;
      seq_.pop_back();
      next_[p.first] = prev_d;
      next_[p.second] = prev_r;
      used_[lo * n_ + hi] = 0;
    }
    return false;
  }

  std::size_t n_;
  int T_;
  Rng rng_;
  long budget_;
  long expansions_ = 0;
  std::vector<char> used_;
  std::vector<NextRole> next_;
  std::vector<Pairing> seq_;
};

Schedule single_pair_schedule(ScheduleMode mode, std::size_t n, const std::vector<Pairing>& seq) {
  Schedule s;
  s.mode = mode;
  s.n_agents = n;
  s.rounds.reserve(seq.size());
  for (const auto& p : seq) {
    ScheduleRound r;
    r.pairs.push_back(p);
    for (AgentIndex a = 0; a < n; ++a) {
      if (a != p.first && a != p.second) r.idle.push_back(a);
    }
    s.rounds.push_back(std::move(r));
  }
  return s;
}

}  // namespace

Schedule donation_schedule(std::size_t n, int T, std::uint64_t seed, int restart_budget) {
  require_feasible(n, T);
  Rng base = Rng(seed).derive("scheduler/donation");
  const long node_budget = 64L * static_cast<long>(T) + 1024;
  for (int attempt = 0; attempt < restart_budget; ++attempt) {
    DonationSearch search(n, T, base.derive(static_cast<std::uint64_t>(attempt)), node_budget);
    std::vector<Pairing> seq;
    if (search.run(seq)) return single_pair_schedule(ScheduleMode::Donation, n, seq);
  }
  throw Error(ErrorCode::SchedulingDeadlock,
              "no alternating schedule found after " + std::to_string(restart_budget) + " restarts");
}

Schedule simultaneous_schedule(std::size_t n, int T, std::uint64_t seed) {
  require_feasible(n, T);
  Rng rng = Rng(seed).derive("scheduler/simultaneous");
  std::vector<Pairing> all;
  for (AgentIndex i = 0; i < n; ++i) {
    for (AgentIndex j = i + 1; j < n; ++j) all.push_back({i, j});
  }
  rng.shuffle(std::span<Pairing>(all));
  for (auto& p : all) {
    if (rng.below(2) == 1) std::swap(p.first, p.second);
  }
  all.resize(static_cast<std::size_t>(T));
  return single_pair_schedule(ScheduleMode::Simultaneous, n, all);
}

Partition partition_round(std::vector<AgentIndex> available, Rng& rng) {
  if (available.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 agents");
  rng.shuffle(std::span<AgentIndex>(available));
  Partition out;
  std::size_t i = 0;
  for (; i + 1 < available.size(); i += 2) out.pairs.push_back({available[i], available[i + 1]});
  if (i < available.size()) out.idle.push_back(available[i]);
  return out;
}

Schedule partition_schedule(std::size_t n, int T, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 agents");
  const std::size_t slots = n + (n % 2);  // odd populations get a bye slot
  const int max_rounds = static_cast<int>(slots - 1);
  if (T > max_rounds) {
    throw Error(ErrorCode::Infeasible, "partition mode supports at most " +
                                           std::to_string(max_rounds) + " rounds for n=" +
                                           std::to_string(n));
  }
  Rng rng = Rng(seed).derive("scheduler/partition");
  std::vector<AgentIndex> label(slots);
  std::iota(label.begin(), label.end(), AgentIndex{0});
  rng.shuffle(std::span<AgentIndex>(label));
  std::vector<int> order(static_cast<std::size_t>(max_rounds));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));

  const AgentIndex bye = n;  // only present when n is odd
  const std::size_t m = slots - 1;
  Schedule s;
  s.mode = ScheduleMode::Partition;
  s.n_agents = n;
  for (int t = 0; t < T; ++t) {
    const auto r = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
    std::vector<Pairing> raw;
    raw.push_back({label[m], label[r]});
    for (std::size_t k = 1; k < slots / 2; ++k) {
      raw.push_back({label[(r + k) % m], label[(r + m - k) % m]});
    }
    ScheduleRound round;
    for (auto p : raw) {
      if (p.first == bye) {
        round.idle.push_back(p.second);
      } else if (p.second == bye) {
        round.idle.push_back(p.first);
      } else {
        if (rng.below(2) == 1) std::swap(p.first, p.second);
        round.pairs.push_back(p);
      }
    }
    s.rounds.push_back(std::move(round));
  }
  return s;
}

Schedule bipartite_schedule(const std::vector<AgentIndex>& sellers,
                            const std::vector<AgentIndex>& buyers, int T, std::uint64_t seed,
                            ScheduleMode mode) {
  if (sellers.empty() || buyers.empty()) {
    throw Error(ErrorCode::InvalidArgument, "need at least one seller and one buyer");
  }
  Rng rng = Rng(seed).derive("scheduler/bipartite");
  Schedule s;
  s.mode = mode;
  s.n_agents = sellers.size() + buyers.size();

  if (mode == ScheduleMode::BipartiteSingle) {
    const auto total = static_cast<long long>(sellers.size() * buyers.size());
    if (T > total) {
      throw Error(ErrorCode::Infeasible, "T=" + std::to_string(T) + " exceeds the " +
                                             std::to_string(total) + " distinct seller-buyer pairs");
    }
    std::vector<Pairing> all;
    for (auto sl : sellers) {
      for (auto b : buyers) all.push_back({sl, b});
    }
    rng.shuffle(std::span<Pairing>(all));
    for (int t = 0; t < T; ++t) {
      ScheduleRound r;
      r.pairs.push_back(all[static_cast<std::size_t>(t)]);
      s.rounds.push_back(std::move(r));
    }
    return s;
  }
  if (mode != ScheduleMode::BipartiteFull) {
    throw Error(ErrorCode::InvalidArgument, "bipartite_schedule needs a bipartite mode");
  }
  if (sellers.size() != buyers.size()) {
    throw Error(ErrorCode::InvalidArgument, "full matching needs equal seller and buyer counts");
  }
  const std::size_t k = sellers.size();
  if (T > static_cast<int>(k)) {
    throw Error(ErrorCode::Infeasible,
                "full matching supports at most " + std::to_string(k) + " rounds");
  }
  std::vector<AgentIndex> sp = sellers;
  std::vector<AgentIndex> bp = buyers;
  rng.shuffle(std::span<AgentIndex>(sp));
  rng.shuffle(std::span<AgentIndex>(bp));
  std::vector<std::size_t> shifts(k);
  std::iota(shifts.begin(), shifts.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(shifts));
  for (int t = 0; t < T; ++t) {
    ScheduleRound r;
    for (std::size_t i = 0; i < k; ++i) {
      r.pairs.push_back({sp[i], bp[(i + shifts[static_cast<std::size_t>(t)]) % k]});
    }
    s.rounds.push_back(std::move(r));
  }
  return s;
}

std::vector<std::string> check_schedule(const Schedule& schedule) {
  std::vector<std::string> problems;
  std::set<std::pair<AgentIndex, AgentIndex>> seen;
  std::vector<int> last_role(schedule.n_agents, -1);  // 0 donor, 1 recipient

  for (std::size_t t = 0; t < schedule.rounds.size(); ++t) {
    const auto& round = schedule.rounds[t];
    const std::string where = "round " + std::to_string(t + 1) + ": ";
    std::vector<char> busy(schedule.n_agents, 0);
    for (const auto& p : round.pairs) {
      if (p.first >= schedule.n_agents || p.second >= schedule.n_agents || p.first == p.second) {
        problems.push_back(where + "invalid pair");
        continue;
      }
      if (busy[p.first] || busy[p.second]) problems.push_back(where + "pairs are not disjoint");
      busy[p.first] = busy[p.second] = 1;
      const auto key = std::minmax(p.first, p.second);
      if (!seen.insert({key.first, key.second}).second) {
        problems.push_back(where + "pair {" + std::to_string(key.first) + "," +
                           std::to_string(key.second) + "} repeats");
      }
      if (schedule.mode == ScheduleMode::Donation) {
        if (last_role[p.first] == 0) {
          problems.push_back(where + "agent " + std::to_string(p.first) + " donates twice in a row");
        }
        if (last_role[p.second] == 1) {
          problems.push_back(where + "agent " + std::to_string(p.second) +
                             " receives twice in a row");
        }
        last_role[p.first] = 0;
        last_role[p.second] = 1;
      }
    }
    if (schedule.mode == ScheduleMode::Partition) {
      if (round.idle.size() != schedule.n_agents % 2) {
        problems.push_back(where + "idle set has the wrong size");
      }
      if (round.pairs.size() != schedule.n_agents / 2) {
        problems.push_back(where + "partition does not cover the population");
      }
    }
  }
  return problems;
}

std::string serialize(const Schedule& schedule) {
  std::ostringstream out;
  out << to_string(schedule.mode) << " n=" << schedule.n_agents
      << " T=" << schedule.rounds.size() << '\n';
  for (std::size_t t = 0; t < schedule.rounds.size(); ++t) {
    out << (t + 1) << ':';
    for (const auto& p : schedule.rounds[t].pairs) out << ' ' << p.first << '>' << p.second;
    if (!schedule.rounds[t].idle.empty() && schedule.mode == ScheduleMode::Partition) {
      out << " | idle";
      for (auto a : schedule.rounds[t].idle) out << ' ' << a;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gossip
