#include "gossip/metrics.hpp"

#include <charconv>
#include <cmath>
#include <functional>

#include "gossip/channel.hpp"

namespace gossip {

namespace {

std::size_t action_index(Action a) { return a == Action::Cooperate ? 0 : 1; }

std::size_t tone_index(Tone t) { return static_cast<std::size_t>(t); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double cooperation_ratio(std::span<const InteractionRecord> records) {
  int coop = 0;
  int total = 0;
  for (const auto& rec : records) {
    for (const auto& p : rec.participants) {
      if (!p.decision) continue;
      if (const auto* a = std::get_if<Action>(&*p.decision)) {
        ++total;
        if (*a == Action::Cooperate) ++coop;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(coop) / total;
}

int image_score(std::span<const InteractionRecord> records, AgentIndex agent) {
  int score = 0;
  for (const auto& rec : records) {
    for (const auto& p : rec.participants) {
      if (p.agent != agent || !p.decision) continue;
      if (const auto* a = std::get_if<Action>(&*p.decision)) {
        score += *a == Action::Cooperate ? 1 : -1;
      }
    }
  }
  return score;
}

int acting_turns(std::span<const InteractionRecord> records, AgentIndex agent) {
  int n = 0;
  for (const auto& rec : records) {
    for (const auto& p : rec.participants) {
      if (p.agent == agent && p.decision && std::holds_alternative<Action>(*p.decision)) ++n;
    }
  }
  return n;
}

double gini(std::span<const double> returns) {
  double total = 0.0;
  for (double g : returns) total += g;
  if (returns.empty() || total == 0.0) return 0.0;
  double diff = 0.0;
  for (double gi : returns) {
    for (double gj : returns) diff += std::abs(gi - gj);
  }
  return diff / (2.0 * static_cast<double>(returns.size()) * total);
}

std::vector<RoundReward> rewards_of(std::span<const InteractionRecord> records, AgentIndex agent) {
  std::vector<RoundReward> out;
  for (const auto& rec : records) {
    for (const auto& p : rec.participants) {
      if (p.agent == agent) out.push_back({rec.round, p.reward});
    }
  }
  return out;
}

double agent_discounted_return(std::span<const InteractionRecord> records, AgentIndex agent,
                               double gamma, DiscountIndexing indexing) {
  const auto rr = rewards_of(records, agent);
  if (indexing == DiscountIndexing::Global) {
    return discounted_return(std::span<const RoundReward>(rr), gamma);
  }
  std::vector<double> plain;
  plain.reserve(rr.size());
  for (const auto& r : rr) plain.push_back(r.reward);
  return discounted_return(std::span<const double>(plain), gamma);
}

double reward_per_round(std::span<const InteractionRecord> records, AgentIndex agent) {
  const auto rr = rewards_of(records, agent);
  if (rr.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rr) total += r.reward;
  return total / static_cast<double>(rr.size());
}

std::optional<double> honesty(std::span<const GossipMessage> messages) {
  int truthful = 0;
  int total = 0;
  for (const auto& m : messages) {
    if (!m.ground_truth || !claimed_action(m)) continue;
    ++total;
    if (honesty_label(m, *m.ground_truth)) ++truthful;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(truthful) / total;
}

int ToneHistogram::tone_total(Action observed) const {
  int n = 0;
  for (int c : tones[action_index(observed)]) n += c;
  return n;
}

int ToneHistogram::bit_total(Action observed) const {
  const auto& col = bits[action_index(observed)];
  return col[0] + col[1];
}

std::array<double, 5> ToneHistogram::tone_proportions(Action observed) const {
  std::array<double, 5> out{};
  const int n = tone_total(observed);
  if (n == 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(tones[action_index(observed)][i]) / n;
  }
  return out;
}

std::array<double, 2> ToneHistogram::bit_proportions(Action observed) const {
  std::array<double, 2> out{};
  const int n = bit_total(observed);
  if (n == 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(bits[action_index(observed)][i]) / n;
  }
  return out;
}

ToneHistogram tone_histogram(std::span<const GossipMessage> messages) {
  ToneHistogram h;
  for (const auto& m : messages) {
    if (!m.ground_truth) continue;
    const std::size_t col = action_index(*m.ground_truth);
    if (const auto* t = std::get_if<TonedPayload>(&m.payload)) {
      ++h.tones[col][tone_index(t->tone)];
    } else if (const auto* b = std::get_if<BinaryPayload>(&m.payload)) {
      ++h.bits[col][b->bit == 1 ? 1 : 0];
    }
  }
  return h;
}

MarketRates market_rates(std::span<const InteractionRecord> records) {
  int sellers = 0, high = 0, buyers = 0, customized = 0;
  for (const auto& rec : records) {
    for (const auto& p : rec.participants) {
      if (!p.decision) continue;
      if (const auto* q = std::get_if<Quality>(&*p.decision)) {
        ++sellers;
        if (*q == Quality::High) ++high;
      } else if (const auto* b = std::get_if<Purchase>(&*p.decision)) {
        ++buyers;
        if (*b == Purchase::Customized) ++customized;
      }
    }
  }
  MarketRates r;
  if (sellers > 0) r.high_quality_rate = static_cast<double>(high) / sellers;
  if (buyers > 0) r.customized_rate = static_cast<double>(customized) / buyers;
  return r;
}

InvestmentRates investment_rates(std::span<const InteractionRecord> records, double multiplier) {
  std::vector<double> invest, returned;
  for (const auto& rec : records) {
    const Participant* inv = nullptr;
    const Participant* resp = nullptr;
    for (const auto& p : rec.participants) {
      if (p.role == Role::Investor) inv = &p;
      if (p.role == Role::Responder) resp = &p;
    }
    if (inv == nullptr || !inv->decision) continue;
    const double i = std::get<Amount>(*inv->decision).value;
    if (inv->resources_before > 0.0) invest.push_back(i / inv->resources_before);
    if (i > 0.0 && resp != nullptr && resp->decision) {
      returned.push_back(std::get<Amount>(*resp->decision).value / (multiplier * i));
    }
  }
  InvestmentRates r;
  if (!invest.empty()) r.investment_ratio = mean_of(invest);
  if (!returned.empty()) r.returned_ratio = mean_of(returned);
  return r;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.k = values.size();
  if (values.empty()) return a;
  double s = 0.0;
  for (double v : values) s += v;
  a.mean = s / static_cast<double>(a.k);
  if (a.k == 1) {
    a.single_sample = true;
    return a;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  const double sd = std::sqrt(ss / static_cast<double>(a.k - 1));
  a.stderr_ = sd / std::sqrt(static_cast<double>(a.k));
  return a;
}

MetricsSummary summarize(std::span<const InteractionRecord> records,
                         std::span<const GossipMessage> messages, const SummaryInputs& in) {
  MetricsSummary s;
  s.cooperation_ratio = cooperation_ratio(records);
  std::vector<double> returns, images, per_round;
  for (AgentIndex i = 0; i < in.n_agents; ++i) {
    AgentMetrics a;
    a.agent = i;
    a.participations = static_cast<int>(rewards_of(records, i).size());
    a.acting_turns = acting_turns(records, i);
    a.image_score = image_score(records, i);
    a.reward_per_round = reward_per_round(records, i);
    a.discounted_return = agent_discounted_return(records, i, in.discount, in.indexing);
    if (i < in.final_resources.size()) a.final_resources = in.final_resources[i];
    returns.push_back(a.discounted_return);
    if (a.acting_turns > 0) images.push_back(a.image_score);
    if (a.participations > 0) per_round.push_back(a.reward_per_round);
    s.agents.push_back(a);
  }
  s.image_score = mean_of(images);
  s.reward_per_round = mean_of(per_round);
  s.discounted_return = mean_of(returns);
  s.gini = gini(returns);
  s.honesty = honesty(messages);
  s.tones = tone_histogram(messages);
  s.investment = investment_rates(records, in.multiplier);
  s.market = market_rates(records);
  return s;
}

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

using Getter = std::function<std::optional<double>(const MetricsSummary&)>;

struct Column {
  std::string name;
  Getter get;
};

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = [] {
    std::vector<Column> c = {
        {"cooperation_ratio", [](const MetricsSummary& s) { return s.cooperation_ratio; }},
        {"image_score", [](const MetricsSummary& s) { return s.image_score; }},
        {"reward_per_round", [](const MetricsSummary& s) { return s.reward_per_round; }},
        {"discounted_return", [](const MetricsSummary& s) { return s.discounted_return; }},
        {"gini", [](const MetricsSummary& s) { return s.gini; }},
        {"honesty", [](const MetricsSummary& s) { return s.honesty; }},
        {"investment_ratio",
         [](const MetricsSummary& s) { return s.investment.investment_ratio; }},
        {"returned_ratio", [](const MetricsSummary& s) { return s.investment.returned_ratio; }},
        {"high_quality_rate",
         [](const MetricsSummary& s) { return s.market.high_quality_rate; }},
        {"customized_rate", [](const MetricsSummary& s) { return s.market.customized_rate; }},
    };
    for (Action a : {Action::Cooperate, Action::Defect}) {
      for (Tone t : kAllTones) {
        c.push_back({"tone_" + std::string(a == Action::Cooperate ? "c_" : "d_") +
                         std::string(to_string(t)),
                     [a, t](const MetricsSummary& s) -> std::optional<double> {
                       if (s.tones.tone_total(a) == 0) return std::nullopt;
                       return s.tones.tone_proportions(a)[static_cast<std::size_t>(t)];
                     }});
      }
    }
    return c;
  }();
  return cols;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"experiment", "seed"};
    for (const auto& c : columns()) n.push_back(c.name);
    return n;
  }();
  return names;
}

std::vector<std::string> summary_fields(const MetricsSummary& s) {
  std::vector<std::string> out;
  for (const auto& c : columns()) {
    const auto v = c.get(s);
    out.push_back(v ? format_double(*v) : std::string());
  }
  return out;
}

std::string summary_csv(const std::string& experiment, std::span<const std::uint64_t> seeds,
                        std::span<const MetricsSummary> summaries) {
  std::string out = join(summary_columns()) + "\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    std::vector<std::string> row = {experiment, std::to_string(seeds[i])};
    for (auto& f : summary_fields(summaries[i])) row.push_back(std::move(f));
    out += join(row) + "\n";
  }
  std::vector<std::string> mean_row = {experiment, "mean"};
  std::vector<std::string> se_row = {experiment, "stderr"};
  for (const auto& c : columns()) {
    std::vector<double> vals;
    for (const auto& s : summaries) {
      if (auto v = c.get(s)) vals.push_back(*v);
    }
    if (vals.empty()) {
      mean_row.emplace_back();
      se_row.emplace_back();
      continue;
    }
    const auto agg = aggregate(vals);
    mean_row.push_back(format_double(agg.mean));
    se_row.push_back(format_double(agg.stderr_));
  }
  out += join(mean_row) + "\n";
  out += join(se_row) + "\n";
  return out;
}

std::string agents_csv(const std::string& experiment, std::span<const std::uint64_t> seeds,
                       std::span<const MetricsSummary> summaries,
                       std::span<const std::string> names) {
  std::string out =
      "experiment,seed,agent,name,participations,acting_turns,image_score,reward_per_round,"
      "discounted_return,final_resources\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    for (const auto& a : summaries[i].agents) {
      out += join({experiment, std::to_string(seeds[i]), std::to_string(a.agent),
                   a.agent < names.size() ? names[a.agent] : std::string(),
                   std::to_string(a.participations), std::to_string(a.acting_turns),
                   std::to_string(a.image_score), format_double(a.reward_per_round),
                   format_double(a.discounted_return), format_double(a.final_resources)}) +
             "\n";
    }
  }
  return out;
}

}  // namespace gossip
