#include "gossip/runner.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <initializer_list>
#include <sstream>

#ifndef GOSSIP_PROMPTS_DIR
#define GOSSIP_PROMPTS_DIR "prompts"
#endif

namespace gossip {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    config_error("bad value for '" + std::string(key) + "' in " + where);
  }
}

// Enum parsers throw InvalidArgument; in a config that is a Config error.
template <typename F>
auto parse_field(F&& parse, const std::string& text, const std::string& what) {
  try {
    return parse(text);
  } catch (const Error& e) {
    config_error(what + ": " + e.what());
  }
}

std::string_view to_string(DiscountIndexing d) {
  return d == DiscountIndexing::Global ? "global" : "participation";
}

DiscountIndexing parse_indexing(const std::string& s) {
  if (s == "participation") return DiscountIndexing::Participation;
  if (s == "global") return DiscountIndexing::Global;
  config_error("unknown discount_indexing '" + s + "'");
}

bool is_ordered_first_mover(Role r) { return r == Role::Seller || r == Role::Investor; }

}  // namespace

// --- config -------------------------------------------------------------------------

ScheduleMode RunConfig::schedule_mode() const {
  if (schedule) return *schedule;
  switch (game) {
    case GameKind::Donation: return ScheduleMode::Donation;
    case GameKind::IR: return ScheduleMode::Simultaneous;
    case GameKind::Investment:
      return std::any_of(agents.begin(), agents.end(), [](const AgentSpec& a) { return a.role; })
                 ? ScheduleMode::BipartiteSingle
                 : ScheduleMode::Donation;
    case GameKind::Market: return ScheduleMode::BipartiteSingle;
  }
  return ScheduleMode::Simultaneous;
}

bool RunConfig::uses_llm() const {
  return std::any_of(agents.begin(), agents.end(),
                     [](const AgentSpec& a) { return a.policy == "llm"; });
}

double RunConfig::endowment_for_game() const { return endowment; }

std::string default_agent_name(std::size_t index) {
  static const std::array<const char*, 12> kNames = {"John", "Kate", "Max",  "Jack",
                                                     "Emma", "Liam", "Mia",  "Noah",
                                                     "Zoe",  "Owen", "Lily", "Adam"};
  const std::string base = kNames[index % kNames.size()];
  const std::size_t lap = index / kNames.size();
  return lap == 0 ? base : base + std::to_string(lap + 1);
}

RunConfig parse_config(const json& doc) {
  check_keys(doc,
             {"experiment", "game", "params", "horizon", "discount", "discount_indexing",
              "monitoring", "protocol", "graded_valence", "schedule", "agents", "seeds",
              "master_seed", "output_dir", "prompt_flags", "endpoint", "prompts_dir"},
             "config");
  RunConfig cfg;
  cfg.experiment = get_or<std::string>(doc, "experiment", cfg.experiment, "config");
  if (!doc.contains("game")) config_error("config needs 'game'");
  cfg.game = parse_field(parse_game, get_or<std::string>(doc, "game", "", "config"), "game");

  const json params = doc.value("params", json::object());
  switch (cfg.game) {
    case GameKind::Donation:
    case GameKind::IR:
      check_keys(params, {"cost", "benefit", "endowment"}, "params");
      cfg.cost = get_or(params, "cost", cfg.cost, "params");
      cfg.benefit = get_or(params, "benefit", cfg.benefit, "params");
      cfg.endowment = get_or(params, "endowment", 0.0, "params");
      break;
    case GameKind::Investment:
      check_keys(params, {"multiplier", "endowment"}, "params");
      cfg.multiplier = get_or(params, "multiplier", cfg.multiplier, "params");
      cfg.endowment = get_or(params, "endowment", InvestmentParams{}.endowment, "params");
      break;
    case GameKind::Market: {
      check_keys(params,
                 {"price_customized", "price_standardized", "cost_high", "cost_low",
                  "value_high_customized", "value_high_standardized", "value_low_customized",
                  "value_low_standardized", "endowment"},
                 "params");
      MarketParams& m = cfg.market;
      m.price_customized = get_or(params, "price_customized", m.price_customized, "params");
      m.price_standardized = get_or(params, "price_standardized", m.price_standardized, "params");
      m.cost_high = get_or(params, "cost_high", m.cost_high, "params");
      m.cost_low = get_or(params, "cost_low", m.cost_low, "params");
      m.value_high_customized =
          get_or(params, "value_high_customized", m.value_high_customized, "params");
      m.value_high_standardized =
          get_or(params, "value_high_standardized", m.value_high_standardized, "params");
      m.value_low_customized =
          get_or(params, "value_low_customized", m.value_low_customized, "params");
      m.value_low_standardized =
          get_or(params, "value_low_standardized", m.value_low_standardized, "params");
      cfg.endowment = m.endowment = get_or(params, "endowment", 0.0, "params");
      break;
    }
  }

  if (auto it = doc.find("horizon"); it != doc.end()) {
    check_keys(*it, {"type", "length"}, "horizon");
    cfg.horizon_type = parse_field(parse_horizon, get_or<std::string>(*it, "type", "infinite", "horizon"),
                                   "horizon.type");
    cfg.horizon_length = get_or(*it, "length", cfg.horizon_length, "horizon");
  }
  cfg.discount = get_or(doc, "discount", cfg.discount, "config");
  cfg.indexing = parse_indexing(get_or<std::string>(doc, "discount_indexing", "participation", "config"));
  cfg.monitoring = parse_field(parse_monitoring,
                               get_or<std::string>(doc, "monitoring", "gossip_public", "config"),
                               "monitoring");
  if (auto it = doc.find("protocol"); it != doc.end()) {
    if (it->is_string()) {
      cfg.protocol.variant = parse_field(parse_protocol, it->get<std::string>(), "protocol");
    } else {
      check_keys(*it, {"variant", "convention"}, "protocol");
      cfg.protocol.variant = parse_field(
          parse_protocol, get_or<std::string>(*it, "variant", "tones", "protocol"), "protocol");
      if (it->contains("convention")) {
        cfg.protocol.convention_text = get_or<std::string>(*it, "convention", "", "protocol");
      }
    }
  }
  cfg.graded_valence = get_or(doc, "graded_valence", false, "config");
  if (doc.contains("schedule")) {
    cfg.schedule = parse_field(parse_schedule_mode,
                               get_or<std::string>(doc, "schedule", "", "config"), "schedule");
  }

  if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].empty()) {
    config_error("config needs a non-empty 'agents' list");
  }
  for (const auto& entry : doc["agents"]) {
    check_keys(entry, {"name", "policy", "params", "count", "role"}, "agents[]");
    const int count = get_or(entry, "count", 1, "agents[]");
    if (count < 1) config_error("agents[].count must be at least 1");
    if (count > 1 && entry.contains("name")) config_error("a named agent cannot have count > 1");
    AgentSpec spec;
    spec.policy = get_or<std::string>(entry, "policy", "", "agents[]");
    if (spec.policy.empty()) config_error("agents[] needs a 'policy'");
    spec.params = entry.value("params", json::object());
    if (!spec.params.is_object()) config_error("agents[].params must be an object");
    if (entry.contains("role")) {
      spec.role = parse_field(parse_role, get_or<std::string>(entry, "role", "", "agents[]"), "role");
    }
    for (int k = 0; k < count; ++k) {
      AgentSpec copy = spec;
      copy.name = entry.contains("name") ? get_or<std::string>(entry, "name", "", "agents[]")
                                         : default_agent_name(cfg.agents.size());
      cfg.agents.push_back(std::move(copy));
    }
  }

  if (doc.contains("seeds")) {
    cfg.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", {}, "config");
  }
  cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 0, "config");
  cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir.string(), "config");
  cfg.prompts_dir = get_or<std::string>(doc, "prompts_dir", "", "config");

  if (auto it = doc.find("prompt_flags"); it != doc.end()) {
    check_keys(*it, {"equilibrium_knowledge", "reflection", "self_report"}, "prompt_flags");
    cfg.prompt_flags.equilibrium_knowledge = get_or(*it, "equilibrium_knowledge", false, "prompt_flags");
    cfg.prompt_flags.reflection = get_or(*it, "reflection", false, "prompt_flags");
    cfg.prompt_flags.self_report = get_or(*it, "self_report", false, "prompt_flags");
  }
  if (auto it = doc.find("endpoint"); it != doc.end()) {
    check_keys(*it,
               {"base_url", "model", "temperature", "max_retries", "timeout_ms", "backoff_ms",
                "token_env"},
               "endpoint");
    EndpointConfig& e = cfg.endpoint;
    e.base_url = get_or(*it, "base_url", e.base_url, "endpoint");
    e.model = get_or(*it, "model", e.model, "endpoint");
    e.temperature = get_or(*it, "temperature", e.temperature, "endpoint");
    e.max_retries = get_or(*it, "max_retries", e.max_retries, "endpoint");
    e.timeout = std::chrono::milliseconds(
        get_or<long long>(*it, "timeout_ms", e.timeout.count(), "endpoint"));
    e.backoff = std::chrono::milliseconds(
        get_or<long long>(*it, "backoff_ms", e.backoff.count(), "endpoint"));
    e.token_env = get_or(*it, "token_env", e.token_env, "endpoint");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(file.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const RunConfig& cfg) {
  json doc;
  doc["experiment"] = cfg.experiment;
  doc["game"] = std::string(to_string(cfg.game));
  json params;
  switch (cfg.game) {
    case GameKind::Donation:
    case GameKind::IR:
      params = {{"cost", cfg.cost}, {"benefit", cfg.benefit}, {"endowment", cfg.endowment}};
      break;
    case GameKind::Investment:
      params = {{"multiplier", cfg.multiplier}, {"endowment", cfg.endowment}};
      break;
    case GameKind::Market: {
      const MarketParams& m = cfg.market;
      params = {{"price_customized", m.price_customized},
                {"price_standardized", m.price_standardized},
                {"cost_high", m.cost_high},
                {"cost_low", m.cost_low},
                {"value_high_customized", m.value_high_customized},
                {"value_high_standardized", m.value_high_standardized},
                {"value_low_customized", m.value_low_customized},
                {"value_low_standardized", m.value_low_standardized},
                {"endowment", cfg.endowment}};
      break;
    }
  }
  doc["params"] = params;
  doc["horizon"] = {{"type", std::string(to_string(cfg.horizon_type))},
                    {"length", cfg.horizon_length}};
  doc["discount"] = cfg.discount;
  doc["discount_indexing"] = std::string(to_string(cfg.indexing));
  doc["monitoring"] = std::string(to_string(cfg.monitoring));
  json protocol = {{"variant", std::string(to_string(cfg.protocol.variant))}};
  if (cfg.protocol.convention_text) protocol["convention"] = *cfg.protocol.convention_text;
  doc["protocol"] = protocol;
  doc["graded_valence"] = cfg.graded_valence;
  doc["schedule"] = std::string(to_string(cfg.schedule_mode()));
  json agents = json::array();
  for (const auto& a : cfg.agents) {
    json entry = {{"name", a.name}, {"policy", a.policy}, {"params", a.params}};
    if (a.role) entry["role"] = std::string(to_string(*a.role));
    agents.push_back(entry);
  }
  doc["agents"] = agents;
  doc["seeds"] = cfg.seeds;
  doc["master_seed"] = cfg.master_seed;
  doc["output_dir"] = cfg.output_dir.string();
  if (!cfg.prompts_dir.empty()) doc["prompts_dir"] = cfg.prompts_dir.string();
  doc["prompt_flags"] = {{"equilibrium_knowledge", cfg.prompt_flags.equilibrium_knowledge},
                         {"reflection", cfg.prompt_flags.reflection},
                         {"self_report", cfg.prompt_flags.self_report}};
  if (cfg.uses_llm()) {
    const EndpointConfig& e = cfg.endpoint;
    doc["endpoint"] = {{"base_url", e.base_url},
                       {"model", e.model},
                       {"temperature", e.temperature},
                       {"max_retries", e.max_retries},
                       {"timeout_ms", e.timeout.count()},
                       {"backoff_ms", e.backoff.count()},
                       {"token_env", e.token_env}};
  }
  return doc;
}

void validate(const RunConfig& cfg) {
  const std::size_t n = cfg.agents.size();
  if (n < 2) config_error("need at least 2 agents");
  if (cfg.horizon_length < 1) config_error("horizon length must be at least 1");
  if (!(cfg.discount > 0.0 && cfg.discount <= 1.0)) config_error("discount must lie in (0, 1]");
  if (cfg.seeds.empty()) config_error("need at least one seed");
  if (cfg.endowment < 0.0) config_error("endowment must be non-negative");

  switch (cfg.game) {
    case GameKind::Donation: DonationParams{cfg.cost, cfg.benefit, cfg.endowment}.validate(); break;
    case GameKind::IR: IRParams{cfg.cost, cfg.benefit, cfg.endowment}.validate(); break;
    case GameKind::Investment: InvestmentParams{cfg.multiplier, cfg.endowment}.validate(); break;
    case GameKind::Market: break;
  }

  std::vector<std::string> names;
  for (const auto& a : cfg.agents) names.push_back(a.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    config_error("agent names must be unique");
  }

  const ScheduleMode mode = cfg.schedule_mode();
  const bool bipartite = mode == ScheduleMode::BipartiteSingle || mode == ScheduleMode::BipartiteFull;
  auto roles_are = [&](Role first, Role second) {
    return std::all_of(cfg.agents.begin(), cfg.agents.end(), [&](const AgentSpec& a) {
      return a.role && (*a.role == first || *a.role == second);
    });
  };
  const bool any_role =
      std::any_of(cfg.agents.begin(), cfg.agents.end(), [](const AgentSpec& a) { return a.role; });
  switch (cfg.game) {
    case GameKind::Donation:
      if (mode != ScheduleMode::Donation && mode != ScheduleMode::Partition) {
        config_error("the donation game needs the donation or partition schedule");
      }
      if (any_role) config_error("donation agents take roles from the schedule");
      break;
    case GameKind::IR:
      if (bipartite) config_error("the ir game cannot use a bipartite schedule");
      if (any_role) config_error("ir agents have no fixed role");
      break;
    case GameKind::Investment:
      if (bipartite != any_role) {
        config_error("investment agents need roles exactly when the schedule is bipartite");
      }
      if (any_role && !roles_are(Role::Investor, Role::Responder)) {
        config_error("investment roles must be investor or responder, on every agent");
      }
      break;
    case GameKind::Market:
      if (!bipartite) config_error("the market needs a bipartite schedule");
      if (!roles_are(Role::Seller, Role::Buyer)) {
        config_error("every market agent needs role seller or buyer");
      }
      break;
  }

  if (cfg.monitoring == MonitoringMode::Private && cfg.protocol.enabled()) {
    config_error("private monitoring needs protocol 'disabled'");
  }
  if (cfg.prompt_flags.self_report) {
    if (!cfg.protocol.allows_self_report()) {
      config_error("self_report needs protocol 'tones_self_report'");
    }
    if (cfg.game != GameKind::Donation) config_error("self-reports exist only in the donation game");
  } else if (cfg.protocol.allows_self_report()) {
    config_error("protocol 'tones_self_report' needs prompt_flags.self_report");
  }

  for (const auto& a : cfg.agents) {
    if (a.policy == "llm") continue;
    (void)make_policy(a);  // checks the id and its params
  }
}

// --- policy registry -------------------------------------------------------------

std::unique_ptr<AgentPolicy> make_policy(const AgentSpec& spec, const LlmFactory& llm_factory) {
  const json& p = spec.params;
  const std::string where = "params of " + spec.name + " (" + spec.policy + ")";
  auto rule = [&] {
    return parse_field(parse_gossip_rule, get_or<std::string>(p, "gossip", "truthful", where),
                       "gossip");
  };
  auto scope = [&] {
    return parse_field(parse_grim_scope, get_or<std::string>(p, "scope", "per_target", where),
                       "scope");
  };
  const std::string& id = spec.policy;

  if (id == "always_cooperate" || id == "always_defect") {
    check_keys(p, {"gossip"}, where);
    return id == "always_cooperate" ? always_cooperate(rule()) : always_defect(rule());
  }
  if (id == "always_defect_silent") {
    check_keys(p, {}, where);
    return always_defect_silent();
  }
  if (id == "grim_trigger_public" || id == "grim_buyer") {
    check_keys(p, {"scope", "gossip"}, where);
    return id == "grim_buyer" ? grim_buyer(scope(), rule()) : grim_trigger_public(scope(), rule());
  }
  if (id == "liar_reporter") {
    check_keys(p, {"scope"}, where);
    return liar_reporter(scope());
  }
  if (id == "image_scorer") {
    check_keys(p, {"threshold", "gossip"}, where);
    return image_scorer(get_or(p, "threshold", 0, where), rule());
  }
  if (id == "investor_fraction") {
    check_keys(p, {"alpha", "gossip"}, where);
    if (!p.contains("alpha")) config_error(where + " needs 'alpha'");
    return fraction_investor(get_or(p, "alpha", 0.0, where), rule());
  }
  if (id == "responder_fraction") {
    check_keys(p, {"beta", "gossip"}, where);
    if (!p.contains("beta")) config_error(where + " needs 'beta'");
    return fraction_responder(get_or(p, "beta", 0.0, where), rule());
  }
  if (id == "seller_fixed") {
    check_keys(p, {"quality", "gossip"}, where);
    return fixed_seller(parse_field(parse_quality, get_or<std::string>(p, "quality", "H", where),
                                    "quality"),
                        rule());
  }
  if (id == "llm") {
    check_keys(p, {}, where);
    if (!llm_factory) throw Error(ErrorCode::Config, "no chat endpoint for llm agent " + spec.name);
    return llm_factory(spec);
  }
  config_error("unknown policy '" + id + "'");
}

// --- scheduling ---------------------------------------------------------------------

namespace {

std::uint64_t seed_key(const RunConfig& cfg, std::uint64_t seed) {
  return Rng(cfg.master_seed).derive(seed).next();
}

}  // namespace

Schedule build_schedule(const RunConfig& cfg, std::uint64_t seed) {
  const std::size_t n = cfg.agents.size();
  const int T = cfg.horizon_length;
  const std::uint64_t key = seed_key(cfg, seed);
  switch (const ScheduleMode mode = cfg.schedule_mode()) {
    case ScheduleMode::Donation: return donation_schedule(n, T, key);
    case ScheduleMode::Simultaneous: return simultaneous_schedule(n, T, key);
    case ScheduleMode::Partition: return partition_schedule(n, T, key);
    case ScheduleMode::BipartiteSingle:
    case ScheduleMode::BipartiteFull: {
      std::vector<AgentIndex> first, second;
      for (AgentIndex i = 0; i < n; ++i) {
        (cfg.agents[i].role && is_ordered_first_mover(*cfg.agents[i].role) ? first : second)
            .push_back(i);
      }
      return bipartite_schedule(first, second, T, key, mode);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schedule mode");
}

// --- log encoding -----------------------------------------------------------------

json decision_to_json(const Decision& d) {
  if (const auto* a = std::get_if<Action>(&d)) return {{"action", std::string(to_string(*a))}};
  if (const auto* m = std::get_if<Amount>(&d)) return {{"amount", m->value}};
  if (const auto* q = std::get_if<Quality>(&d)) return {{"quality", std::string(to_string(*q))}};
  return {{"purchase", std::string(to_string(std::get<Purchase>(d)))}};
}

Decision decision_from_json(const json& j) {
  if (j.contains("action")) return parse_action(j.at("action").get<std::string>());
  if (j.contains("amount")) return Amount{j.at("amount").get<double>()};
  if (j.contains("quality")) return parse_quality(j.at("quality").get<std::string>());
  if (j.contains("purchase")) return parse_purchase(j.at("purchase").get<std::string>());
  throw Error(ErrorCode::Malformed, "decision without a known key: " + j.dump());
}

json message_to_json(const GossipMessage& m) {
  json j = {{"round", m.round}, {"witness", m.witness}, {"subject", m.subject}};
  if (const auto* t = std::get_if<TonedPayload>(&m.payload)) {
    j["kind"] = "toned";
    j["tone"] = std::string(to_string(t->tone));
    j["text"] = t->text;
    if (t->claimed) j["claimed"] = std::string(to_string(*t->claimed));
  } else if (const auto* b = std::get_if<BinaryPayload>(&m.payload)) {
    j["kind"] = "binary";
    j["bit"] = b->bit;
  } else {
    const auto& s = std::get<SelfReportPayload>(m.payload);
    j["kind"] = "self_report";
    j["claimed"] = std::string(to_string(s.claimed));
    j["text"] = s.text;
  }
  if (m.ground_truth) j["ground_truth"] = std::string(to_string(*m.ground_truth));
  return j;
}

GossipMessage message_from_json(const json& j) {
  GossipMessage m;
  m.round = j.at("round").get<int>();
  m.witness = j.at("witness").get<AgentIndex>();
  m.subject = j.at("subject").get<AgentIndex>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "toned") {
    TonedPayload t;
    t.tone = parse_tone(j.at("tone").get<std::string>());
    t.text = j.at("text").get<std::string>();
    if (j.contains("claimed")) t.claimed = parse_action(j.at("claimed").get<std::string>());
    m.payload = std::move(t);
  } else if (kind == "binary") {
    m.payload = BinaryPayload{j.at("bit").get<int>()};
  } else if (kind == "self_report") {
    m.payload = SelfReportPayload{parse_action(j.at("claimed").get<std::string>()),
                                  j.at("text").get<std::string>()};
  } else {
    throw Error(ErrorCode::Malformed, "unknown message kind '" + kind + "'");
  }
  if (j.contains("ground_truth")) m.ground_truth = parse_action(j.at("ground_truth").get<std::string>());
  return m;
}

namespace {

json participant_to_json(const Participant& p) {
  return {{"agent", p.agent},
          {"role", std::string(to_string(p.role))},
          {"decision", p.decision ? decision_to_json(*p.decision) : json(nullptr)},
          {"reward", p.reward},
          {"resources_before", p.resources_before},
          {"resources_after", p.resources_after}};
}

Participant participant_from_json(const json& j) {
  Participant p;
  p.agent = j.at("agent").get<AgentIndex>();
  p.role = parse_role(j.at("role").get<std::string>());
  if (!j.at("decision").is_null()) p.decision = decision_from_json(j.at("decision"));
  p.reward = j.at("reward").get<double>();
  p.resources_before = j.at("resources_before").get<double>();
  p.resources_after = j.at("resources_after").get<double>();
  return p;
}

template <typename T>
T expect(const Decision& d, Role role) {
  if (const auto* v = std::get_if<T>(&d)) return *v;
  throw Error(ErrorCode::ActionOutOfRange,
              "wrong decision kind for role " + std::string(to_string(role)) + ": " +
                  decision_to_string(d));
}

// Stage rewards from the two logged decisions, in participant order. Shared by
// the round loop and replay so both derive rewards the same way.
RewardPair stage_rewards(const RunConfig& cfg, const InteractionRecord& rec) {
  const Participant& a = rec.participants[0];
  const Participant& b = rec.participants[1];
  switch (cfg.game) {
    case GameKind::Donation:
      return donation_payoff(expect<Action>(*a.decision, a.role),
                             {cfg.cost, cfg.benefit, cfg.endowment});
    case GameKind::IR:
      return ir_payoff(expect<Action>(*a.decision, a.role), expect<Action>(*b.decision, b.role),
                       {cfg.cost, cfg.benefit, cfg.endowment});
    case GameKind::Investment:
      return investment_step(expect<Amount>(*a.decision, a.role).value,
                             expect<Amount>(*b.decision, b.role).value, a.resources_before,
                             {cfg.multiplier, cfg.endowment});
    case GameKind::Market:
      return market_payoff(expect<Quality>(*a.decision, a.role),
                           expect<Purchase>(*b.decision, b.role), cfg.market);
  }
  return {};
}

SummaryInputs summary_inputs(const RunConfig& cfg, std::vector<double> final_resources) {
  SummaryInputs in;
  in.n_agents = cfg.agents.size();
  in.discount = cfg.discount;
  in.indexing = cfg.indexing;
  in.multiplier = cfg.multiplier;
  in.final_resources = std::move(final_resources);
  return in;
}

std::vector<std::string> roster_names(const RunConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& a : cfg.agents) names.push_back(a.name);
  return names;
}

PromptContext prompt_context(const RunConfig& cfg) {
  PromptContext ctx;
  ctx.game = cfg.game;
  ctx.horizon = cfg.horizon_type;
  ctx.horizon_length = cfg.horizon_length;
  ctx.discount = cfg.discount;
  ctx.endowment = cfg.endowment;
  ctx.cost = cfg.cost;
  ctx.benefit = cfg.benefit;
  ctx.multiplier = cfg.multiplier;
  ctx.market = cfg.market;
  ctx.protocol = cfg.protocol;
  ctx.monitoring = cfg.monitoring;
  ctx.eq_knowledge = cfg.prompt_flags.equilibrium_knowledge;
  return ctx;
}

std::string payload_summary(const Payload& p) {
  if (const auto* t = std::get_if<TonedPayload>(&p)) {
    return "[" + std::string(to_string(t->tone)) + "] " + t->text;
  }
  if (const auto* b = std::get_if<BinaryPayload>(&p)) return "[signal " + std::to_string(b->bit) + "]";
  const auto& s = std::get<SelfReportPayload>(p);
  return "[self-report " + std::string(to_string(s.claimed)) + "] " + s.text;
}

// --- the round loop ---------------------------------------------------------------

class SeedLoop {
 public:
  SeedLoop(const RunConfig& cfg, std::uint64_t seed, const RunOptions& options,
           const std::function<void(const json&)>& emit)
      : cfg_(cfg),
        seed_(seed),
        emit_(emit),
        names_(std::make_shared<std::vector<std::string>>(roster_names(cfg))),
        ledger_(cfg.agents.size(), cfg.endowment) {
    const std::size_t n = cfg.agents.size();
    env_.resources = ledger_.balances();
    for (AgentIndex i = 0; i < n; ++i) env_.memories.emplace_back(i);

    LlmFactory factory;
    if (cfg.uses_llm()) {
      const auto dir = cfg.prompts_dir.empty() ? std::filesystem::path(GOSSIP_PROMPTS_DIR)
                                               : cfg.prompts_dir;
      auto templates = std::make_shared<const TemplateSet>(TemplateSet::load(dir));
      std::shared_ptr<ChatEndpoint> endpoint = options.endpoint_override;
      if (!endpoint) endpoint = std::make_shared<HttpChatEndpoint>(cfg.endpoint);
      const PromptContext ctx = prompt_context(cfg);
      factory = [this, templates, endpoint, ctx](const AgentSpec&) {
        return std::make_unique<LlmAgent>(endpoint, templates, ctx,
                                          [this](const TranscriptEntry& t) { transcript(t); });
      };
    }
    for (const auto& spec : cfg.agents) policies_.push_back(make_policy(spec, factory));
  }

  SeedResult run() {
    const Schedule schedule = build_schedule(cfg_, seed_);
    json policies = json::array();
    for (const auto& a : cfg_.agents) policies.push_back(a.policy);
    emit({{"event", "seed_start"},
          {"names", *names_},
          {"policies", policies},
          {"schedule", serialize(schedule)}});

    for (int t = 1; t <= cfg_.horizon_length; ++t) {
      env_.round = t;
      // Every pair of round t observes the world as it stood when the round began.
      view_env_ = env_;
      view_pool_ = pool_;
      for (const Pairing& pair : schedule.rounds[static_cast<std::size_t>(t - 1)].pairs) {
        play_pair(t, pair);
      }
    }

    SeedResult out;
    out.seed = seed_;
    out.records = env_.history;
    out.messages = pool_.messages();
    out.final_resources = ledger_.balances();
    out.summary = summarize(out.records, out.messages, summary_inputs(cfg_, out.final_resources));
    out.transcripts = std::move(transcripts_);
    emit({{"event", "seed_end"},
          {"summary", summary_fields(out.summary)},
          {"final_resources", out.final_resources}});
    return out;
  }

 private:
  struct Side {
    AgentIndex agent = 0;
    Role role = Role::Player;
    Observation obs;
    std::optional<ActReply> reply;
    std::string reflection;
  };

  void emit(json event) {
    event["seed"] = seed_;
    event["seq"] = seq_++;
    if (emit_) emit_(event);
  }

  void transcript(const TranscriptEntry& t) {
    transcripts_.push_back({{"seed", seed_},
                            {"agent", t.agent},
                            {"round", t.round},
                            {"kind", t.kind},
                            {"attempt", t.attempt},
                            {"system", t.system},
                            {"user", t.user},
                            {"response", t.response},
                            {"error", t.error}});
  }

  void observe(Side& s, AgentIndex partner) {
    s.obs = visible_observation(s.agent, view_env_, view_pool_, cfg_.monitoring);
    s.obs.own_resources = ledger_.balance(s.agent);
    s.obs.role = s.role;
    s.obs.partner = partner;
    s.obs.partner_resources = ledger_.balance(partner);
    s.obs.names = names_;
    emit({{"event", "observe"},
          {"round", s.obs.round},
          {"agent", s.agent},
          {"role", std::string(to_string(s.role))},
          {"partner", partner}});
  }

  void act(Side& s) {
    s.reply = policies_[s.agent]->act(s.obs);
    emit({{"event", "act"},
          {"round", s.obs.round},
          {"agent", s.agent},
          {"role", std::string(to_string(s.role))},
          {"decision", decision_to_json(s.reply->decision)},
          {"justification", s.reply->justification}});
  }

  std::string reflection_for(AgentIndex agent, const Observation& obs, const std::string& fallback) {
    if (!cfg_.prompt_flags.reflection) return {};
    std::string r = policies_[agent]->reflect(obs);
    return r.empty() ? fallback : r;
  }

  void play_pair(int t, const Pairing& pair) {
    Side a{pair.first, Role::Player, {}, {}, {}};
    Side b{pair.second, Role::Player, {}, {}, {}};
    switch (cfg_.game) {
      case GameKind::Donation: a.role = Role::Donor; b.role = Role::Recipient; break;
      case GameKind::IR: break;
      case GameKind::Investment: a.role = Role::Investor; b.role = Role::Responder; break;
      case GameKind::Market: a.role = Role::Seller; b.role = Role::Buyer; break;
    }

    // Observe and act. The second mover of the investment game sees the
    // investment; every other second side decides without seeing the first.
    observe(a, b.agent);
    act(a);
    observe(b, a.agent);
    if (cfg_.game == GameKind::Investment) {
      const double invested = expect<Amount>(a.reply->decision, a.role).value;
      b.obs.received_investment = invested;
      b.obs.received_transfer = cfg_.multiplier * invested;
    }
    if (b.role != Role::Recipient) act(b);

    InteractionRecord rec;
    rec.round = t;
    rec.participants[0] = {a.agent, a.role, a.reply->decision, 0.0, ledger_.balance(a.agent), 0.0};
    rec.participants[1] = {b.agent, b.role,
                           b.reply ? std::optional<Decision>(b.reply->decision) : std::nullopt,
                           0.0, ledger_.balance(b.agent), 0.0};
    // Rewards are a pure function of the decisions; they are computed here so
    // witnesses can see them, and credited in the step phase below.
    const RewardPair rewards = stage_rewards(cfg_, rec);
    rec.participants[0].reward = rewards.first;
    rec.participants[1].reward = rewards.second;

    a.reflection = reflection_for(a.agent, a.obs, a.reply->justification);

    // Gossip: who reports on whom.
    std::vector<GossipMessage> pending;
    std::vector<std::pair<Side*, Side*>> reports;  // (witness, subject)
    switch (cfg_.game) {
      case GameKind::Donation: reports = {{&b, &a}}; break;
      case GameKind::IR:
      case GameKind::Investment: reports = {{&a, &b}, {&b, &a}}; break;
      case GameKind::Market: reports = {{&b, &a}}; break;
    }
    if (cfg_.protocol.enabled()) {
      for (auto [witness, subject] : reports) {
        const Participant& sp = rec.participants[subject == &a ? 0 : 1];
        const Participant& wp = rec.participants[witness == &a ? 0 : 1];
        std::optional<double> invested;
        if (subject->role == Role::Responder) invested = expect<Amount>(a.reply->decision, a.role).value;
        GossipContext ctx;
        ctx.subject = subject->agent;
        ctx.subject_role = subject->role;
        ctx.observed = *sp.decision;
        ctx.reading = cooperative_reading(subject->role, *sp.decision, invested);
        ctx.own_decision = wp.decision;
        ctx.own_reward = wp.reward;
        ctx.subject_reward = sp.reward;
        ctx.protocol = &cfg_.protocol;
        auto reply = policies_[witness->agent]->gossip(witness->obs, ctx);
        if (!reply) continue;
        GossipMessage msg{t, witness->agent, subject->agent, reply->payload, ctx.reading, {}};
        emit({{"event", "gossip"},
              {"round", t},
              {"kind", "witness"},
              {"message", message_to_json(msg)},
              {"justification", reply->justification}});
        pending.push_back(std::move(msg));
      }
      if (cfg_.prompt_flags.self_report && cfg_.game == GameKind::Donation) {
        const Action own = expect<Action>(a.reply->decision, a.role);
        auto reply = policies_[a.agent]->self_report(a.obs, own, cfg_.protocol);
        if (reply) {
          GossipMessage msg{t, a.agent, a.agent, reply->payload, own, {}};
          emit({{"event", "gossip"},
                {"round", t},
                {"kind", "self_report"},
                {"message", message_to_json(msg)},
                {"justification", reply->justification}});
          pending.push_back(std::move(msg));
        }
      }
    }
    b.reflection = reflection_for(b.agent, b.obs, b.reply ? b.reply->justification : "");

    // Step: credit the ledger.
    for (auto& p : rec.participants) {
      ledger_.credit(p.agent, p.reward);
      p.resources_after = ledger_.balance(p.agent);
    }
    env_.resources = ledger_.balances();
    env_.history.push_back(rec);
    emit({{"event", "step"},
          {"round", t},
          {"participants",
           {participant_to_json(rec.participants[0]), participant_to_json(rec.participants[1])}}});

    // Publish.
    std::string about_a, about_b;
    const ValenceScale scale = cfg_.graded_valence ? ValenceScale::Graded : ValenceScale::Sign;
    for (auto& msg : pending) {
      const PublishOutcome outcome = validate_and_publish(pool_, msg, cfg_.protocol);
      const GossipMessage& stored = pool_.messages().back();
      json event = {{"event", "publish"},
                    {"round", t},
                    {"index", pool_.size() - 1},
                    {"message", message_to_json(stored)},
                    {"truncated", outcome.truncated}};
      if (const auto* toned = std::get_if<TonedPayload>(&stored.payload)) {
        event["valence"] = tone_valence(toned->tone, scale);
      }
      emit(event);
      std::string& slot = stored.subject == a.agent ? about_a : about_b;
      if (!slot.empty()) slot += " | ";
      slot += (*names_)[stored.witness] + " about " + (*names_)[stored.subject] + ": " +
              payload_summary(stored.payload);
    }

    // Memory.
    std::string all_messages = about_a;
    if (!about_b.empty()) all_messages += (all_messages.empty() ? "" : " | ") + about_b;
    for (Side* s : {&a, &b}) {
      const Side& other = s == &a ? b : a;
      const Participant& p = rec.participants[s == &a ? 0 : 1];
      MemoryEntry entry;
      entry.round = t;
      entry.observation = std::string(to_string(s->role)) + " paired with " + (*names_)[other.agent];
      if (other.reply) {
        entry.observation += ", who chose " + decision_to_string(other.reply->decision);
      }
      entry.own_action = s->reply ? decision_to_string(s->reply->decision) : "";
      entry.message = all_messages;
      entry.reward = p.reward;
      entry.reflection = s->reflection;
      env_.memories[s->agent].append(entry);
      emit({{"event", "memory"}, {"round", t}, {"agent", s->agent}});
    }
  }

  const RunConfig& cfg_;
  std::uint64_t seed_;
  const std::function<void(const json&)>& emit_;
  std::shared_ptr<std::vector<std::string>> names_;
  std::vector<std::unique_ptr<AgentPolicy>> policies_;
  ResourceLedger ledger_;
  EnvState env_;
  PublicPool pool_;
  EnvState view_env_;
  PublicPool view_pool_;
  std::vector<json> transcripts_;
  long long seq_ = 0;
};

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  out << text;
}

}  // namespace

SeedResult run_seed(const RunConfig& cfg, std::uint64_t seed, const RunOptions& options,
                    const std::function<void(const json&)>& emit) {
  validate(cfg);
  SeedLoop loop(cfg, seed, options, emit);
  return loop.run();
}

RunArtifacts run_experiment(const RunConfig& cfg, const RunOptions& options) {
  validate(cfg);
  RunArtifacts art;
  const auto& dir = cfg.output_dir;
  art.event_log = dir / "events.jsonl";
  art.summary_csv = dir / "summary.csv";
  art.agents_csv = dir / "agents.csv";
  art.config_snapshot = dir / "config.json";

  std::ofstream log;
  if (options.write_files) {
    std::filesystem::create_directories(dir);
    log.open(art.event_log, std::ios::binary | std::ios::trunc);
    if (!log) throw Error(ErrorCode::Io, "cannot write " + art.event_log.string());
  }
  auto write = [&](const json& event) {
    if (options.write_files) log << event.dump() << '\n';
  };

  const json snapshot = config_to_json(cfg);
  write({{"event", "run_start"}, {"schema_version", kEventSchemaVersion}, {"config", snapshot}});
  try {
    for (std::uint64_t seed : cfg.seeds) {
      art.seeds.push_back(run_seed(cfg, seed, options, write));
    }
  } catch (const std::exception& e) {
    json aborted = {{"event", "run_aborted"}, {"error", e.what()}};
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
      aborted["code"] = std::string(to_string(err->code()));
    }
    write(aborted);
    throw;
  }
  write({{"event", "run_end"}, {"seeds", cfg.seeds}});

  if (!options.write_files) return art;
  log.close();

  std::vector<MetricsSummary> summaries;
  for (const auto& s : art.seeds) summaries.push_back(s.summary);
  const auto names = roster_names(cfg);
  write_text(art.summary_csv, summary_csv(cfg.experiment, cfg.seeds, summaries));
  write_text(art.agents_csv, agents_csv(cfg.experiment, cfg.seeds, summaries, names));
  write_text(art.config_snapshot, snapshot.dump(2) + "\n");
  if (cfg.uses_llm()) {
    art.transcripts = dir / "transcripts.jsonl";
    std::string text;
    for (const auto& s : art.seeds) {
      for (const auto& t : s.transcripts) text += t.dump() + "\n";
    }
    write_text(*art.transcripts, text);
  }
  return art;
}

// --- replay ---------------------------------------------------------------------------

ReplayResult replay_lines(const std::vector<std::string>& lines) {
  std::vector<json> events;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      events.push_back(json::parse(lines[i]));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ReplayIncomplete,
                  "line " + std::to_string(i + 1) + " is not valid JSON: " + e.what());
    }
  }
  if (events.empty() || events.front().value("event", "") != "run_start") {
    throw Error(ErrorCode::ReplayIncomplete, "log does not begin with run_start");
  }
  if (events.front().value("schema_version", 0) != kEventSchemaVersion) {
    throw Error(ErrorCode::SchemaViolation, "unsupported event schema version");
  }
  if (events.back().value("event", "") != "run_end") {
    throw Error(ErrorCode::ReplayIncomplete, "log has no run_end event (run aborted or truncated)");
  }

  ReplayResult out;
  out.config = events.front().at("config");
  const RunConfig cfg = parse_config(out.config);
  const std::size_t n = cfg.agents.size();

  auto mismatch = [](const std::string& what) { throw Error(ErrorCode::ReplayMismatch, what); };

  std::optional<SeedResult> current;
  std::vector<double> balances;
  for (std::size_t k = 1; k + 1 < events.size(); ++k) {
    const json& ev = events[k];
    const std::string kind = ev.value("event", "");
    if (kind == "seed_start") {
      if (current) mismatch("seed_start inside an open seed");
      current.emplace();
      current->seed = ev.at("seed").get<std::uint64_t>();
      balances.assign(n, cfg.endowment);
    } else if (kind == "step") {
      if (!current) mismatch("step outside a seed");
      InteractionRecord rec;
      rec.round = ev.at("round").get<int>();
      const json& ps = ev.at("participants");
      rec.participants[0] = participant_from_json(ps.at(0));
      rec.participants[1] = participant_from_json(ps.at(1));
      const RewardPair expected = stage_rewards(cfg, rec);
      const std::array<double, 2> want = {expected.first, expected.second};
      for (std::size_t s = 0; s < 2; ++s) {
        Participant& p = rec.participants[s];
        const std::string where = "round " + std::to_string(rec.round) + ", agent " +
                                  std::to_string(p.agent);
        if (p.agent >= n) mismatch(where + ": unknown agent");
        if (p.reward != want[s]) {
          mismatch(where + ": logged reward " + format_double(p.reward) + " but the decisions give " +
                   format_double(want[s]));
        }
        if (p.resources_before != balances[p.agent]) mismatch(where + ": resources_before");
        balances[p.agent] += p.reward;
        if (p.resources_after != balances[p.agent]) mismatch(where + ": resources_after");
      }
      current->records.push_back(rec);
    } else if (kind == "publish") {
      if (!current) mismatch("publish outside a seed");
      current->messages.push_back(message_from_json(ev.at("message")));
    } else if (kind == "seed_end") {
      if (!current) mismatch("seed_end without seed_start");
      current->final_resources = balances;
      current->summary =
          summarize(current->records, current->messages, summary_inputs(cfg, balances));
      const auto fields = summary_fields(current->summary);
      if (ev.at("summary").get<std::vector<std::string>>() != fields) {
        mismatch("seed " + std::to_string(current->seed) + ": recomputed summary differs from the log");
      }
      out.seeds.push_back(std::move(*current));
      current.reset();
    } else if (kind == "run_aborted") {
      throw Error(ErrorCode::ReplayIncomplete, "run was aborted: " + ev.value("error", ""));
    }
  }
  if (current) throw Error(ErrorCode::ReplayIncomplete, "seed without seed_end");

  std::vector<std::uint64_t> seeds;
  std::vector<MetricsSummary> summaries;
  for (const auto& s : out.seeds) {
    seeds.push_back(s.seed);
    summaries.push_back(s.summary);
  }
  const auto names = roster_names(cfg);
  out.summary_csv = summary_csv(cfg.experiment, seeds, summaries);
  out.agents_csv = agents_csv(cfg.experiment, seeds, summaries, names);
  return out;
}

ReplayResult replay(const std::filesystem::path& event_log) {
  std::ifstream in(event_log, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + event_log.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return replay_lines(lines);
}

}  // namespace gossip
