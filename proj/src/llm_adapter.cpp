#include "gossip/llm_adapter.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gossip/metrics.hpp"

namespace gossip {

using nlohmann::json;

// --- templates ------------------------------------------------------------------

bool TemplateFlags::get(std::string_view name) const {
  if (name == "gossip") return gossip;
  if (name == "eq_knowledge") return eq_knowledge;
  if (name == "infinite") return infinite;
  if (name == "finite") return !infinite;
  if (name == "binary") return binary;
  if (name == "convention") return convention;
  throw Error(ErrorCode::InvalidArgument, "unknown template flag '" + std::string(name) + "'");
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::set<std::string> scan_vars(std::string_view body) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '$' || i + 1 >= body.size() || !ident_start(body[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < body.size() && ident_char(body[j])) ++j;
    out.emplace(body.substr(i + 1, j - i - 1));
    i = j - 1;
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string select_blocks(std::string_view body, const TemplateFlags& flags) {
  struct Frame {
    bool parent_on;
    bool cond;
    bool in_else;
  };
  std::vector<Frame> stack;
  bool on = true;
  std::string out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t eol = body.find('\n', pos);
    const bool has_nl = eol != std::string_view::npos;
    if (!has_nl) eol = body.size();
    const std::string_view line = body.substr(pos, eol - pos);
    const std::string_view t = trim(line);
    pos = has_nl ? eol + 1 : eol;

    if (t.starts_with("{{if ") && t.ends_with("}}")) {
      std::string_view name = trim(t.substr(5, t.size() - 7));
      bool negate = false;
      if (name.starts_with('!')) {
        negate = true;
        name.remove_prefix(1);
      }
      const bool cond = flags.get(name) != negate;
      stack.push_back({on, cond, false});
      on = on && cond;
      continue;
    }
    if (t == "{{else}}") {
      if (stack.empty() || stack.back().in_else) {
        throw Error(ErrorCode::InvalidArgument, "template: stray {{else}}");
      }
      stack.back().in_else = true;
      on = stack.back().parent_on && !stack.back().cond;
      continue;
    }
    if (t == "{{end}}") {
      if (stack.empty()) throw Error(ErrorCode::InvalidArgument, "template: stray {{end}}");
      on = stack.back().parent_on;
      stack.pop_back();
      continue;
    }
    if (on) {
      out += line;
      if (has_nl) out += '\n';
    }
  }
  if (!stack.empty()) throw Error(ErrorCode::InvalidArgument, "template: unterminated {{if}}");
  return out;
}

std::string substitute(std::string_view text, const VarMap& vars) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$' || i + 1 >= text.size() || !ident_start(text[i + 1])) {
      out += text[i];
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && ident_char(text[j])) ++j;
    const std::string_view name = text.substr(i + 1, j - i - 1);
    const auto it = vars.find(name);
    if (it == vars.end()) {
      throw Error(ErrorCode::MissingVariable, "unbound template variable $" + std::string(name));
    }
    out += it->second;
    i = j - 1;
  }
  return out;
}

PromptTemplate::PromptTemplate(std::string id, std::string body, PromptCategory category)
    : id_(std::move(id)), body_(std::move(body)), category_(category), required_(scan_vars(body_)) {}

PromptTemplate PromptTemplate::load(const std::filesystem::path& file, PromptCategory category) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read template " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return PromptTemplate(file.stem().string(), ss.str(), category);
}

std::string PromptTemplate::render(const VarMap& vars, const TemplateFlags& flags) const {
  std::string text = select_blocks(body_, flags);
  replace_all(text, "[HORIZON-TYPE]", flags.infinite ? "infinite" : "finite");
  try {
    return substitute(text, vars);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " in template " + id_);
  }
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  TemplateSet set;
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::Io, "template directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    const std::string stem = entry.path().stem().string();
    PromptCategory cat = PromptCategory::Action;
    if (stem.ends_with("_rule")) {
      cat = PromptCategory::Rule;
    } else if (stem.find("gossip") != std::string::npos || stem.ends_with("self_report")) {
      cat = PromptCategory::Gossip;
    }
    set.templates_.emplace(stem, PromptTemplate::load(entry.path(), cat));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(const std::string& id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::Config, "missing prompt template '" + id + "'");
  return it->second;
}

std::string rule_template_id(GameKind game) { return std::string(to_string(game)) + "_rule"; }

std::string action_template_id(GameKind game, Role role) {
  switch (game) {
    case GameKind::Donation:
      if (role == Role::Donor) return "donation_action";
      break;
    case GameKind::IR:
      if (role == Role::Player) return "ir_action";
      break;
    case GameKind::Investment:
      if (role == Role::Investor) return "investment_investor_action";
      if (role == Role::Responder) return "investment_responder_action";
      break;
    case GameKind::Market:
      if (role == Role::Seller) return "market_seller_action";
      if (role == Role::Buyer) return "market_buyer_action";
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "no action prompt for role " +
                                              std::string(to_string(role)) + " in " +
                                              std::string(to_string(game)));
}

std::string gossip_template_id(GameKind game, Role witness_role) {
  switch (game) {
    case GameKind::Donation:
      if (witness_role == Role::Recipient) return "donation_gossip";
      break;
    case GameKind::IR:
      if (witness_role == Role::Player) return "ir_gossip";
      break;
    case GameKind::Investment:
      if (witness_role == Role::Investor) return "investment_investor_gossip";
      if (witness_role == Role::Responder) return "investment_responder_gossip";
      break;
    case GameKind::Market:
      if (witness_role == Role::Buyer) return "market_buyer_gossip";
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "no gossip prompt for role " +
                                              std::string(to_string(witness_role)) + " in " +
                                              std::string(to_string(game)));
}

// --- parsing ----------------------------------------------------------------------

std::string_view to_string(Schema s) {
  switch (s) {
    case Schema::DonorAction: return "donor_action";
    case Schema::PlayerAction: return "player_action";
    case Schema::InvestorAction: return "investor_action";
    case Schema::ResponderAction: return "responder_action";
    case Schema::SellerAction: return "seller_action";
    case Schema::BuyerAction: return "buyer_action";
    case Schema::ToneGossip: return "tone_gossip";
    case Schema::BinaryGossip: return "binary_gossip";
    case Schema::SelfReport: return "self_report";
  }
  return "?";
}

Schema action_schema(Role role) {
  switch (role) {
    case Role::Donor: return Schema::DonorAction;
    case Role::Player: return Schema::PlayerAction;
    case Role::Investor: return Schema::InvestorAction;
    case Role::Responder: return Schema::ResponderAction;
    case Role::Seller: return Schema::SellerAction;
    case Role::Buyer: return Schema::BuyerAction;
    case Role::Recipient: break;
  }
  throw Error(ErrorCode::InvalidArgument, "recipients do not act");
}

std::string extract_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        const std::string candidate(text.substr(start, i - start + 1));
        const json parsed = json::parse(candidate, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return candidate;
        break;
      }
    }
  }
  throw Error(ErrorCode::Malformed, "reply contains no JSON object");
}

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, what);
}

const json& require(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) violation(std::string("missing key \"") + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) violation(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::string require_enum(const json& obj, const char* key,
                         std::initializer_list<std::string_view> allowed) {
  const std::string v = lower(trim(require_string(obj, key)));
  for (auto a : allowed) {
    if (v == a) return v;
  }
  violation(std::string("\"") + key + "\" has value outside its domain");
}

double require_amount(const json& obj, const char* key, std::optional<double> upper) {
  const json& v = require(obj, key);
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    const std::string s(trim(v.get<std::string>()));
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      violation(std::string("\"") + key + "\" is not a number");
    }
  } else {
    violation(std::string("\"") + key + "\" is not a number");
  }
  if (!std::isfinite(x)) violation(std::string("\"") + key + "\" is not finite");
  if (x < 0.0 || (upper && x > *upper)) {
    throw Error(ErrorCode::OutOfRange, std::string("\"") + key + "\" = " + format_double(x) +
                                           " outside [0, " +
                                           (upper ? format_double(*upper) : "inf") + "]");
  }
  return x;
}

}  // namespace

ParsedDecision parse_decision(std::string_view text, Schema schema, std::optional<double> upper) {
  const json obj = json::parse(extract_json_object(text));
  ParsedDecision out;
  out.justification = require_string(obj, "justification");
  switch (schema) {
    case Schema::DonorAction:
      out.decision = parse_action(require_enum(obj, "donor_action", {"cooperate", "defect"}));
      break;
    case Schema::PlayerAction:
      out.decision = require_enum(obj, "player_action", {"c", "d"}) == "c" ? Action::Cooperate
                                                                           : Action::Defect;
      break;
    case Schema::InvestorAction:
      out.decision = Amount{require_amount(obj, "investor_action", upper)};
      break;
    case Schema::ResponderAction:
      out.decision = Amount{require_amount(obj, "responder_action", upper)};
      break;
    case Schema::SellerAction:
      out.decision = require_enum(obj, "seller_action", {"h", "l"}) == "h" ? Quality::High
                                                                           : Quality::Low;
      break;
    case Schema::BuyerAction:
      out.decision = parse_purchase(require_enum(obj, "buyer_action", {"c", "s", "none"}));
      break;
    case Schema::ToneGossip: {
      const std::string tone = require_enum(
          obj, "tone", {"praising", "neutral", "mocking", "complaint", "criticism"});
      out.payload = TonedPayload{parse_tone(tone), require_string(obj, "gossip"), std::nullopt};
      break;
    }
    case Schema::BinaryGossip: {
      const json& v = require(obj, "signal");
      int bit = -1;
      if (v.is_number_integer()) {
        bit = v.get<int>();
      } else if (v.is_string()) {
        const auto s = trim(v.get<std::string>());
        if (s == "1") bit = 1;
        if (s == "0") bit = 0;
      }
      if (bit != 0 && bit != 1) violation("\"signal\" must be 1 or 0");
      out.payload = BinaryPayload{bit};
      break;
    }
    case Schema::SelfReport: {
      const Action claim =
          parse_action(require_enum(obj, "claimed_action", {"cooperate", "defect"}));
      out.payload = SelfReportPayload{claim, require_string(obj, "message")};
      break;
    }
  }
  return out;
}

std::string serialize_decision(const ParsedDecision& d, Schema schema) {
  json obj;
  obj["justification"] = d.justification;
  switch (schema) {
    case Schema::DonorAction:
      obj["donor_action"] = std::string(to_string(std::get<Action>(*d.decision)));
      break;
    case Schema::PlayerAction:
      obj["player_action"] = std::get<Action>(*d.decision) == Action::Cooperate ? "C" : "D";
      break;
    case Schema::InvestorAction:
      obj["investor_action"] = std::get<Amount>(*d.decision).value;
      break;
    case Schema::ResponderAction:
      obj["responder_action"] = std::get<Amount>(*d.decision).value;
      break;
    case Schema::SellerAction:
      obj["seller_action"] = std::string(to_string(std::get<Quality>(*d.decision)));
      break;
    case Schema::BuyerAction:
      obj["buyer_action"] = std::string(to_string(std::get<Purchase>(*d.decision)));
      break;
    case Schema::ToneGossip: {
      const auto& t = std::get<TonedPayload>(*d.payload);
      obj["tone"] = std::string(to_string(t.tone));
      obj["gossip"] = t.text;
      break;
    }
    case Schema::BinaryGossip:
      obj["signal"] = std::to_string(std::get<BinaryPayload>(*d.payload).bit);
      break;
    case Schema::SelfReport: {
      const auto& r = std::get<SelfReportPayload>(*d.payload);
      obj["claimed_action"] = std::string(to_string(r.claimed));
      obj["message"] = r.text;
      break;
    }
  }
  return obj.dump();
}

// --- transport ----------------------------------------------------------------------

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.max_retries < 0) throw Error(ErrorCode::Config, "max_retries must be >= 0");
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "bad endpoint url " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

std::string HttpChatEndpoint::complete(const std::string& system, const std::string& user) {
  std::string token;
  if (!cfg_.token_env.empty()) {
    const char* v = std::getenv(cfg_.token_env.c_str());
    if (v == nullptr || *v == '\0') {
      throw Error(ErrorCode::AuthMissing, "environment variable " + cfg_.token_env + " is not set");
    }
    token = v;
  }
  const SplitUrl url = split_url(cfg_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.origin.starts_with("https://")) {
    throw Error(ErrorCode::Transport, "https endpoints need a build with TLS support");
  }
#endif

  httplib::Client cli(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  const json body = {{"model", cfg_.model},
                     {"temperature", cfg_.temperature},
                     {"messages",
                      json::array({{{"role", "system"}, {"content", system}},
                                   {{"role", "user"}, {"content", user}}})}};
  const std::string payload = body.dump();
  const std::string path = url.prefix + "/chat/completions";

  std::string last_error;
  bool last_was_timeout = false;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(cfg_.backoff * (1 << (attempt - 1)));
    const auto started = std::chrono::steady_clock::now();
    auto res = cli.Post(path, headers, payload, "application/json");
    if (!res) {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      last_was_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                         ((res.error() == httplib::Error::Read ||
                           res.error() == httplib::Error::Write) &&
                          elapsed >= cfg_.timeout);
      last_error = httplib::to_string(res.error());
      continue;
    }
    last_was_timeout = false;
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::Transport, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty()) {
      throw Error(ErrorCode::Malformed, "endpoint reply is not a chat completion");
    }
    const json& msg = reply["choices"][0]["message"];
    if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string()) {
      throw Error(ErrorCode::Malformed, "endpoint reply carries no message content");
    }
    return msg["content"].get<std::string>();
  }
  const std::string summary = "request failed after " + std::to_string(cfg_.max_retries + 1) +
                              " attempts: " + last_error;
  throw Error(last_was_timeout ? ErrorCode::Timeout : ErrorCode::Transport, summary);
}

// --- agent ----------------------------------------------------------------------------

namespace {

std::string num(double v) { return format_double(v); }

std::string ratio(double part, double whole) {
  if (!(whole > 0.0)) return "0%";
  return num(std::round(part / whole * 10000.0) / 100.0) + "%";
}

std::string payload_text(const Payload& p) {
  if (const auto* t = std::get_if<TonedPayload>(&p)) {
    return "[" + std::string(to_string(t->tone)) + "] " + t->text;
  }
  if (const auto* b = std::get_if<BinaryPayload>(&p)) return "[signal " + std::to_string(b->bit) + "]";
  const auto& r = std::get<SelfReportPayload>(p);
  return "[self-report: " + std::string(to_string(r.claimed)) + "] " + r.text;
}

}  // namespace

std::string render_memory(const std::vector<MemoryEntry>& memory, std::size_t window) {
  if (memory.empty()) return "(none)";
  const std::size_t first = memory.size() > window ? memory.size() - window : 0;
  std::string out;
  for (std::size_t i = first; i < memory.size(); ++i) {
    const auto& e = memory[i];
    out += "\n- Round " + std::to_string(e.round) + ": " + e.observation;
    if (!e.own_action.empty()) out += " | your action: " + e.own_action;
    if (!e.message.empty()) out += " | message: " + e.message;
    out += " | reward: " + num(e.reward);
    if (!e.reflection.empty()) out += " | reflection: " + e.reflection;
  }
  return out;
}

std::string render_messages(const Observation& obs) {
  if (obs.messages.empty()) return "(none)";
  std::string out;
  for (const auto& m : obs.messages) {
    out += "\n- Round " + std::to_string(m.round) + ", " + obs.name_of(m.witness) + " about " +
           obs.name_of(m.subject) + ": " + payload_text(m.payload);
  }
  return out;
}

LlmAgent::LlmAgent(std::shared_ptr<ChatEndpoint> endpoint,
                   std::shared_ptr<const TemplateSet> templates, PromptContext ctx,
                   TranscriptSink sink)
    : endpoint_(std::move(endpoint)),
      templates_(std::move(templates)),
      ctx_(std::move(ctx)),
      sink_(std::move(sink)) {
  if (!endpoint_ || !templates_) throw Error(ErrorCode::Config, "llm agent needs an endpoint and templates");
}

TemplateFlags LlmAgent::flags() const {
  TemplateFlags f;
  f.gossip = ctx_.protocol.enabled() && ctx_.monitoring == MonitoringMode::GossipPublic;
  f.eq_knowledge = ctx_.eq_knowledge;
  f.infinite = ctx_.horizon == HorizonType::InfiniteTruncated;
  f.binary = ctx_.protocol.uses_bits();
  f.convention = ctx_.protocol.variant == ProtocolVariant::BinaryWithConvention;
  return f;
}

VarMap LlmAgent::common_vars(const Observation& obs) const {
  VarMap v;
  v["discount_factor"] = num(ctx_.discount);
  v["horizon_length"] = std::to_string(ctx_.horizon_length);
  v["initial_resources"] = num(ctx_.endowment);
  v["cost"] = num(ctx_.cost);
  v["benefit"] = num(ctx_.benefit);
  v["investment_multiplier"] = num(ctx_.multiplier);
  v["convention"] = ctx_.protocol.convention();
  v["stm"] = render_memory(obs.memory, ctx_.memory_window);
  v["historical_messages"] = render_messages(obs);
  const auto table = product_choice_matrix(ctx_.market);
  const char* q[] = {"H", "L"};
  const char* p[] = {"c", "s"};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const std::string cell = std::string(q[i]) + p[j];
      v["seller_" + cell + "_reward"] = num(table[i][j].first);
      v["buyer_" + cell + "_reward"] = num(table[i][j].second);
    }
  }
  return v;
}

ParsedDecision LlmAgent::ask(const Observation& obs, const std::string& kind,
                             const std::string& template_id, const VarMap& vars, Schema schema,
                             std::optional<double> upper) {
  const TemplateFlags f = flags();
  const std::string system = templates_->get(rule_template_id(ctx_.game)).render(vars, f);
  std::string user = templates_->get(template_id).render(vars, f);

  std::optional<Error> last;
  for (int attempt = 0; attempt <= kReplyRetryBudget; ++attempt) {
    const std::string reply = endpoint_->complete(system, user);
    TranscriptEntry entry{obs.name_of(obs.self), obs.round, kind, attempt, system, user, reply, {}};
    try {
      ParsedDecision d = parse_decision(reply, schema, upper);
      if (sink_) sink_(entry);
      return d;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Malformed && e.code() != ErrorCode::SchemaViolation &&
          e.code() != ErrorCode::OutOfRange) {
        throw;
      }
      entry.error = std::string(to_string(e.code())) + ": " + e.what();
      if (sink_) sink_(entry);
      last = e;
      user += "\n\nYour previous reply was rejected (" + entry.error +
              "). Reply again with JSON only, in exactly the required format.";
    }
  }
  throw Error(last->code(), "reply rejected after " + std::to_string(kReplyRetryBudget + 1) +
                                " attempts: " + last->what());
}

ActReply LlmAgent::act(const Observation& obs) {
  VarMap v = common_vars(obs);
  const std::string self = obs.name_of(obs.self);
  const std::string partner = obs.partner ? obs.name_of(*obs.partner) : std::string();
  const std::string own = num(obs.own_resources);
  const std::string other = num(obs.partner_resources.value_or(0.0));
  std::optional<double> upper;
  switch (obs.role) {
    case Role::Donor:
      v["donor_name"] = self;
      v["recipient_name"] = partner;
      v["donor_resources"] = own;
      v["recipient_resources"] = other;
      break;
    case Role::Player:
      v["player_name"] = self;
      v["opponent_name"] = partner;
      break;
    case Role::Investor:
      v["investor_name"] = self;
      v["responder_name"] = partner;
      v["investor_resources"] = own;
      v["responder_resources"] = other;
      upper = std::max(obs.own_resources, 0.0);
      break;
    case Role::Responder: {
      const double invested = obs.received_investment.value_or(0.0);
      const double transfer = obs.received_transfer.value_or(0.0);
      v["responder_name"] = self;
      v["investor_name"] = partner;
      v["responder_resources"] = own;
      v["investor_resources"] = other;
      v["investment"] = num(invested);
      v["investment_ratio"] = ratio(invested, obs.partner_resources.value_or(0.0));
      v["benefit"] = num(transfer);
      upper = transfer;
      break;
    }
    case Role::Seller:
      v["seller_name"] = self;
      v["buyer_name"] = partner;
      break;
    case Role::Buyer:
      v["buyer_name"] = self;
      v["seller_name"] = partner;
      break;
    case Role::Recipient:
      throw Error(ErrorCode::InvalidArgument, "recipients do not act");
  }
  ParsedDecision d = ask(obs, "act", action_template_id(ctx_.game, obs.role), v,
                         action_schema(obs.role), upper);
  return {*d.decision, std::move(d.justification)};
}

std::optional<GossipReply> LlmAgent::gossip(const Observation& obs, const GossipContext& g) {
  const GossipProtocol& protocol = g.protocol ? *g.protocol : ctx_.protocol;
  if (!protocol.enabled()) return std::nullopt;
  VarMap v = common_vars(obs);
  const std::string self = obs.name_of(obs.self);
  const std::string subject = obs.name_of(g.subject);
  const std::string own = num(obs.own_resources);
  const std::string other = num(obs.partner_resources.value_or(0.0));
  switch (ctx_.game) {
    case GameKind::Donation: {
      const bool coop = std::get<Action>(g.observed) == Action::Cooperate;
      const double paid = coop ? ctx_.cost : 0.0;
      v["recipient_name"] = self;
      v["donor_name"] = subject;
      v["recipient_resources"] = own;
      v["donor_resources"] = other;
      v["donation"] = num(paid);
      v["donation_ratio"] = ratio(paid, obs.partner_resources.value_or(0.0));
      v["benefit"] = num(coop ? ctx_.benefit : 0.0);
      break;
    }
    case GameKind::IR:
      v["player_name"] = self;
      v["opponent_name"] = subject;
      v["opponent_action"] = std::string(to_string(std::get<Action>(g.observed)));
      break;
    case GameKind::Investment: {
      const bool investor = obs.role == Role::Investor;
      const double invested =
          std::get<Amount>(investor ? *g.own_decision : g.observed).value;
      const double returned =
          std::get<Amount>(investor ? g.observed : *g.own_decision).value;
      const double investor_stock =
          investor ? obs.own_resources : obs.partner_resources.value_or(0.0);
      v["investor_name"] = investor ? self : subject;
      v["responder_name"] = investor ? subject : self;
      v["investor_resources"] = investor ? own : other;
      v["responder_resources"] = investor ? other : own;
      v["investment"] = num(invested);
      v["investment_ratio"] = ratio(invested, investor_stock);
      v["benefit"] = num(ctx_.multiplier * invested);
      v["returned_amount"] = num(returned);
      v["returned_ratio"] = ratio(returned, ctx_.multiplier * invested);
      break;
    }
    case GameKind::Market:
      v["buyer_name"] = self;
      v["seller_name"] = subject;
      v["seller_action"] = std::string(to_string(std::get<Quality>(g.observed)));
      v["buyer_action"] =
          g.own_decision ? std::string(to_string(std::get<Purchase>(*g.own_decision))) : "none";
      v["seller_reward"] = num(g.subject_reward);
      v["buyer_reward"] = num(g.own_reward);
      break;
  }
  const Schema schema = protocol.uses_bits() ? Schema::BinaryGossip : Schema::ToneGossip;
  ParsedDecision d =
      ask(obs, "gossip", gossip_template_id(ctx_.game, obs.role), v, schema, std::nullopt);
  return GossipReply{std::move(*d.payload), std::move(d.justification)};
}

std::optional<GossipReply> LlmAgent::self_report(const Observation& obs, Action own_action,
                                                 const GossipProtocol& protocol) {
  if (!protocol.allows_self_report()) return std::nullopt;
  VarMap v = common_vars(obs);
  v["donor_name"] = obs.name_of(obs.self);
  v["recipient_name"] = obs.partner ? obs.name_of(*obs.partner) : std::string();
  v["donor_action"] = std::string(to_string(own_action));
  ParsedDecision d = ask(obs, "self_report", kSelfReportTemplate, v, Schema::SelfReport, std::nullopt);
  return GossipReply{std::move(*d.payload), std::move(d.justification)};
}

}  // namespace gossip
