#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "gossip/llm_adapter.hpp"
#include "stub_server.hpp"

using namespace gossip;
using gossip::testing::StubReply;
using gossip::testing::StubServer;
using gossip::testing::always_cooperate_reply;
using gossip::testing::completion_body;

namespace {

std::shared_ptr<const TemplateSet> templates() {
  static auto set = std::make_shared<const TemplateSet>(TemplateSet::load(GOSSIP_PROMPTS_DIR));
  return set;
}

class Recorder final : public ChatEndpoint {
 public:
  explicit Recorder(std::vector<std::string> replies = {}) : replies_(std::move(replies)) {}
  std::string complete(const std::string& system, const std::string& user) override {
    prompts.push_back(system);
    prompts.push_back(user);
    users.push_back(user);
    const std::size_t i = calls++;
    if (replies_.empty()) return always_cooperate_reply();
    return replies_[std::min(i, replies_.size() - 1)];
  }
  std::vector<std::string> prompts;
  std::vector<std::string> users;
  std::size_t calls = 0;

 private:
  std::vector<std::string> replies_;
};

auto kNames = std::make_shared<const std::vector<std::string>>(
    std::vector<std::string>{"John", "Kate"});

Observation observation(Role role, MonitoringMode mode) {
  Observation o;
  o.round = 3;
  o.mode = mode;
  o.self = 0;
  o.partner = 1;
  o.role = role;
  o.own_resources = 20;
  o.partner_resources = 12;
  o.names = kNames;
  o.memory.push_back({1, "donor paired with Kate", "cooperate", "Kate about John: [praising] ok", -1, ""});
  o.messages.push_back({2, 1, 0, TonedPayload{Tone::Praising, "John helped.", std::nullopt}, {}, {}});
  if (role == Role::Responder) {
    o.received_investment = 10;
    o.received_transfer = 30;
  }
  return o;
}

GossipContext context_for(GameKind game, Role witness, const GossipProtocol& protocol) {
  GossipContext g;
  g.subject = 1;
  g.protocol = &protocol;
  switch (game) {
    case GameKind::Donation: g.subject_role = Role::Donor; g.observed = Action::Cooperate; break;
    case GameKind::IR:
      g.subject_role = Role::Player;
      g.observed = Action::Defect;
      g.own_decision = Action::Cooperate;
      break;
    case GameKind::Investment:
      g.subject_role = witness == Role::Investor ? Role::Responder : Role::Investor;
      g.observed = witness == Role::Investor ? Amount{12} : Amount{10};
      g.own_decision = witness == Role::Investor ? Amount{10} : Amount{12};
      break;
    case GameKind::Market:
      g.subject_role = Role::Seller;
      g.observed = Quality::Low;
      g.own_decision = Purchase::Customized;
      g.own_reward = 0;
      g.subject_reward = 3;
      break;
  }
  return g;
}

void expect_clean(const std::string& prompt, const std::string& where) {
  EXPECT_EQ(prompt.find('$'), std::string::npos) << where << "\n" << prompt;
  EXPECT_EQ(prompt.find("{{"), std::string::npos) << where;
  EXPECT_EQ(prompt.find("[HORIZON-TYPE]"), std::string::npos) << where;
}

const std::vector<std::pair<GameKind, std::vector<Role>>> kActors = {
    {GameKind::Donation, {Role::Donor}},
    {GameKind::IR, {Role::Player}},
    {GameKind::Investment, {Role::Investor, Role::Responder}},
    {GameKind::Market, {Role::Seller, Role::Buyer}},
};
const std::vector<std::pair<GameKind, std::vector<Role>>> kWitnesses = {
    {GameKind::Donation, {Role::Recipient}},
    {GameKind::IR, {Role::Player}},
    {GameKind::Investment, {Role::Investor, Role::Responder}},
    {GameKind::Market, {Role::Buyer}},
};

}  // namespace

// --- templates -------------------------------------------------------------------

TEST(Templates, EveryPromptRendersWithoutResidue) {
  int rendered = 0;
  for (auto variant : {ProtocolVariant::HierarchicalTones, ProtocolVariant::BinaryWithConvention,
                       ProtocolVariant::BinaryNoConvention, ProtocolVariant::TonesPlusSelfReport,
                       ProtocolVariant::Disabled}) {
    for (bool eq : {false, true}) {
      for (auto horizon : {HorizonType::Finite, HorizonType::InfiniteTruncated}) {
        for (std::size_t g = 0; g < kActors.size(); ++g) {
          const GameKind game = kActors[g].first;
          PromptContext ctx;
          ctx.game = game;
          ctx.protocol.variant = variant;
          ctx.eq_knowledge = eq;
          ctx.horizon = horizon;
          ctx.horizon_length = 36;
          auto rec = std::make_shared<Recorder>();
          LlmAgent agent(rec, templates(), ctx);
          for (Role r : kActors[g].second) agent.act(observation(r, MonitoringMode::GossipPublic));
          for (Role r : kWitnesses[g].second) {
            const auto gc = context_for(game, r, ctx.protocol);
            agent.gossip(observation(r, MonitoringMode::GossipPublic), gc);
          }
          if (game == GameKind::Donation) {
            agent.self_report(observation(Role::Donor, MonitoringMode::GossipPublic),
                              Action::Cooperate, ctx.protocol);
          }
          for (const auto& p : rec->prompts) {
            expect_clean(p, std::string(to_string(game)) + "/" + std::string(to_string(variant)));
            ++rendered;
            const bool infinite = horizon == HorizonType::InfiniteTruncated;
            if (p.find("horizon") != std::string::npos && p.find("Self-awareness") != std::string::npos) {
              EXPECT_NE(p.find(infinite ? "infinite-horizon" : "finite-horizon"), std::string::npos);
            }
          }
          if (variant == ProtocolVariant::BinaryWithConvention || variant == ProtocolVariant::BinaryNoConvention) {
            const std::string& last = rec->users.back();
            EXPECT_NE(last.find("binary signal"), std::string::npos) << last;
            EXPECT_EQ(last.find(std::string(kDefaultConvention)) != std::string::npos,
                      variant == ProtocolVariant::BinaryWithConvention);
          }
        }
      }
    }
  }
  EXPECT_GT(rendered, 300);
}

TEST(Templates, EquilibriumKnowledgeChangesActionPrompt) {
  for (const auto& [game, roles] : kActors) {
    std::string prompts[2];
    for (bool eq : {false, true}) {
      PromptContext ctx;
      ctx.game = game;
      ctx.eq_knowledge = eq;
      auto rec = std::make_shared<Recorder>();
      LlmAgent(rec, templates(), ctx).act(observation(roles[0], MonitoringMode::GossipPublic));
      prompts[eq] = rec->users[0];
    }
    EXPECT_TRUE(prompts[0] != prompts[1]) << to_string(game);
  }
}

TEST(Templates, ConditionalBlocksAndSubstitution) {
  TemplateFlags f;
  f.gossip = false;
  const std::string body = "a\n{{if gossip}}\nG $x\n{{else}}\nN $y\n{{end}}\nz\n";
  EXPECT_EQ(select_blocks(body, f), "a\nN $y\nz\n");
  f.gossip = true;
  EXPECT_EQ(select_blocks(body, f), "a\nG $x\nz\n");
  EXPECT_EQ(substitute("$a and $ab", {{"a", "$ab"}, {"ab", "B"}}), "$ab and B");
  try {
    substitute("$missing", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingVariable);
  }
  EXPECT_THROW(select_blocks("{{if nonsense}}\nx\n{{end}}\n", f), Error);
}

TEST(Templates, FifteenListingsPlusSelfReport) {
  const auto& all = templates()->all();
  EXPECT_EQ(all.size(), 16u);
  EXPECT_TRUE(templates()->contains("donation_rule"));
  EXPECT_TRUE(templates()->contains(kSelfReportTemplate));
  EXPECT_TRUE(templates()->get("donation_action").required_vars().count("donor_name"));
}

// --- parsing -----------------------------------------------------------------------

TEST(Parse, FencedAndBareJson) {
  const std::string fenced =
      "Sure.\n```json\n{\"justification\": \"j\", \"donor_action\": \"Cooperate \"}\n```\n";
  EXPECT_EQ(std::get<Action>(*parse_decision(fenced, Schema::DonorAction).decision), Action::Cooperate);
  const std::string bare = R"({"justification":"x","player_action":"d"})";
  EXPECT_EQ(std::get<Action>(*parse_decision(bare, Schema::PlayerAction).decision), Action::Defect);
  const std::string braces = R"(note {not json} then {"justification":"a {b}","seller_action":"L"})";
  EXPECT_EQ(std::get<Quality>(*parse_decision(braces, Schema::SellerAction).decision), Quality::Low);
  const auto amount = parse_decision(R"({"justification":"","investor_action":"7.5"})",
                                     Schema::InvestorAction, 10.0);
  EXPECT_EQ(std::get<Amount>(*amount.decision).value, 7.5);
  const auto tone = parse_decision(R"({"justification":"","tone":"Criticism","gossip":"bad"})",
                                   Schema::ToneGossip);
  EXPECT_EQ(std::get<TonedPayload>(*tone.payload).tone, Tone::Criticism);
  const auto bit = parse_decision(R"({"justification":"","signal":0})", Schema::BinaryGossip);
  EXPECT_EQ(std::get<BinaryPayload>(*bit.payload).bit, 0);
}

TEST(Parse, Rejections) {
  auto code = [](const std::string& text, Schema s, std::optional<double> upper = {}) {
    try {
      parse_decision(text, s, upper);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code("no json here", Schema::DonorAction), ErrorCode::Malformed);
  EXPECT_EQ(code(R"({"justification":"x","donor_action":"maybe"})", Schema::DonorAction),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"donor_action":"cooperate"})", Schema::DonorAction), ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"justification":"","investor_action":11})", Schema::InvestorAction, 10.0),
            ErrorCode::OutOfRange);
  EXPECT_EQ(code(R"({"justification":"","responder_action":-1})", Schema::ResponderAction, 30.0),
            ErrorCode::OutOfRange);
  EXPECT_EQ(code(R"({"justification":"","tone":"sarcastic","gossip":"x"})", Schema::ToneGossip),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"justification":"","signal":"2"})", Schema::BinaryGossip), ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"justification":"","buyer_action":"x"})", Schema::BuyerAction),
            ErrorCode::SchemaViolation);
}

TEST(Parse, SerializeRoundTrips) {
  const std::vector<std::pair<Schema, ParsedDecision>> cases = {
      {Schema::DonorAction, {Action::Defect, std::nullopt, "j"}},
      {Schema::PlayerAction, {Action::Cooperate, std::nullopt, "j"}},
      {Schema::InvestorAction, {Amount{3.25}, std::nullopt, "j"}},
      {Schema::SellerAction, {Quality::High, std::nullopt, "j"}},
      {Schema::BuyerAction, {Purchase::None, std::nullopt, "j"}},
  };
  for (const auto& [schema, d] : cases) {
    const auto back = parse_decision(serialize_decision(d, schema), schema, 100.0);
    EXPECT_EQ(*back.decision, *d.decision) << to_string(schema);
    EXPECT_EQ(back.justification, "j");
  }
}

// --- transport ---------------------------------------------------------------------

namespace {

EndpointConfig stub_config(const StubServer& s) {
  EndpointConfig c;
  c.base_url = s.base_url();
  c.token_env = "";
  c.backoff = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(2000);
  return c;
}

}  // namespace

TEST(Http, EchoesContentAndSendsModel) {
  std::string seen_model;
  StubServer s([&](const nlohmann::json& req, int) {
    seen_model = req.value("model", "");
    const auto& msgs = req.at("messages");
    return StubReply{200, completion_body(msgs.at(1).at("content").get<std::string>())};
  });
  HttpChatEndpoint ep(stub_config(s));
  EXPECT_EQ(ep.complete("sys", "hello there"), "hello there");
  EXPECT_EQ(seen_model, "gpt-4o-mini");
}

TEST(Http, RetriesServerErrorsThenSucceeds) {
  StubServer s([](const nlohmann::json&, int call) {
    if (call == 0) return StubReply{500, "{}"};
    if (call == 1) return StubReply{429, "{}"};
    return StubReply{200, completion_body("ok")};
  });
  HttpChatEndpoint ep(stub_config(s));
  EXPECT_EQ(ep.complete("s", "u"), "ok");
  EXPECT_EQ(s.calls(), 3);
}

TEST(Http, GivesUpAfterRetryBudget) {
  StubServer s([](const nlohmann::json&, int) { return StubReply{503, "{}"}; });
  auto cfg = stub_config(s);
  cfg.max_retries = 2;
  HttpChatEndpoint ep(cfg);
  try {
    ep.complete("s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
  }
  EXPECT_EQ(s.calls(), 3);
}

TEST(Http, ClientErrorIsNotRetried) {
  StubServer s([](const nlohmann::json&, int) { return StubReply{400, "{}"}; });
  HttpChatEndpoint ep(stub_config(s));
  EXPECT_THROW(ep.complete("s", "u"), Error);
  EXPECT_EQ(s.calls(), 1);
}

TEST(Http, MalformedEnvelope) {
  StubServer s([](const nlohmann::json&, int) { return StubReply{200, R"({"choices":[]})"}; });
  HttpChatEndpoint ep(stub_config(s));
  try {
    ep.complete("s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Malformed);
  }
}

TEST(Http, AuthMissingBeforeAnyRequest) {
  StubServer s([](const nlohmann::json&, int) { return StubReply{200, completion_body("x")}; });
  auto cfg = stub_config(s);
  cfg.token_env = "GOSSIP_TEST_TOKEN_THAT_IS_NOT_SET";
  ::unsetenv(cfg.token_env.c_str());
  HttpChatEndpoint ep(cfg);
  try {
    ep.complete("s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AuthMissing);
  }
  EXPECT_EQ(s.calls(), 0);
}

TEST(Http, BearerTokenFromEnvironment) {
  StubServer s([](const nlohmann::json&, int) { return StubReply{200, completion_body("x")}; });
  auto cfg = stub_config(s);
  cfg.token_env = "GOSSIP_TEST_TOKEN";
  ::setenv("GOSSIP_TEST_TOKEN", "sekrit", 1);
  HttpChatEndpoint ep(cfg);
  ep.complete("s", "u");
  ASSERT_EQ(s.auth_headers().size(), 1u);
  EXPECT_EQ(s.auth_headers()[0], "Bearer sekrit");
}

TEST(Http, TimeoutIsReported) {
  StubServer s([](const nlohmann::json&, int) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    return StubReply{200, completion_body("late")};
  });
  auto cfg = stub_config(s);
  cfg.timeout = std::chrono::milliseconds(150);
  cfg.max_retries = 0;
  HttpChatEndpoint ep(cfg);
  try {
    ep.complete("s", "u");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Timeout);
  }
}

// --- agent ------------------------------------------------------------------------------

TEST(Agent, RepromptsOnBadReplyAndLogsTranscript) {
  auto rec = std::make_shared<Recorder>(std::vector<std::string>{
      "I think I will cooperate.", R"({"justification":"x","donor_action":"defect"})"});
  std::vector<TranscriptEntry> log;
  PromptContext ctx;
  LlmAgent agent(rec, templates(), ctx, [&](const TranscriptEntry& e) { log.push_back(e); });
  const auto reply = agent.act(observation(Role::Donor, MonitoringMode::GossipPublic));
  EXPECT_EQ(std::get<Action>(reply.decision), Action::Defect);
  ASSERT_EQ(log.size(), 2u);
  EXPECT_FALSE(log[0].error.empty());
  EXPECT_TRUE(log[1].error.empty());
  EXPECT_NE(rec->users[1].find("previous reply was rejected"), std::string::npos);
}

TEST(Agent, GivesUpAfterBudget) {
  auto rec = std::make_shared<Recorder>(std::vector<std::string>{"nope"});
  LlmAgent agent(rec, templates(), PromptContext{});
  try {
    agent.act(observation(Role::Donor, MonitoringMode::GossipPublic));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Malformed);
  }
  EXPECT_EQ(rec->calls, static_cast<std::size_t>(kReplyRetryBudget + 1));
}

TEST(Agent, ResponderUpperBoundIsTransfer) {
  auto rec = std::make_shared<Recorder>(std::vector<std::string>{
      R"({"justification":"","responder_action":31})", R"({"justification":"","responder_action":30})"});
  PromptContext ctx;
  ctx.game = GameKind::Investment;
  LlmAgent agent(rec, templates(), ctx);
  const auto reply = agent.act(observation(Role::Responder, MonitoringMode::GossipPublic));
  EXPECT_EQ(std::get<Amount>(reply.decision).value, 30);
  EXPECT_EQ(rec->calls, 2u);
}
