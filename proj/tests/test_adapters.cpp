#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <fstream>
#include <map>
#include <thread>

#include "mmeval/adapters.hpp"
#include "mmeval/error.hpp"
#include "mmeval/generator.hpp"
#include "mmeval/util.hpp"
#include "support/stub_server.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace mm;
using mmtest::StubServer;
using mmtest::TempDir;

namespace {

std::vector<Scenario> smallDeck(uint64_t count, uint64_t seed) {
  GenerationConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  return generateDeck(cfg);
}

RespondentSpec httpSpec(const StubServer& server, int maxAttempts = 5) {
  RespondentSpec spec;
  spec.kind = RespondentKind::HttpChat;
  spec.modelName = "stub-model";
  spec.endpointUrl = server.url();
  spec.maxAttempts = maxAttempts;
  spec.retryBaseSeconds = 0.001;  // keep retries fast under test
  spec.timeoutSeconds = 10;
  return spec;
}

std::map<std::string, std::string> logAsMap(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for (const ChoiceRecord& r : readResponseLog(path)) out[r.scenarioId] = r.rawText;
  return out;
}

}  // namespace

TEST_CASE("synthetic size policy spares the larger group") {
  const Scenario s = mmtest::scenario(
      "u", FocalDimension::Utilitarian,
      mmtest::pedestrians({CharacterKind::Man, CharacterKind::Woman}),
      mmtest::pedestrians({CharacterKind::Man, CharacterKind::Woman, CharacterKind::Boy}),
      GroupTag::B);
  const PromptText prompt = renderPrompt(s, PromptMode::ChoiceOnly);
  const ChoiceRecord rec =
      query(mmtest::syntheticSpec(mmtest::policy({"spareLargerGroup"}, 0)), prompt, s.id, &s);
  // groupB (the larger) is the stay victim; sparing it means swerving.
  CHECK(rec.rawText == "Case 2");
  CHECK(rec.parsed == Classification::Case2);
}

TEST_CASE("seeded tie-break coin is deterministic per scenario") {
  const auto deck = smallDeck(100, 4);
  const auto first = mmtest::answerDeck(deck, mmtest::policy({}, 42));
  const auto second = mmtest::answerDeck(deck, mmtest::policy({}, 42));
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK(first[i].rawText == second[i].rawText);
}

TEST_CASE("replay fixture answers without a network") {
  TempDir tmp;
  writeFile(tmp.file("fixture.jsonl"),
            R"({"scenarioId":"scn-1","rawText":"Case 2"})" "\n");
  RespondentSpec spec;
  spec.kind = RespondentKind::Replay;
  spec.modelName = "replayed";
  spec.fixturePath = tmp.file("fixture.jsonl");

  PromptText prompt;
  prompt.full = "irrelevant";
  const ChoiceRecord hit = query(spec, prompt, "scn-1");
  CHECK(hit.rawText == "Case 2");
  CHECK(hit.parsed == Classification::Case2);

  const ChoiceRecord miss = query(spec, prompt, "scn-2");
  CHECK(miss.rawText.empty());
  CHECK(miss.parsed == Classification::Invalid);
}

TEST_CASE("http adapter extracts the first choice's message content") {
  StubServer server;
  server.setHandler([](const httplib::Request&, httplib::Response& res) {
    res.set_content(StubServer::chatBody("Case 1."), "application/json");
  });
  const auto deck = smallDeck(1, 10);
  const PromptText prompt = renderPrompt(deck[0], PromptMode::ChoiceOnly);
  const ChoiceRecord rec = query(httpSpec(server), prompt, deck[0].id, &deck[0]);
  CHECK(rec.rawText == "Case 1.");
  CHECK(rec.parsed == Classification::Case1);
  CHECK(rec.attempt == 1);
  CHECK(server.requestCount() == 1);
}

TEST_CASE("http adapter sends the full prompt and sampling params verbatim") {
  StubServer server;
  std::string seenBody;
  std::mutex m;
  server.setHandler([&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(m);
    seenBody = req.body;
    res.set_content(StubServer::chatBody("Case 2"), "application/json");
  });
  const auto deck = smallDeck(1, 11);
  RespondentSpec spec = httpSpec(server);
  spec.samplingParams = {{"temperature", 0.3}, {"max_tokens", 64}};
  const PromptText prompt = renderPrompt(deck[0], PromptMode::ChoiceOnly);
  query(spec, prompt, deck[0].id, &deck[0]);

  const auto body = nlohmann::json::parse(seenBody);
  CHECK(body.at("model") == "stub-model");
  CHECK(body.at("messages").at(0).at("role") == "user");
  CHECK(body.at("messages").at(0).at("content") == prompt.full);
  CHECK(body.at("temperature") == 0.3);
  CHECK(body.at("max_tokens") == 64);
}

TEST_CASE("persistent 500s exhaust the retry budget") {
  StubServer server;
  server.setHandler([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  TempDir tmp;
  const auto deck = smallDeck(10, 12);
  const CampaignSummary summary =
      runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, tmp.file("log.jsonl"), 4);
  CHECK(summary.requested == 10);
  CHECK(summary.completed == 0);
  CHECK(summary.failed == 10);
  const auto records = readResponseLog(tmp.file("log.jsonl"));
  REQUIRE(records.size() == 10);
  for (const ChoiceRecord& r : records) {
    CHECK(r.attempt == 5);
    CHECK(r.rawText.empty());
    CHECK(r.parsed == Classification::Invalid);
  }
  CHECK(server.requestCount() == 50);
}

TEST_CASE("a transient 429 is retried") {
  StubServer server;
  std::atomic<int> calls{0};
  server.setHandler([&](const httplib::Request&, httplib::Response& res) {
    if (calls.fetch_add(1) == 0) {
      res.status = 429;
    } else {
      res.set_content(StubServer::chatBody("Case 2"), "application/json");
    }
  });
  const auto deck = smallDeck(1, 13);
  const ChoiceRecord rec = query(httpSpec(server), renderPrompt(deck[0], PromptMode::ChoiceOnly),
                                 deck[0].id, &deck[0]);
  CHECK(rec.rawText == "Case 2");
  CHECK(rec.attempt == 2);
}

TEST_CASE("authentication failures abort without retries or log entries") {
  StubServer server;
  server.setHandler([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  TempDir tmp;
  const auto deck = smallDeck(5, 14);
  CHECK_THROWS_AS(
      runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, tmp.file("log.jsonl"), 1),
      TransportError);
  CHECK(readResponseLog(tmp.file("log.jsonl")).empty());
  CHECK(server.requestCount() == 1);  // fail fast, no retry
}

TEST_CASE("campaign is idempotent and resumable") {
  StubServer server;  // deterministic default: always "Case 1"
  TempDir tmp;
  const auto deck = smallDeck(40, 15);
  const std::string logPath = tmp.file("log.jsonl");

  const CampaignSummary full =
      runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, logPath, 8);
  CHECK(full.requested == 40);
  CHECK(full.completed == 40);
  CHECK(server.requestCount() == 40);
  const auto complete = logAsMap(logPath);

  // Rerunning over a finished log issues nothing.
  const CampaignSummary again =
      runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, logPath, 8);
  CHECK(again.requested == 0);
  CHECK(server.requestCount() == 40);

  // Drop half the lines; only the missing half is queried again.
  const auto lines = readLines(logPath);
  std::string truncated;
  for (std::size_t i = 0; i < lines.size() / 2; ++i) truncated += lines[i] + "\n";
  writeFile(logPath, truncated);

  const CampaignSummary resumed =
      runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, logPath, 8);
  CHECK(resumed.requested == 20);
  CHECK(server.requestCount() == 60);
  CHECK(logAsMap(logPath) == complete);
}

TEST_CASE("a torn final line is requeried, not trusted") {
  StubServer server;
  TempDir tmp;
  const auto deck = smallDeck(6, 16);
  const std::string logPath = tmp.file("log.jsonl");
  runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, logPath, 2);

  auto lines = readLines(logPath);
  REQUIRE(lines.size() == 6);
  std::string mangled;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) mangled += lines[i] + "\n";
  mangled += lines.back().substr(0, lines.back().size() / 2);  // torn write
  writeFile(logPath, mangled);

  const CampaignSummary resumed =
      runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, logPath, 2);
  CHECK(resumed.requested == 1);
  std::size_t skipped = 0;
  const auto records = readResponseLog(logPath, &skipped);
  CHECK(skipped == 1);
  CHECK(records.size() == 6);
}

TEST_CASE("in-flight requests never exceed the concurrency bound") {
  StubServer server;
  server.setHandler([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    res.set_content(StubServer::chatBody("Case 1"), "application/json");
  });
  TempDir tmp;
  const auto deck = smallDeck(12, 17);
  runCampaign(httpSpec(server), deck, PromptMode::ChoiceOnly, tmp.file("log.jsonl"), 3);
  CHECK(server.maxInFlight() <= 3);
  CHECK(server.requestCount() == 12);
}

TEST_CASE("subprocess adapter round-trips stdin to stdout") {
  RespondentSpec spec;
  spec.kind = RespondentKind::Subprocess;
  spec.modelName = "script";
  spec.command = {"/bin/sh", "-c", "cat >/dev/null; printf 'Case 2'"};
  spec.retryBaseSeconds = 0.001;
  PromptText prompt;
  prompt.full = "which case?";
  const ChoiceRecord rec = query(spec, prompt, "s0");
  CHECK(rec.rawText == "Case 2");
  CHECK(rec.parsed == Classification::Case2);

  spec.command = {"/bin/sh", "-c", "exit 3"};
  spec.maxAttempts = 2;
  const ChoiceRecord fail = query(spec, prompt, "s1");
  CHECK(fail.parsed == Classification::Invalid);
  CHECK(fail.attempt == 2);
}

TEST_CASE("a missing API key environment variable fails before any query") {
  ::unsetenv("MMEVAL_TEST_MISSING_KEY");
  RespondentSpec spec;
  spec.kind = RespondentKind::HttpChat;
  spec.modelName = "m";
  spec.endpointUrl = "http://127.0.0.1:1/v1/chat/completions";
  spec.apiKeyEnvVar = "MMEVAL_TEST_MISSING_KEY";
  CHECK_THROWS_AS(makeRespondent(spec), UsageError);
}

TEST_CASE("respondent spec validation") {
  RespondentSpec spec;
  spec.kind = RespondentKind::HttpChat;
  spec.modelName = "m";
  CHECK_THROWS_AS(spec.validate(), UsageError);  // endpoint missing

  spec = RespondentSpec{};
  spec.kind = RespondentKind::Synthetic;
  spec.modelName = "m";
  CHECK_THROWS_AS(spec.validate(), UsageError);  // policy missing

  spec.policy = mmtest::policy({"spareEveryone"}, 0);
  CHECK_THROWS_AS(spec.validate(), UsageError);  // unknown rule

  const auto roundTrip = RespondentSpec::fromJson(
      mmtest::syntheticSpec(mmtest::policy({"spareHumans"}, 9)).toJson());
  CHECK(roundTrip.kind == RespondentKind::Synthetic);
  REQUIRE(roundTrip.policy.has_value());
  CHECK(roundTrip.policy->orderedRules == std::vector<std::string>{"spareHumans"});
  CHECK(roundTrip.policy->tieBreak.seed == 9);
}
