#include "mmeval/adapters.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "httplib.h"

#include "mmeval/error.hpp"
#include "mmeval/parser.hpp"
#include "mmeval/rng.hpp"
#include "mmeval/util.hpp"
#include "subprocess.hpp"

namespace mm {

namespace {

constexpr std::string_view kRuleNames[] = {
    "spareHumans",  "spareHigherStatus", "sparePedestrians",
    "spareLargerGroup", "spareLawful",   "spareFemales",
    "spareFit",     "spareYoung",        "preferInaction",
};

struct PolicyCounts {
  int humans = 0, females = 0, young = 0, elderly = 0;
  int fitScore = 0, statusScore = 0, lawScore = 0;
  int size = 0;
  bool pedestrians = false;
};

PolicyCounts countsOf(const OutcomeGroup& g) {
  PolicyCounts c;
  c.size = static_cast<int>(g.characters.size());
  c.pedestrians = g.role == GroupRole::Pedestrians;
  if (g.legality == Legality::Lawful) c.lawScore = 1;
  if (g.legality == Legality::Unlawful) c.lawScore = -1;
  for (CharacterKind k : g.characters) {
    const Facets& f = facetsOf(k);
    if (f.species == Species::Human) c.humans++;
    if (f.gender == Gender::Female) c.females++;
    if (f.ageBand == AgeBand::Young) c.young++;
    if (f.ageBand == AgeBand::Elderly) c.elderly++;
    if (f.fitness == FitnessLevel::Fit) c.fitScore++;
    if (f.fitness == FitnessLevel::Unfit) c.fitScore--;
    if (f.socialValue == SocialValueLevel::High) c.statusScore++;
    if (f.socialValue == SocialValueLevel::Low) c.statusScore--;
  }
  return c;
}

/// Which group the rule prefers to spare, if it has an opinion.
std::optional<GroupTag> applyRule(std::string_view rule, const Scenario& s) {
  const PolicyCounts a = countsOf(s.groupA);
  const PolicyCounts b = countsOf(s.groupB);
  auto prefer = [](int va, int vb) -> std::optional<GroupTag> {
    if (va > vb) return GroupTag::A;
    if (vb > va) return GroupTag::B;
    return std::nullopt;
  };
  if (rule == "spareHumans") return prefer(a.humans, b.humans);
  if (rule == "spareHigherStatus") return prefer(a.statusScore, b.statusScore);
  if (rule == "sparePedestrians") return prefer(a.pedestrians ? 1 : 0, b.pedestrians ? 1 : 0);
  if (rule == "spareLargerGroup") return prefer(a.size, b.size);
  if (rule == "spareLawful") return prefer(a.lawScore, b.lawScore);
  if (rule == "spareFemales") return prefer(a.females, b.females);
  if (rule == "spareFit") return prefer(a.fitScore, b.fitScore);
  if (rule == "spareYoung") return prefer(a.young - a.elderly, b.young - b.elderly);
  if (rule == "preferInaction") return otherTag(s.stayVictim);
  throw UsageError("unknown policy rule: " + std::string(rule));
}

std::string policyAnswer(const PolicySpec& policy, const Scenario& s) {
  for (const std::string& rule : policy.orderedRules) {
    if (auto spared = applyRule(rule, s)) {
      // Sparing the stay victim requires swerving (Case 2).
      return *spared == s.stayVictim ? "Case 2" : "Case 1";
    }
  }
  if (policy.tieBreak.kind == TieBreak::Kind::AlwaysCase1) return "Case 1";
  const uint64_t h = splitmix64(policy.tieBreak.seed ^ fnv1a64(s.id));
  return (h & 1) == 0 ? "Case 1" : "Case 2";
}

class SyntheticRespondent final : public Respondent {
 public:
  explicit SyntheticRespondent(PolicySpec policy) : policy_(std::move(policy)) {}

  Reply respond(const QueryTask& task) override {
    if (task.scenario == nullptr)
      throw UsageError("synthetic respondent needs the scenario object");
    Reply r;
    r.ok = true;
    r.rawText = policyAnswer(policy_, *task.scenario);
    return r;
  }

 private:
  PolicySpec policy_;
};

class ReplayRespondent final : public Respondent {
 public:
  explicit ReplayRespondent(const std::filesystem::path& fixture) {
    for (const std::string& line : readLines(fixture)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        byId_[j.at("scenarioId").get<std::string>()] = j.at("rawText").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw IoError("bad replay fixture line in " + fixture.string() + ": " + e.what());
      }
    }
  }

  Reply respond(const QueryTask& task) override {
    Reply r;
    auto it = byId_.find(task.scenarioId);
    if (it == byId_.end()) {
      r.error = "scenario not in fixture: " + task.scenarioId;
      return r;
    }
    r.ok = true;
    r.rawText = it->second;
    return r;
  }

 private:
  std::unordered_map<std::string, std::string> byId_;
};

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedUrl splitUrl(const std::string& url) {
  const auto schemeEnd = url.find("://");
  if (schemeEnd == std::string::npos) throw UsageError("endpoint URL needs a scheme: " + url);
  const auto pathStart = url.find('/', schemeEnd + 3);
  if (pathStart == std::string::npos) return {url, "/v1/chat/completions"};
  return {url.substr(0, pathStart), url.substr(pathStart)};
}

class HttpChatRespondent final : public Respondent {
 public:
  explicit HttpChatRespondent(const RespondentSpec& spec) : spec_(spec), url_(splitUrl(*spec.endpointUrl)) {
    if (spec_.apiKeyEnvVar) {
      const char* key = std::getenv(spec_.apiKeyEnvVar->c_str());
      if (key == nullptr || *key == '\0')
        throw UsageError("API key environment variable not set: " + *spec_.apiKeyEnvVar);
      apiKey_ = key;
    }
  }

  Reply respond(const QueryTask& task) override {
    nlohmann::json body{
        {"model", spec_.modelName},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", task.prompt}}})}};
    for (auto it = spec_.samplingParams.begin(); it != spec_.samplingParams.end(); ++it)
      body[it.key()] = it.value();
    const std::string payload = body.dump();

    Reply r;
    for (int attempt = 1; attempt <= spec_.maxAttempts; ++attempt) {
      r.attempts = attempt;
      httplib::Client client(url_.base);
      client.set_connection_timeout(std::chrono::milliseconds(
          static_cast<int64_t>(spec_.timeoutSeconds * 1000)));
      client.set_read_timeout(std::chrono::milliseconds(
          static_cast<int64_t>(spec_.timeoutSeconds * 1000)));
      httplib::Headers headers;
      if (!apiKey_.empty()) headers.emplace("Authorization", "Bearer " + apiKey_);

      auto res = client.Post(url_.path, headers, payload, "application/json");
      if (res) {
        if (res->status == 200) {
          try {
            const auto j = nlohmann::json::parse(res->body);
            r.rawText = j.at("choices").at(0).at("message").at("content").get<std::string>();
            r.ok = true;
            return r;
          } catch (const nlohmann::json::exception& e) {
            r.error = std::string("unparseable completion body: ") + e.what();
            // fall through to retry
          }
        } else if (res->status == 401 || res->status == 403) {
          r.authFailure = true;
          r.error = "authentication rejected (HTTP " + std::to_string(res->status) + ")";
          return r;
        } else if (res->status == 429 || res->status >= 500) {
          r.error = "HTTP " + std::to_string(res->status);
          // retryable
        } else {
          r.error = "HTTP " + std::to_string(res->status);
          return r;  // other client errors will not improve with retries
        }
      } else {
        r.error = "transport: " + httplib::to_string(res.error());
      }

      if (attempt < spec_.maxAttempts) {
        const double delay = spec_.retryBaseSeconds * std::pow(2.0, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
    }
    return r;
  }

 private:
  RespondentSpec spec_;
  ParsedUrl url_;
  std::string apiKey_;
};

class SubprocessRespondent final : public Respondent {
 public:
  explicit SubprocessRespondent(const RespondentSpec& spec) : spec_(spec) {}

  Reply respond(const QueryTask& task) override {
    Reply r;
    for (int attempt = 1; attempt <= spec_.maxAttempts; ++attempt) {
      r.attempts = attempt;
      SubprocessResult result = runSubprocess(spec_.command, task.prompt, spec_.timeoutSeconds);
      if (result.exitCode == 0 && !result.timedOut) {
        r.ok = true;
        r.rawText = std::move(result.output);
        return r;
      }
      r.error = result.timedOut ? "subprocess timed out"
                                : "subprocess exited with " + std::to_string(result.exitCode);
      if (attempt < spec_.maxAttempts) {
        const double delay = spec_.retryBaseSeconds * std::pow(2.0, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
    }
    return r;
  }

 private:
  RespondentSpec spec_;
};

}  // namespace

std::string_view respondentKindName(RespondentKind k) {
  switch (k) {
    case RespondentKind::HttpChat: return "httpChat";
    case RespondentKind::Subprocess: return "subprocess";
    case RespondentKind::Replay: return "replay";
    case RespondentKind::Synthetic: return "synthetic";
  }
  return "synthetic";
}

std::optional<RespondentKind> respondentKindFromName(std::string_view name) {
  if (name == "httpChat") return RespondentKind::HttpChat;
  if (name == "subprocess") return RespondentKind::Subprocess;
  if (name == "replay") return RespondentKind::Replay;
  if (name == "synthetic") return RespondentKind::Synthetic;
  return std::nullopt;
}

bool isKnownPolicyRule(std::string_view name) {
  for (std::string_view r : kRuleNames)
    if (r == name) return true;
  return false;
}

void PolicySpec::validate() const {
  for (const std::string& rule : orderedRules) {
    if (!isKnownPolicyRule(rule)) throw UsageError("unknown policy rule: " + rule);
  }
}

void RespondentSpec::validate() const {
  if (modelName.empty()) throw UsageError("respondent modelName must not be empty");
  if (maxAttempts < 1) throw UsageError("maxAttempts must be >= 1");
  if (timeoutSeconds <= 0) throw UsageError("timeoutSeconds must be positive");
  if (retryBaseSeconds < 0) throw UsageError("retryBaseSeconds must be non-negative");
  switch (kind) {
    case RespondentKind::HttpChat:
      if (!endpointUrl) throw UsageError("httpChat respondent needs endpointUrl");
      break;
    case RespondentKind::Subprocess:
      if (command.empty()) throw UsageError("subprocess respondent needs a command");
      break;
    case RespondentKind::Replay:
      if (!fixturePath) throw UsageError("replay respondent needs fixturePath");
      break;
    case RespondentKind::Synthetic:
      if (!policy) throw UsageError("synthetic respondent needs a policy");
      policy->validate();
      break;
  }
}

RespondentSpec RespondentSpec::fromJson(const nlohmann::json& j) {
  RespondentSpec spec;
  auto kind = respondentKindFromName(j.at("kind").get<std::string>());
  if (!kind) throw UsageError("unknown respondent kind: " + j.at("kind").get<std::string>());
  spec.kind = *kind;
  spec.modelName = j.value("modelName", "");
  if (j.contains("endpointUrl")) spec.endpointUrl = j.at("endpointUrl").get<std::string>();
  if (j.contains("apiKeyEnvVar")) spec.apiKeyEnvVar = j.at("apiKeyEnvVar").get<std::string>();
  if (j.contains("samplingParams")) {
    if (!j.at("samplingParams").is_object())
      throw UsageError("samplingParams must be an object");
    spec.samplingParams = j.at("samplingParams");
  }
  if (j.contains("policy")) {
    PolicySpec p;
    const auto& pj = j.at("policy");
    if (pj.contains("orderedRules"))
      p.orderedRules = pj.at("orderedRules").get<std::vector<std::string>>();
    if (pj.contains("tieBreak")) {
      const auto& tb = pj.at("tieBreak");
      const std::string kindName = tb.at("kind").get<std::string>();
      if (kindName == "coinFlip") {
        p.tieBreak.kind = TieBreak::Kind::CoinFlip;
        p.tieBreak.seed = tb.value("seed", uint64_t{0});
      } else if (kindName == "alwaysCase1") {
        p.tieBreak.kind = TieBreak::Kind::AlwaysCase1;
      } else {
        throw UsageError("unknown tieBreak kind: " + kindName);
      }
    }
    spec.policy = std::move(p);
  }
  if (j.contains("fixturePath")) spec.fixturePath = j.at("fixturePath").get<std::string>();
  if (j.contains("command")) spec.command = j.at("command").get<std::vector<std::string>>();
  spec.timeoutSeconds = j.value("timeoutSeconds", 60.0);
  spec.maxAttempts = j.value("maxAttempts", 5);
  spec.retryBaseSeconds = j.value("retryBaseSeconds", 1.0);
  spec.validate();
  return spec;
}

nlohmann::json RespondentSpec::toJson() const {
  nlohmann::json j{{"kind", std::string(respondentKindName(kind))},
                   {"modelName", modelName},
                   {"timeoutSeconds", timeoutSeconds},
                   {"maxAttempts", maxAttempts},
                   {"retryBaseSeconds", retryBaseSeconds}};
  if (endpointUrl) j["endpointUrl"] = *endpointUrl;
  if (apiKeyEnvVar) j["apiKeyEnvVar"] = *apiKeyEnvVar;
  if (!samplingParams.empty()) j["samplingParams"] = samplingParams;
  if (policy) {
    nlohmann::json tb{{"kind", policy->tieBreak.kind == TieBreak::Kind::CoinFlip
                                   ? "coinFlip"
                                   : "alwaysCase1"}};
    if (policy->tieBreak.kind == TieBreak::Kind::CoinFlip) tb["seed"] = policy->tieBreak.seed;
    j["policy"] = {{"orderedRules", policy->orderedRules}, {"tieBreak", std::move(tb)}};
  }
  if (fixturePath) j["fixturePath"] = *fixturePath;
  if (!command.empty()) j["command"] = command;
  return j;
}

std::unique_ptr<Respondent> makeRespondent(const RespondentSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case RespondentKind::Synthetic: return std::make_unique<SyntheticRespondent>(*spec.policy);
    case RespondentKind::Replay: return std::make_unique<ReplayRespondent>(*spec.fixturePath);
    case RespondentKind::HttpChat: return std::make_unique<HttpChatRespondent>(spec);
    case RespondentKind::Subprocess: return std::make_unique<SubprocessRespondent>(spec);
  }
  throw UsageError("unreachable respondent kind");
}

namespace {

ChoiceRecord recordFromReply(const std::string& scenarioId, const std::string& modelName,
                             const Respondent::Reply& reply, const std::string& timestamp,
                             int64_t latencyMs) {
  ChoiceRecord rec;
  rec.scenarioId = scenarioId;
  rec.modelName = modelName;
  rec.requestTimestamp = timestamp;
  rec.latencyMs = latencyMs;
  rec.attempt = reply.attempts;
  if (reply.ok) {
    rec.rawText = reply.rawText;
    rec.parsed = classify(reply.rawText);
  } else {
    rec.rawText.clear();  // transport failure counts as invalid
    rec.parsed = Classification::Invalid;
  }
  return rec;
}

}  // namespace

ChoiceRecord query(const RespondentSpec& spec, const PromptText& prompt,
                   const std::string& scenarioId, const Scenario* scenario) {
  auto respondent = makeRespondent(spec);
  QueryTask task{scenarioId, prompt.full, scenario};
  const std::string timestamp = utcNowIso8601();
  const auto t0 = std::chrono::steady_clock::now();
  const Respondent::Reply reply = respondent->respond(task);
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
  if (reply.authFailure) throw TransportError("authentication failed: " + reply.error);
  return recordFromReply(scenarioId, spec.modelName, reply, timestamp, latency.count());
}

CampaignSummary runCampaign(const RespondentSpec& spec, const std::vector<Scenario>& deck,
                            PromptMode mode, const std::filesystem::path& outLog,
                            int concurrency, const PhraseTable& phrases) {
  spec.validate();
  if (deck.empty()) throw UsageError("campaign deck is empty");
  if (concurrency < 1) throw UsageError("concurrency must be >= 1");

  std::unordered_set<std::string> done;
  if (std::filesystem::exists(outLog)) {
    std::size_t skipped = 0;
    for (const ChoiceRecord& r : readResponseLog(outLog, &skipped)) done.insert(r.scenarioId);
  }

  std::vector<const Scenario*> pending;
  for (const Scenario& s : deck) {
    if (!done.contains(s.id)) pending.push_back(&s);
  }

  CampaignSummary summary;
  summary.requested = pending.size();
  if (pending.empty()) return summary;

  if (outLog.has_parent_path()) std::filesystem::create_directories(outLog.parent_path());

  // A torn tail from an interrupted run must not swallow the next record.
  bool needsNewline = false;
  if (std::filesystem::exists(outLog) && std::filesystem::file_size(outLog) > 0) {
    std::ifstream tail(outLog, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    char last = '\n';
    tail.get(last);
    needsNewline = last != '\n';
  }

  std::ofstream log(outLog, std::ios::binary | std::ios::app);
  if (!log) throw IoError("cannot open log for append: " + outLog.string());
  if (needsNewline) log << '\n';

  auto respondent = makeRespondent(spec);

  std::atomic<std::size_t> next{0};
  std::atomic<uint64_t> completed{0};
  std::atomic<uint64_t> failed{0};
  std::atomic<bool> abort{false};
  std::mutex logMutex;
  std::string authError;

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= pending.size()) return;
      const Scenario& s = *pending[i];

      const PromptText prompt = renderPrompt(s, mode, phrases);
      QueryTask task{s.id, prompt.full, &s};
      const std::string timestamp = utcNowIso8601();
      const auto t0 = std::chrono::steady_clock::now();
      const Respondent::Reply reply = respondent->respond(task);
      const auto latencyMs = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();

      if (reply.authFailure) {
        // Leave the scenario unrecorded so a rerun picks it up again.
        std::lock_guard<std::mutex> lock(logMutex);
        abort.store(true, std::memory_order_relaxed);
        if (authError.empty()) authError = reply.error;
        return;
      }

      const ChoiceRecord rec =
          recordFromReply(s.id, spec.modelName, reply, timestamp, latencyMs);
      const std::string line = toJson(rec).dump();
      {
        std::lock_guard<std::mutex> lock(logMutex);
        log << line << '\n';
        log.flush();
      }
      if (reply.ok) {
        completed.fetch_add(1, std::memory_order_relaxed);
      } else {
        failed.fetch_add(1, std::memory_order_relaxed);
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(concurrency), pending.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (abort.load()) throw TransportError("authentication failed: " + authError);

  summary.completed = completed.load();
  summary.failed = failed.load();
  summary.requested = summary.completed + summary.failed;  // aborted tasks excluded
  return summary;
}

CampaignSummary runCampaign(const RespondentSpec& spec, const std::vector<Scenario>& deck,
                            PromptMode mode, const std::filesystem::path& outLog,
                            int concurrency) {
  return runCampaign(spec, deck, mode, outLog, concurrency, PhraseTable::standard());
}

}  // namespace mm
