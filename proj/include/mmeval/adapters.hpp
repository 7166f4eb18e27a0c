#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmeval/records.hpp"
#include "mmeval/render.hpp"
#include "mmeval/scenario.hpp"

namespace mm {

enum class RespondentKind : uint8_t { HttpChat, Subprocess, Replay, Synthetic };

std::string_view respondentKindName(RespondentKind k);
std::optional<RespondentKind> respondentKindFromName(std::string_view name);

struct TieBreak {
  enum class Kind : uint8_t { CoinFlip, AlwaysCase1 };
  Kind kind = Kind::CoinFlip;
  uint64_t seed = 0;
};

/// Deterministic choice policy over scenario facets, evaluated rule by rule
/// until one side wins. Serves as an estimator oracle, not a language model.
struct PolicySpec {
  std::vector<std::string> orderedRules;
  TieBreak tieBreak;

  void validate() const;
};

/// Known rule names: spareHumans, spareHigherStatus, sparePedestrians,
/// spareLargerGroup, spareLawful, spareFemales, spareFit, spareYoung,
/// preferInaction.
bool isKnownPolicyRule(std::string_view name);

struct RespondentSpec {
  RespondentKind kind = RespondentKind::Synthetic;
  std::string modelName;
  std::optional<std::string> endpointUrl;   // httpChat
  std::optional<std::string> apiKeyEnvVar;  // httpChat
  nlohmann::json samplingParams = nlohmann::json::object();  // merged verbatim
  std::optional<PolicySpec> policy;         // synthetic
  std::optional<std::string> fixturePath;   // replay
  std::vector<std::string> command;         // subprocess argv

  double timeoutSeconds = 60.0;
  int maxAttempts = 5;
  double retryBaseSeconds = 1.0;  // exponential backoff, factor 2

  void validate() const;
  static RespondentSpec fromJson(const nlohmann::json& j);
  nlohmann::json toJson() const;
};

struct QueryTask {
  std::string scenarioId;
  std::string prompt;                  // full prompt text
  const Scenario* scenario = nullptr;  // required by synthetic respondents
};

/// Uniform respondent interface. Implementations are safe to call from
/// several threads at once.
class Respondent {
 public:
  struct Reply {
    bool ok = false;
    std::string rawText;
    int attempts = 1;
    bool authFailure = false;
    std::string error;
  };

  virtual ~Respondent() = default;
  virtual Reply respond(const QueryTask& task) = 0;
};

std::unique_ptr<Respondent> makeRespondent(const RespondentSpec& spec);

/// Single query; aggregates retries into one ChoiceRecord. Transport
/// failure yields an empty rawText classified invalid.
ChoiceRecord query(const RespondentSpec& spec, const PromptText& prompt,
                   const std::string& scenarioId, const Scenario* scenario = nullptr);

struct CampaignSummary {
  uint64_t requested = 0;  // scenarios attempted this run (absent from the log)
  uint64_t completed = 0;
  uint64_t failed = 0;
};

/// Queries every deck scenario not yet present in the log, with at most
/// `concurrency` requests in flight. The log is append-only JSON Lines,
/// one line per record, flushed per line; rerunning over a finished log is
/// a no-op. Authentication failures abort without writing, so the campaign
/// stays resumable. Throws TransportError when nothing could be queried.
CampaignSummary runCampaign(const RespondentSpec& spec, const std::vector<Scenario>& deck,
                            PromptMode mode, const std::filesystem::path& outLog,
                            int concurrency, const PhraseTable& phrases);
CampaignSummary runCampaign(const RespondentSpec& spec, const std::vector<Scenario>& deck,
                            PromptMode mode, const std::filesystem::path& outLog,
                            int concurrency);

}  // namespace mm
