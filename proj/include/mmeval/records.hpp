#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mm {

enum class Classification : uint8_t { Case1, Case2, Invalid };

std::string_view classificationName(Classification c);
std::optional<Classification> classificationFromName(std::string_view name);

/// One respondent reply to one scenario, as recorded in the response log.
struct ChoiceRecord {
  std::string scenarioId;
  std::string modelName;
  std::string rawText;
  Classification parsed = Classification::Invalid;
  std::string requestTimestamp;  // ISO-8601 UTC
  int64_t latencyMs = 0;
  int attempt = 1;
};

nlohmann::json toJson(const ChoiceRecord& r);
ChoiceRecord choiceRecordFromJson(const nlohmann::json& j);

/// Reads a JSON Lines response log. Unparseable lines (for example a
/// truncated final line after an interrupted run) are skipped and counted
/// in *skipped when given.
std::vector<ChoiceRecord> readResponseLog(const std::filesystem::path& path,
                                          std::size_t* skipped = nullptr);

}  // namespace mm
