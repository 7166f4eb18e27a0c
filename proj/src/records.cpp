#include "mmeval/records.hpp"

#include <fstream>

#include "mmeval/error.hpp"

namespace mm {

std::string_view classificationName(Classification c) {
  switch (c) {
    case Classification::Case1: return "case1";
    case Classification::Case2: return "case2";
    case Classification::Invalid: return "invalid";
  }
  return "invalid";
}

std::optional<Classification> classificationFromName(std::string_view name) {
  if (name == "case1") return Classification::Case1;
  if (name == "case2") return Classification::Case2;
  if (name == "invalid") return Classification::Invalid;
  return std::nullopt;
}

nlohmann::json toJson(const ChoiceRecord& r) {
  return {{"scenarioId", r.scenarioId},
          {"modelName", r.modelName},
          {"rawText", r.rawText},
          {"parsed", std::string(classificationName(r.parsed))},
          {"requestTimestamp", r.requestTimestamp},
          {"latencyMs", r.latencyMs},
          {"attempt", r.attempt}};
}

ChoiceRecord choiceRecordFromJson(const nlohmann::json& j) {
  ChoiceRecord r;
  r.scenarioId = j.at("scenarioId").get<std::string>();
  r.modelName = j.at("modelName").get<std::string>();
  r.rawText = j.at("rawText").get<std::string>();
  auto parsed = classificationFromName(j.at("parsed").get<std::string>());
  if (!parsed) throw IoError("unknown parsed label: " + j.at("parsed").get<std::string>());
  r.parsed = *parsed;
  r.requestTimestamp = j.value("requestTimestamp", "");
  r.latencyMs = j.value("latencyMs", int64_t{0});
  r.attempt = j.value("attempt", 1);
  if (r.attempt < 1) throw IoError("attempt must be >= 1");
  return r;
}

std::vector<ChoiceRecord> readResponseLog(const std::filesystem::path& path,
                                          std::size_t* skipped) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open response log: " + path.string());
  std::vector<ChoiceRecord> records;
  std::size_t bad = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(choiceRecordFromJson(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      ++bad;  // tolerate a torn tail line from an interrupted run
    }
  }
  if (skipped) *skipped = bad;
  return records;
}

}  // namespace mm
