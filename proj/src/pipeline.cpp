#include "mmeval/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <sstream>

#include "mmeval/adapters.hpp"
#include "mmeval/compare.hpp"
#include "mmeval/error.hpp"
#include "mmeval/generator.hpp"
#include "mmeval/parser.hpp"
#include "mmeval/render.hpp"
#include "mmeval/stats.hpp"
#include "mmeval/util.hpp"
#include "mmeval/version.hpp"

namespace mm {

namespace {

using nlohmann::json;

json sectionOf(const json& config, const char* name) {
  if (config.contains(name)) {
    if (!config.at(name).is_object()) throw UsageError(std::string(name) + " must be an object");
    return config.at(name);
  }
  return json::object();
}

std::string pathOr(const json& section, const char* key, const char* fallback) {
  return section.value(key, std::string(fallback));
}

std::string manifestPath(const json& config) {
  return config.value("manifest", std::string("manifest.json"));
}

json loadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return json{{"libraryVersion", std::string(kLibraryVersion)},
                {"generatorVersion", std::string(kGeneratorVersion)},
                {"ruleSetVersion", std::string(kRuleSetVersion)},
                {"commands", json::object()}};
  }
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw IoError("bad manifest " + path + ": " + e.what());
  }
  return m;
}

/// Records a command run: its config hash, timestamps, and the content
/// hash of every file it produced or consumed.
void updateManifest(const json& config, const char* command, const json& sectionConfig,
                    const std::vector<std::pair<std::string, std::string>>& files,
                    const json& extra = json::object()) {
  const std::string path = manifestPath(config);
  json m = loadManifest(path);
  json entry{{"configHash", "sha256:" + sha256Hex(sectionConfig.dump())},
             {"at", utcNowIso8601()}};
  json fileEntries = json::object();
  for (const auto& [role, filePath] : files) {
    json f{{"path", filePath}};
    if (std::filesystem::exists(filePath)) f["sha256"] = sha256HexOfFile(filePath);
    fileEntries[role] = std::move(f);
  }
  entry["files"] = std::move(fileEntries);
  for (auto it = extra.begin(); it != extra.end(); ++it) entry[it.key()] = it.value();
  m["commands"][command] = std::move(entry);
  m["updatedAt"] = utcNowIso8601();
  m["libraryVersion"] = std::string(kLibraryVersion);
  m["generatorVersion"] = std::string(kGeneratorVersion);
  m["ruleSetVersion"] = std::string(kRuleSetVersion);
  writeFile(path, m.dump(2) + "\n");
}

PhraseTable phrasesFrom(const json& section) {
  if (section.contains("phrases") && !section.at("phrases").is_null())
    return PhraseTable::fromJsonFile(section.at("phrases").get<std::string>());
  return PhraseTable::standard();
}

std::string modeName(PromptMode m) {
  return m == PromptMode::WithRationale ? "withRationale" : "choiceOnly";
}

PromptMode modeFrom(const json& section) {
  const std::string mode = section.value("mode", "choiceOnly");
  if (mode == "choiceOnly") return PromptMode::ChoiceOnly;
  if (mode == "withRationale") return PromptMode::WithRationale;
  throw UsageError("unknown prompt mode: " + mode);
}

json validityToJson(const ValidityStats& v, uint64_t transportFailures) {
  return {{"valid", v.valid},
          {"total", v.total},
          {"rate", v.rate},
          {"transportFailures", transportFailures}};
}

}  // namespace

json cmdGenerate(const json& config) {
  const json section = sectionOf(config, "generate");
  if (!section.contains("count"))
    throw UsageError("generate.count is required (use --n)");
  GenerationConfig cfg;
  try {
    cfg = GenerationConfig::fromJson(section);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad generate config: ") + e.what());
  }

  const std::string deckPath = pathOr(section, "deck", "deck.jsonl");
  const std::vector<Scenario> deck = generateDeck(cfg);
  writeDeck(deckPath, deck);

  updateManifest(config, "generate", section, {{"deck", deckPath}});
  return {{"deck", deckPath},
          {"count", deck.size()},
          {"sha256", sha256HexOfFile(deckPath)},
          {"generatorVersion", std::string(kGeneratorVersion)}};
}

json cmdRun(const json& config) {
  const json section = sectionOf(config, "run");
  if (!section.contains("respondent"))
    throw UsageError("run.respondent is required");
  const RespondentSpec spec = RespondentSpec::fromJson(section.at("respondent"));
  const std::string deckPath = pathOr(section, "deck", "deck.jsonl");
  const std::string logPath = pathOr(section, "log", "responses.jsonl");
  const int concurrency = section.value("concurrency", 4);
  const PromptMode mode = modeFrom(section);
  const PhraseTable phrases = phrasesFrom(section);

  const std::vector<Scenario> deck = readDeck(deckPath);
  if (deck.empty()) throw EmptyResultError("deck is empty: " + deckPath);

  const CampaignSummary summary = runCampaign(spec, deck, mode, logPath, concurrency, phrases);
  if (summary.requested > 0 && summary.completed == 0)
    throw TransportError("campaign completed no queries (" + std::to_string(summary.failed) +
                         " failed)");

  json redactedSpec = spec.toJson();  // carries only the env var name, never the key
  updateManifest(config, "run", section, {{"deck", deckPath}, {"log", logPath}},
                 {{"respondent", redactedSpec}, {"mode", modeName(mode)}});
  return {{"requested", summary.requested},
          {"completed", summary.completed},
          {"failed", summary.failed},
          {"log", logPath}};
}

json cmdAnalyze(const json& config) {
  const json section = sectionOf(config, "analyze");
  const std::string deckPath = pathOr(section, "deck", "deck.jsonl");
  const std::string logPath = pathOr(section, "log", "responses.jsonl");
  const std::string outJson = pathOr(section, "outJson", "amce.json");
  const std::string outCsv = pathOr(section, "outCsv", "amce.csv");

  const std::vector<Scenario> deck = readDeck(deckPath);
  std::size_t torn = 0;
  std::vector<ChoiceRecord> records = readResponseLog(logPath, &torn);
  if (records.empty()) throw EmptyResultError("response log has no records: " + logPath);

  // Canonical order: analysis outputs must not depend on worker scheduling.
  std::sort(records.begin(), records.end(),
            [](const ChoiceRecord& a, const ChoiceRecord& b) { return a.scenarioId < b.scenarioId; });

  const ValidityStats validity = validRate(records);
  uint64_t transportFailures = 0;
  std::vector<ChoiceRecord> valid;
  valid.reserve(records.size());
  for (const ChoiceRecord& r : records) {
    if (r.parsed == Classification::Invalid) {
      if (r.rawText.empty()) transportFailures++;
      continue;
    }
    valid.push_back(r);
  }

  std::string modelName = section.value("modelName", "");
  if (modelName.empty() && !records.empty()) modelName = records.front().modelName;

  const std::string generatorVersion =
      deck.empty() ? std::string(kGeneratorVersion) : deck.front().generatorVersion;

  if (valid.empty()) {
    // Validity block is still worth persisting; the AMCE table is not
    // estimable from zero definitive selections.
    json out{{"modelName", modelName},
             {"generatorVersion", generatorVersion},
             {"ruleSetVersion", std::string(kRuleSetVersion)},
             {"validity", validityToJson(validity, transportFailures)}};
    writeFile(outJson, out.dump(2) + "\n");
    updateManifest(config, "analyze", section,
                   {{"deck", deckPath}, {"log", logPath}, {"amceJson", outJson}});
    throw EmptyResultError("no valid responses; wrote validity block to " + outJson);
  }

  const std::vector<ProfileRow> rows = codeProfiles(deck, valid);
  AmceProfile profile = estimateAmce(rows);
  profile.modelName = modelName;

  json out = amceProfileToJson(profile);
  out["generatorVersion"] = generatorVersion;
  out["ruleSetVersion"] = std::string(kRuleSetVersion);
  out["validity"] = validityToJson(validity, transportFailures);
  writeFile(outJson, out.dump(2) + "\n");
  writeFile(outCsv, amceProfileToCsv(profile));

  updateManifest(config, "analyze", section,
                 {{"deck", deckPath}, {"log", logPath}, {"amceJson", outJson}, {"amceCsv", outCsv}});
  return {{"amceJson", outJson},
          {"amceCsv", outCsv},
          {"validity", validityToJson(validity, transportFailures)},
          {"tornLogLines", torn}};
}

json cmdCompare(const json& config) {
  const json section = sectionOf(config, "compare");
  if (!section.contains("profiles") || !section.at("profiles").is_array())
    throw UsageError("compare.profiles must list AMCE profile JSON files");

  std::vector<ProfileVector> profiles;
  json profileVersions = json::object();
  for (const auto& p : section.at("profiles")) {
    const std::string path = p.get<std::string>();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile: " + path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw IoError("bad profile JSON " + path + ": " + e.what());
    }
    ProfileVector vec = profileVectorFromJson(doc, std::filesystem::path(path).stem().string());
    profileVersions[vec.label] = {{"generatorVersion", doc.value("generatorVersion", "")},
                                  {"ruleSetVersion", doc.value("ruleSetVersion", "")}};
    profiles.push_back(std::move(vec));
  }

  std::optional<BaselineProfile> baseline;
  if (section.contains("baseline") && !section.at("baseline").is_null())
    baseline = loadBaseline(section.at("baseline").get<std::string>());

  if (profiles.size() < 2 && !baseline)
    throw UsageError("compare needs at least two profiles, or one profile plus a baseline");

  const ComparisonReport report = buildComparisonReport(std::move(profiles), std::move(baseline));

  const std::string outJson = pathOr(section, "outJson", "compare.json");
  const std::string outDistances = pathOr(section, "distancesCsv", "distances.csv");
  const std::string outPca = pathOr(section, "pcaCsv", "pca.csv");

  json doc = comparisonReportToJson(report);
  doc["libraryVersion"] = std::string(kLibraryVersion);
  doc["profileVersions"] = profileVersions;
  writeFile(outJson, doc.dump(2) + "\n");
  writeFile(outDistances, distancesCsv(report));
  writeFile(outPca, pcaCsv(report));

  std::vector<std::pair<std::string, std::string>> files{
      {"compareJson", outJson}, {"distancesCsv", outDistances}, {"pcaCsv", outPca}};

  if (!section.contains("figuresDir") || !section.at("figuresDir").is_null()) {
    const std::string figuresDir = pathOr(section, "figuresDir", "figures");
    const std::string distancesFig = figuresDir + "/distances.svg";
    const std::string pcaFig = figuresDir + "/pca.svg";
    writeFile(distancesFig, distancesSvg(report));
    writeFile(pcaFig, pcaSvg(report));
    files.emplace_back("distancesSvg", distancesFig);
    files.emplace_back("pcaSvg", pcaFig);
  }

  updateManifest(config, "compare", section, files);
  json result{{"compareJson", outJson},
              {"labels", report.pointLabels()},
              {"pcaComputed", report.pca.has_value()}};
  if (report.pcaNotice) result["pcaNotice"] = *report.pcaNotice;
  return result;
}

json cmdRationale(const json& config) {
  json section = sectionOf(config, "rationale");
  if (!section.contains("respondent")) {
    // Probes usually re-query the model that made the choices.
    const json runSection = sectionOf(config, "run");
    if (runSection.contains("respondent")) {
      section["respondent"] = runSection.at("respondent");
    } else {
      throw UsageError("rationale.respondent is required (or set run.respondent)");
    }
  }
  if (!section.contains("focal")) throw UsageError("rationale.focal is required (fitness or utilitarian)");
  const std::string focalName = section.at("focal").get<std::string>();
  const auto focal = focalDimensionFromName(focalName);
  if (!focal || (*focal != FocalDimension::Fitness && *focal != FocalDimension::Utilitarian))
    throw UsageError("rationale.focal must be fitness or utilitarian");

  const RespondentSpec spec = RespondentSpec::fromJson(section.at("respondent"));
  const std::string deckPath = pathOr(section, "deck", "deck.jsonl");
  const std::string logPath = pathOr(section, "log", "responses.jsonl");
  const std::string outPath = pathOr(section, "out", "rationales.jsonl");
  const int concurrency = section.value("concurrency", 4);
  const PhraseTable phrases = phrasesFrom(section);

  const std::vector<Scenario> deck = readDeck(deckPath);
  const std::vector<ChoiceRecord> records = readResponseLog(logPath);

  // Prior choices are reused, never re-asked: only scenarios whose
  // recorded choice spared the designated side are probed.
  std::unordered_map<std::string, const ChoiceRecord*> byId;
  for (const ChoiceRecord& r : records) byId.emplace(r.scenarioId, &r);

  std::vector<Scenario> qualifying;
  for (const Scenario& s : filterForRationaleProbe(deck, focal)) {
    auto it = byId.find(s.id);
    if (it == byId.end() || it->second->parsed == Classification::Invalid) continue;
    const GroupTag spared = it->second->parsed == Classification::Case1
                                ? otherTag(s.stayVictim)
                                : s.stayVictim;
    const GroupScores mine = groupScores(s.group(spared));
    const GroupScores theirs = groupScores(s.group(otherTag(spared)));
    const bool designated = *focal == FocalDimension::Fitness
                                ? mine.fitness < theirs.fitness  // spared the less fit
                                : mine.size < theirs.size;       // spared the smaller group
    if (designated) qualifying.push_back(s);
  }

  json result{{"focal", focalName}, {"qualifying", qualifying.size()}, {"log", outPath}};
  if (qualifying.empty()) {
    writeFile(outPath, "");
    result["notice"] = "no qualifying scenarios for the " + focalName + " probe";
    updateManifest(config, "rationale", section, {{"rationaleLog", outPath}});
    return result;
  }

  const CampaignSummary summary =
      runCampaign(spec, qualifying, PromptMode::WithRationale, outPath, concurrency, phrases);
  result["requested"] = summary.requested;
  result["completed"] = summary.completed;
  result["failed"] = summary.failed;

  updateManifest(config, "rationale", section,
                 {{"deck", deckPath}, {"choiceLog", logPath}, {"rationaleLog", outPath}},
                 {{"respondent", spec.toJson()}});
  return result;
}

json cmdCorpus(const json& config) {
  const json section = sectionOf(config, "corpus");
  if (!section.contains("file")) throw UsageError("corpus.file is required");
  const std::string path = section.at("file").get<std::string>();

  json mismatches = json::array();
  uint64_t total = 0;
  for (const std::string& line : readLines(path)) {
    if (line.empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("bad corpus line in " + path + ": " + e.what());
    }
    const std::string text = entry.at("text").get<std::string>();
    const std::string label = entry.at("label").get<std::string>();
    if (!classificationFromName(label))
      throw UsageError("unknown corpus label: " + label);
    total++;
    const Classification got = classify(text);
    if (std::string(classificationName(got)) != label) {
      mismatches.push_back({{"text", text}, {"expected", label},
                            {"got", std::string(classificationName(got))}});
    }
  }
  if (total == 0) throw EmptyResultError("corpus is empty: " + path);

  json result{{"file", path},
              {"total", total},
              {"mismatches", mismatches},
              {"ruleSetVersion", std::string(kRuleSetVersion)}};
  if (!mismatches.empty()) {
    std::string msg = "corpus has " + std::to_string(mismatches.size()) +
                      " mismatches against rule set " + std::string(kRuleSetVersion);
    msg += " (first: \"" + mismatches[0]["text"].get<std::string>() + "\" expected " +
           mismatches[0]["expected"].get<std::string>() + ", got " +
           mismatches[0]["got"].get<std::string>() + ")";
    throw UsageError(msg);
  }
  return result;
}

json cmdReport(const json& config) {
  const json section = sectionOf(config, "report");
  const std::string outPath = pathOr(section, "out", "report.md");

  std::ostringstream md;
  md << "# Dilemma evaluation report\n\n";
  md << "Generated " << utcNowIso8601() << " (library " << kLibraryVersion << ", generator "
     << kGeneratorVersion << ", rules " << kRuleSetVersion << ")\n";

  std::vector<std::string> amcePaths;
  if (section.contains("amce")) {
    for (const auto& p : section.at("amce")) amcePaths.push_back(p.get<std::string>());
  } else if (std::filesystem::exists("amce.json")) {
    amcePaths.push_back("amce.json");
  }

  for (const std::string& path : amcePaths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile: " + path);
    json doc;
    in >> doc;
    md << "\n## Model: " << doc.value("modelName", path) << "\n\n";
    if (doc.contains("validity")) {
      const auto& v = doc.at("validity");
      md << "Valid responses: " << v.at("valid") << " / " << v.at("total") << " (rate "
         << v.at("rate") << ")\n\n";
    }
    if (doc.contains("attributes")) {
      md << "| attribute | deltaP | se | n |\n|---|---|---|---|\n";
      for (Attribute a : allAttributes()) {
        const std::string name(attributeName(a));
        const auto& est = doc.at("attributes").at(name);
        if (est.is_null()) {
          md << "| " << name << " | - | - | 0 |\n";
        } else {
          md << "| " << name << " | " << est.at("deltaP") << " | " << est.at("se") << " | "
             << est.at("n") << " |\n";
        }
      }
    }
  }

  const std::string comparePath = section.value("compare", std::string("compare.json"));
  if (std::filesystem::exists(comparePath)) {
    std::ifstream in(comparePath);
    json doc;
    in >> doc;
    md << "\n## Comparison\n\n";
    if (doc.contains("distanceToBaseline") && !doc.at("distanceToBaseline").is_null()) {
      md << "Distances to " << doc.value("baseline", "baseline") << ":\n\n";
      for (auto it = doc.at("distanceToBaseline").begin();
           it != doc.at("distanceToBaseline").end(); ++it) {
        md << "- " << it.key() << ": " << it.value() << "\n";
      }
    }
    if (doc.contains("pca") && !doc.at("pca").is_null()) {
      const auto& ratios = doc.at("pca").at("explainedVarianceRatio");
      md << "\nPCA explained variance: PC1 " << ratios.at(0) << ", PC2 " << ratios.at(1) << "\n";
    }
  }

  writeFile(outPath, md.str());
  updateManifest(config, "report", section, {{"report", outPath}});
  return {{"report", outPath}};
}

}  // namespace mm
