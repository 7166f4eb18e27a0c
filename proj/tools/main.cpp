// Command-line front end. Links only the C API (mmeval.h); all pipeline
// logic lives behind the shared library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mmeval.h"

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string configPath;
};

json loadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config " << path << "\n";
    std::exit(2);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config JSON: " << e.what() << "\n";
    std::exit(2);
  }
}

int exitCodeFor(mm_status status) {
  switch (status) {
    case MM_OK: return 0;
    case MM_ERR_USAGE: return 2;
    case MM_ERR_EMPTY: return 3;
    case MM_ERR_TRANSPORT: return 4;
    default: return 1;
  }
}

using CommandFn = mm_status (*)(const char*, char**);

int invoke(CommandFn fn, const json& config) {
  char* result = nullptr;
  const mm_status status = fn(config.dump().c_str(), &result);
  if (status == MM_OK) {
    if (result != nullptr) {
      std::cout << json::parse(result).dump(2) << "\n";
      mm_string_free(result);
    }
    return 0;
  }
  std::cerr << "error: " << mm_last_error() << "\n";
  if (result != nullptr) mm_string_free(result);
  return exitCodeFor(status);
}

/// Sets config[section][key] = value when the CLI flag was provided.
template <typename T>
void override_(json& config, const char* section, const char* key,
               const std::optional<T>& value) {
  if (value) config[section][key] = *value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generates driving-dilemma scenario decks, collects chat-model choices, and "
               "computes conjoint preference profiles"};
  app.require_subcommand(1);

  std::string configPath;
  app.add_option("-c,--config", configPath, "JSON config file; flags override its values");

  std::optional<std::string> manifest;
  app.add_option("--manifest", manifest, "manifest path (default manifest.json)");

  // generate
  auto* gen = app.add_subcommand("generate", "generate a scenario deck");
  std::optional<uint64_t> genCount;
  std::optional<uint64_t> genSeed;
  std::optional<std::string> genDeck;
  std::optional<double> genPPassenger, genPLaw;
  gen->add_option("--n,--count", genCount, "number of scenarios");
  gen->add_option("--seed", genSeed, "deck seed");
  gen->add_option("--deck", genDeck, "output deck path (deck.jsonl)");
  gen->add_option("--p-passenger", genPPassenger, "probability of the car-vs-barrier framing");
  gen->add_option("--p-law", genPLaw, "probability of a legality contrast");

  // run
  auto* run = app.add_subcommand("run", "query a respondent over a deck");
  std::optional<std::string> runDeck, runLog, runMode, runModel, runEndpoint, runFixture,
      runApiKeyEnv, runPhrases;
  std::optional<int> runConcurrency;
  std::optional<double> runTimeout;
  run->add_option("--deck", runDeck, "deck path");
  run->add_option("--log", runLog, "response log path (responses.jsonl)");
  run->add_option("--mode", runMode, "choiceOnly or withRationale");
  run->add_option("--concurrency", runConcurrency, "max in-flight requests");
  run->add_option("--model", runModel, "respondent model name");
  run->add_option("--endpoint", runEndpoint, "chat-completions endpoint URL (implies httpChat)");
  run->add_option("--fixture", runFixture, "replay fixture path (implies replay)");
  run->add_option("--api-key-env", runApiKeyEnv, "environment variable holding the API key");
  run->add_option("--timeout", runTimeout, "request timeout in seconds");
  run->add_option("--phrases", runPhrases, "phrase table JSON overriding the built-in wording");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "parse responses and estimate the preference profile");
  std::optional<std::string> anDeck, anLog, anOutJson, anOutCsv, anModel;
  analyze->add_option("--deck", anDeck, "deck path");
  analyze->add_option("--log", anLog, "response log path");
  analyze->add_option("--out-json", anOutJson, "profile output (amce.json)");
  analyze->add_option("--out-csv", anOutCsv, "profile output (amce.csv)");
  analyze->add_option("--model", anModel, "model name recorded in the profile");

  // compare
  auto* compare = app.add_subcommand("compare", "compare preference profiles");
  std::vector<std::string> cmpProfiles;
  std::optional<std::string> cmpBaseline, cmpOutJson, cmpFiguresDir;
  bool cmpNoFigures = false;
  compare->add_option("--profiles", cmpProfiles, "AMCE profile JSON files")->expected(-1);
  compare->add_option("--baseline", cmpBaseline, "baseline profile JSON (e.g. human reference)");
  compare->add_option("--out-json", cmpOutJson, "report output (compare.json)");
  compare->add_option("--figures-dir", cmpFiguresDir, "directory for SVG figures");
  compare->add_flag("--no-figures", cmpNoFigures, "skip SVG emission");

  // rationale
  auto* rationale = app.add_subcommand("rationale", "re-query qualifying scenarios for rationales");
  std::optional<std::string> ratDeck, ratLog, ratFocal, ratOut, ratPhrases;
  std::optional<int> ratConcurrency;
  rationale->add_option("--deck", ratDeck, "deck path");
  rationale->add_option("--log", ratLog, "choice log the probe conditions on");
  rationale->add_option("--focal", ratFocal, "fitness or utilitarian");
  rationale->add_option("--out", ratOut, "rationale log path (rationales.jsonl)");
  rationale->add_option("--concurrency", ratConcurrency, "max in-flight requests");
  rationale->add_option("--phrases", ratPhrases, "phrase table JSON overriding the built-in wording");

  // report
  auto* report = app.add_subcommand("report", "render a markdown summary of the artifacts");
  std::optional<std::string> repOut;
  std::vector<std::string> repAmce;
  report->add_option("--out", repOut, "report output path (report.md)");
  report->add_option("--amce", repAmce, "AMCE profile JSON files to include")->expected(-1);

  // corpus
  auto* corpus = app.add_subcommand("corpus", "re-validate a labeled completion corpus");
  std::optional<std::string> corpusFile;
  corpus->add_option("--file", corpusFile, "JSON Lines corpus of {text, label}");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  json config = loadConfig(configPath);
  if (manifest) config["manifest"] = *manifest;

  if (gen->parsed()) {
    if (genCount && *genCount == 0) {
      std::cerr << "error: --n must be >= 1\n";
      return 2;
    }
    override_(config, "generate", "count", genCount);
    override_(config, "generate", "seed", genSeed);
    override_(config, "generate", "deck", genDeck);
    override_(config, "generate", "pPassenger", genPPassenger);
    override_(config, "generate", "pLaw", genPLaw);
    return invoke(&mm_cmd_generate, config);
  }
  if (run->parsed()) {
    override_(config, "run", "deck", runDeck);
    override_(config, "run", "log", runLog);
    override_(config, "run", "mode", runMode);
    override_(config, "run", "concurrency", runConcurrency);
    override_(config, "run", "phrases", runPhrases);
    json& respondent = config["run"]["respondent"];
    if (!respondent.is_object()) respondent = json::object();
    if (runEndpoint) {
      respondent["kind"] = "httpChat";
      respondent["endpointUrl"] = *runEndpoint;
    }
    if (runFixture) {
      respondent["kind"] = "replay";
      respondent["fixturePath"] = *runFixture;
    }
    if (runModel) respondent["modelName"] = *runModel;
    if (runApiKeyEnv) respondent["apiKeyEnvVar"] = *runApiKeyEnv;
    if (runTimeout) respondent["timeoutSeconds"] = *runTimeout;
    return invoke(&mm_cmd_run, config);
  }
  if (analyze->parsed()) {
    override_(config, "analyze", "deck", anDeck);
    override_(config, "analyze", "log", anLog);
    override_(config, "analyze", "outJson", anOutJson);
    override_(config, "analyze", "outCsv", anOutCsv);
    override_(config, "analyze", "modelName", anModel);
    return invoke(&mm_cmd_analyze, config);
  }
  if (compare->parsed()) {
    if (!cmpProfiles.empty()) config["compare"]["profiles"] = cmpProfiles;
    override_(config, "compare", "baseline", cmpBaseline);
    override_(config, "compare", "outJson", cmpOutJson);
    override_(config, "compare", "figuresDir", cmpFiguresDir);
    if (cmpNoFigures) config["compare"]["figuresDir"] = nullptr;
    return invoke(&mm_cmd_compare, config);
  }
  if (rationale->parsed()) {
    override_(config, "rationale", "deck", ratDeck);
    override_(config, "rationale", "log", ratLog);
    override_(config, "rationale", "focal", ratFocal);
    override_(config, "rationale", "out", ratOut);
    override_(config, "rationale", "concurrency", ratConcurrency);
    override_(config, "rationale", "phrases", ratPhrases);
    return invoke(&mm_cmd_rationale, config);
  }
  if (report->parsed()) {
    override_(config, "report", "out", repOut);
    if (!repAmce.empty()) config["report"]["amce"] = repAmce;
    return invoke(&mm_cmd_report, config);
  }
  if (corpus->parsed()) {
    override_(config, "corpus", "file", corpusFile);
    return invoke(&mm_cmd_corpus, config);
  }
  return 2;
}
