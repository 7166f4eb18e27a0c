#include "mmeval.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "mmeval/compare.hpp"
#include "mmeval/error.hpp"
#include "mmeval/generator.hpp"
#include "mmeval/parser.hpp"
#include "mmeval/pipeline.hpp"
#include "mmeval/render.hpp"
#include "mmeval/scenario.hpp"
#include "mmeval/version.hpp"

struct mm_deck {
  std::vector<mm::Scenario> scenarios;
};

namespace {

thread_local std::string g_lastError;

char* dupString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
mm_status guard(Fn&& fn) {
  try {
    fn();
    g_lastError.clear();
    return MM_OK;
  } catch (const mm::UsageError& e) {
    g_lastError = e.what();
    return MM_ERR_USAGE;
  } catch (const mm::EmptyResultError& e) {
    g_lastError = e.what();
    return MM_ERR_EMPTY;
  } catch (const mm::TransportError& e) {
    g_lastError = e.what();
    return MM_ERR_TRANSPORT;
  } catch (const mm::IoError& e) {
    g_lastError = e.what();
    return MM_ERR_IO;
  } catch (const std::exception& e) {
    g_lastError = e.what();
    return MM_ERR_INTERNAL;
  } catch (...) {
    g_lastError = "unknown error";
    return MM_ERR_INTERNAL;
  }
}

using CommandFn = nlohmann::json (*)(const nlohmann::json&);

mm_status runCommand(CommandFn command, const char* configJson, char** outResultJson) {
  return guard([&] {
    if (configJson == nullptr) throw mm::UsageError("config JSON is null");
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(configJson);
    } catch (const nlohmann::json::exception& e) {
      throw mm::UsageError(std::string("bad config JSON: ") + e.what());
    }
    const nlohmann::json result = command(config);
    if (outResultJson != nullptr) *outResultJson = dupString(result.dump());
  });
}

}  // namespace

extern "C" {

const char* mm_library_version(void) { return mm::kLibraryVersion.data(); }
const char* mm_generator_version(void) { return mm::kGeneratorVersion.data(); }
const char* mm_ruleset_version(void) { return mm::kRuleSetVersion.data(); }

const char* mm_last_error(void) { return g_lastError.c_str(); }

void mm_string_free(char* s) { std::free(s); }

mm_status mm_deck_generate(const char* generate_config_json, mm_deck** out_deck) {
  return guard([&] {
    if (generate_config_json == nullptr || out_deck == nullptr)
      throw mm::UsageError("null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(generate_config_json);
    } catch (const nlohmann::json::exception& e) {
      throw mm::UsageError(std::string("bad generate config JSON: ") + e.what());
    }
    const mm::GenerationConfig cfg = mm::GenerationConfig::fromJson(j);
    auto deck = std::make_unique<mm_deck>();
    deck->scenarios = mm::generateDeck(cfg);
    *out_deck = deck.release();
  });
}

mm_status mm_deck_load(const char* path, mm_deck** out_deck) {
  return guard([&] {
    if (path == nullptr || out_deck == nullptr) throw mm::UsageError("null argument");
    auto deck = std::make_unique<mm_deck>();
    deck->scenarios = mm::readDeck(path);
    *out_deck = deck.release();
  });
}

mm_status mm_deck_save(const mm_deck* deck, const char* path) {
  return guard([&] {
    if (deck == nullptr || path == nullptr) throw mm::UsageError("null argument");
    mm::writeDeck(path, deck->scenarios);
  });
}

size_t mm_deck_size(const mm_deck* deck) {
  return deck == nullptr ? 0 : deck->scenarios.size();
}

mm_status mm_deck_scenario_json(const mm_deck* deck, size_t index, char** out_json) {
  return guard([&] {
    if (deck == nullptr || out_json == nullptr) throw mm::UsageError("null argument");
    if (index >= deck->scenarios.size()) throw mm::UsageError("scenario index out of range");
    *out_json = dupString(mm::toJson(deck->scenarios[index]).dump());
  });
}

mm_status mm_deck_validate(const mm_deck* deck, size_t* out_violations) {
  return guard([&] {
    if (deck == nullptr || out_violations == nullptr) throw mm::UsageError("null argument");
    size_t bad = 0;
    for (const mm::Scenario& s : deck->scenarios) {
      if (!mm::isValidScenario(s)) bad++;
    }
    *out_violations = bad;
  });
}

void mm_deck_free(mm_deck* deck) { delete deck; }

mm_status mm_render_prompt(const mm_deck* deck, size_t index, int with_rationale,
                           char** out_text) {
  return guard([&] {
    if (deck == nullptr || out_text == nullptr) throw mm::UsageError("null argument");
    if (index >= deck->scenarios.size()) throw mm::UsageError("scenario index out of range");
    const mm::PromptText prompt = mm::renderPrompt(
        deck->scenarios[index],
        with_rationale != 0 ? mm::PromptMode::WithRationale : mm::PromptMode::ChoiceOnly);
    *out_text = dupString(prompt.full);
  });
}

int mm_classify(const char* raw_text) {
  if (raw_text == nullptr) return 0;
  switch (mm::classify(raw_text)) {
    case mm::Classification::Case1: return 1;
    case mm::Classification::Case2: return 2;
    case mm::Classification::Invalid: return 0;
  }
  return 0;
}

mm_status mm_distance(const double a[9], const double b[9], double* out_distance) {
  return guard([&] {
    if (a == nullptr || b == nullptr || out_distance == nullptr)
      throw mm::UsageError("null argument");
    *out_distance = mm::euclideanDistance(std::span<const double>(a, 9),
                                          std::span<const double>(b, 9));
  });
}

mm_status mm_cmd_generate(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdGenerate, config_json, out_result_json);
}
mm_status mm_cmd_run(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdRun, config_json, out_result_json);
}
mm_status mm_cmd_analyze(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdAnalyze, config_json, out_result_json);
}
mm_status mm_cmd_compare(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdCompare, config_json, out_result_json);
}
mm_status mm_cmd_rationale(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdRationale, config_json, out_result_json);
}
mm_status mm_cmd_report(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdReport, config_json, out_result_json);
}
mm_status mm_cmd_corpus(const char* config_json, char** out_result_json) {
  return runCommand(&mm::cmdCorpus, config_json, out_result_json);
}

}  // extern "C"
