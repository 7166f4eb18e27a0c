// Exercises the extern-C surface the way an FFI consumer would: only
// mmeval.h plus the standard library.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mmeval.h"

using nlohmann::json;

namespace {

struct CTempDir {
  std::filesystem::path path;
  CTempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "mmeval-capi.XXXXXX").string();
    REQUIRE(::mkdtemp(tmpl.data()) != nullptr);
    path = tmpl;
  }
  ~CTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string takeString(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  mm_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version strings are exposed") {
  CHECK(std::strlen(mm_library_version()) > 0);
  CHECK(std::strcmp(mm_generator_version(), "1.0.0") == 0);
  CHECK(std::strcmp(mm_ruleset_version(), "1.0.0") == 0);
}

TEST_CASE("deck lifecycle through opaque handles") {
  mm_deck* deck = nullptr;
  REQUIRE(mm_deck_generate(R"({"count":40,"seed":3})", &deck) == MM_OK);
  REQUIRE(deck != nullptr);
  CHECK(mm_deck_size(deck) == 40);

  size_t violations = 99;
  CHECK(mm_deck_validate(deck, &violations) == MM_OK);
  CHECK(violations == 0);

  char* scenarioJson = nullptr;
  REQUIRE(mm_deck_scenario_json(deck, 0, &scenarioJson) == MM_OK);
  const json s = json::parse(takeString(scenarioJson));
  CHECK(s.contains("focalDimension"));
  CHECK(s.at("generatorVersion") == "1.0.0");

  char* prompt = nullptr;
  REQUIRE(mm_render_prompt(deck, 0, 0, &prompt) == MM_OK);
  const std::string text = takeString(prompt);
  CHECK(text.find("(Case 1)") != std::string::npos);
  CHECK(text.find("(Case 2)") != std::string::npos);
  CHECK(text.find("rationale") == std::string::npos);

  char* withRationale = nullptr;
  REQUIRE(mm_render_prompt(deck, 0, 1, &withRationale) == MM_OK);
  CHECK(takeString(withRationale).find("Additionally, provide a rationale") !=
        std::string::npos);

  CHECK(mm_deck_scenario_json(deck, 10000, &scenarioJson) == MM_ERR_USAGE);
  CHECK(std::strlen(mm_last_error()) > 0);

  CTempDir tmp;
  REQUIRE(mm_deck_save(deck, tmp.file("deck.jsonl").c_str()) == MM_OK);
  mm_deck* loaded = nullptr;
  REQUIRE(mm_deck_load(tmp.file("deck.jsonl").c_str(), &loaded) == MM_OK);
  CHECK(mm_deck_size(loaded) == 40);
  mm_deck_free(loaded);
  mm_deck_free(deck);
}

TEST_CASE("bad inputs surface as usage errors with messages") {
  mm_deck* deck = nullptr;
  CHECK(mm_deck_generate("not json", &deck) == MM_ERR_USAGE);
  CHECK(std::strlen(mm_last_error()) > 0);
  CHECK(mm_deck_generate(R"({"count":0})", &deck) == MM_ERR_USAGE);
  CHECK(mm_deck_load("/nonexistent/deck.jsonl", &deck) == MM_ERR_IO);
}

TEST_CASE("classification is exposed") {
  CHECK(mm_classify("Case 1") == 1);
  CHECK(mm_classify("I would choose Case 2 because it spares more lives.") == 2);
  CHECK(mm_classify("I cannot decide.") == 0);
  CHECK(mm_classify(nullptr) == 0);
}

TEST_CASE("distance is exposed") {
  double a[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  double b[9] = {0, 0, 0, 0.3, 0, 0.4, 0, 0, 0};
  double d = -1;
  REQUIRE(mm_distance(a, b, &d) == MM_OK);
  CHECK(d == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("full pipeline through the command interface") {
  CTempDir tmp;
  json config{
      {"manifest", tmp.file("manifest.json")},
      {"generate", {{"count", 300}, {"seed", 9}, {"deck", tmp.file("deck.jsonl")}}},
      {"run",
       {{"deck", tmp.file("deck.jsonl")},
        {"log", tmp.file("responses.jsonl")},
        {"concurrency", 2},
        {"respondent",
         {{"kind", "synthetic"},
          {"modelName", "capi-agent"},
          {"policy",
           {{"orderedRules", json::array({"spareLargerGroup"})},
            {"tieBreak", {{"kind", "coinFlip"}, {"seed", 1}}}}}}}}},
      {"analyze",
       {{"deck", tmp.file("deck.jsonl")},
        {"log", tmp.file("responses.jsonl")},
        {"outJson", tmp.file("amce.json")},
        {"outCsv", tmp.file("amce.csv")}}}};

  char* result = nullptr;
  REQUIRE(mm_cmd_generate(config.dump().c_str(), &result) == MM_OK);
  CHECK(json::parse(takeString(result)).at("count") == 300);

  REQUIRE(mm_cmd_run(config.dump().c_str(), &result) == MM_OK);
  CHECK(json::parse(takeString(result)).at("completed") == 300);

  REQUIRE(mm_cmd_analyze(config.dump().c_str(), &result) == MM_OK);
  const json analysis = json::parse(takeString(result));
  CHECK(analysis.at("validity").at("rate") == 1.0);

  std::ifstream amceIn(tmp.file("amce.json"));
  json amce;
  amceIn >> amce;
  CHECK(amce.at("attributes").at("nCharacters").at("deltaP") == 1.0);

  // comparing a profile against itself: distance zero, PCA skipped
  config["compare"] = {
      {"profiles", json::array({tmp.file("amce.json"), tmp.file("amce.json")})},
      {"outJson", tmp.file("compare.json")},
      {"distancesCsv", tmp.file("distances.csv")},
      {"pcaCsv", tmp.file("pca.csv")},
      {"figuresDir", nullptr}};
  REQUIRE(mm_cmd_compare(config.dump().c_str(), &result) == MM_OK);
  const json cmp = json::parse(takeString(result));
  CHECK(cmp.at("pcaComputed") == false);

  std::ifstream cmpIn(tmp.file("compare.json"));
  json compareDoc;
  cmpIn >> compareDoc;
  CHECK(compareDoc.at("pairwiseDistances").at(0).at(1) == 0.0);

  REQUIRE(mm_cmd_report(json{{"manifest", tmp.file("manifest.json")},
                             {"report",
                              {{"out", tmp.file("report.md")},
                               {"amce", json::array({tmp.file("amce.json")})},
                               {"compare", tmp.file("compare.json")}}}}
                            .dump()
                            .c_str(),
                        &result) == MM_OK);
  mm_string_free(result);
  CHECK(std::filesystem::exists(tmp.file("report.md")));
}

TEST_CASE("command errors map to status codes") {
  char* result = nullptr;
  CHECK(mm_cmd_generate("{}", &result) == MM_ERR_USAGE);         // count missing
  CHECK(mm_cmd_generate("not json", &result) == MM_ERR_USAGE);   // unparseable
  CHECK(mm_cmd_analyze(R"({"analyze":{"deck":"/nonexistent"}})", &result) == MM_ERR_IO);
}

TEST_CASE("corpus command is exposed") {
  CTempDir tmp;
  std::ofstream out(tmp.file("corpus.jsonl"));
  out << R"({"text":"Case 2","label":"case2"})" << "\n";
  out.close();
  const json config{{"corpus", {{"file", tmp.file("corpus.jsonl")}}}};
  char* result = nullptr;
  REQUIRE(mm_cmd_corpus(config.dump().c_str(), &result) == MM_OK);
  CHECK(json::parse(takeString(result)).at("total") == 1);
}
