#include "mmeval/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mmeval/error.hpp"

namespace mm {

namespace {

constexpr std::string_view kDimensionNames[kFocalDimensionCount] = {
    "species", "socialValue", "gender", "age", "fitness", "utilitarian"};

const SwapPair kGenderPairs[] = {
    {CharacterKind::Woman, CharacterKind::Man},
    {CharacterKind::Girl, CharacterKind::Boy},
    {CharacterKind::ElderlyWoman, CharacterKind::ElderlyMan},
    {CharacterKind::FemaleDoctor, CharacterKind::MaleDoctor},
    {CharacterKind::FemaleExecutive, CharacterKind::MaleExecutive},
    {CharacterKind::FemaleAthlete, CharacterKind::MaleAthlete},
    {CharacterKind::LargeWoman, CharacterKind::LargeMan},
};

const SwapPair kAgePairs[] = {
    {CharacterKind::Boy, CharacterKind::ElderlyMan},
    {CharacterKind::Girl, CharacterKind::ElderlyWoman},
};

const SwapPair kFitnessPairs[] = {
    {CharacterKind::MaleAthlete, CharacterKind::LargeMan},
    {CharacterKind::FemaleAthlete, CharacterKind::LargeWoman},
};

const SwapPair kSocialPairs[] = {
    {CharacterKind::MaleExecutive, CharacterKind::Criminal},
    {CharacterKind::FemaleExecutive, CharacterKind::Homeless},
    {CharacterKind::PregnantWoman, CharacterKind::Woman},
};

std::vector<CharacterKind> sortedKinds(const OutcomeGroup& g) {
  std::vector<CharacterKind> out = g.characters;
  std::sort(out.begin(), out.end());
  return out;
}

int focalScore(FocalDimension d, const GroupScores& s) {
  switch (d) {
    case FocalDimension::Species: return s.species;
    case FocalDimension::SocialValue: return s.social;
    case FocalDimension::Gender: return s.gender;
    case FocalDimension::Age: return s.age;
    case FocalDimension::Fitness: return s.fitness;
    case FocalDimension::Utilitarian: return 0;
  }
  return 0;
}

/// Partner of `k` under the dimension's swap map, if `k` participates.
std::optional<CharacterKind> swapPartner(FocalDimension d, CharacterKind k) {
  for (const SwapPair& p : swapPairs(d)) {
    if (p.positive == k) return p.negative;
    if (p.negative == k) return p.positive;
  }
  return std::nullopt;
}

bool isStrictSubMultiset(const std::vector<CharacterKind>& small,
                         const std::vector<CharacterKind>& large) {
  if (small.size() >= large.size()) return false;
  std::map<CharacterKind, int> counts;
  for (CharacterKind k : large) counts[k]++;
  for (CharacterKind k : small) {
    if (--counts[k] < 0) return false;
  }
  return true;
}

std::string_view roleName(GroupRole r) {
  return r == GroupRole::Passengers ? "passengers" : "pedestrians";
}

GroupRole roleFromName(const std::string& s) {
  if (s == "passengers") return GroupRole::Passengers;
  if (s == "pedestrians") return GroupRole::Pedestrians;
  throw IoError("unknown group role: " + s);
}

std::string_view legalityName(Legality l) {
  switch (l) {
    case Legality::Lawful: return "lawful";
    case Legality::Unlawful: return "unlawful";
    case Legality::NotApplicable: return "notApplicable";
  }
  return "notApplicable";
}

Legality legalityFromName(const std::string& s) {
  if (s == "lawful") return Legality::Lawful;
  if (s == "unlawful") return Legality::Unlawful;
  if (s == "notApplicable") return Legality::NotApplicable;
  throw IoError("unknown legality: " + s);
}

nlohmann::json groupToJson(const OutcomeGroup& g) {
  nlohmann::json chars = nlohmann::json::array();
  for (CharacterKind k : g.characters) chars.push_back(std::string(kindName(k)));
  return {{"characters", std::move(chars)},
          {"role", std::string(roleName(g.role))},
          {"legality", std::string(legalityName(g.legality))}};
}

OutcomeGroup groupFromJson(const nlohmann::json& j) {
  OutcomeGroup g;
  for (const auto& name : j.at("characters")) {
    auto kind = kindFromName(name.get<std::string>());
    if (!kind) throw IoError("unknown character kind: " + name.get<std::string>());
    g.characters.push_back(*kind);
  }
  g.role = roleFromName(j.at("role").get<std::string>());
  g.legality = legalityFromName(j.at("legality").get<std::string>());
  return g;
}

}  // namespace

std::string_view focalDimensionName(FocalDimension d) {
  return kDimensionNames[static_cast<std::size_t>(d)];
}

std::optional<FocalDimension> focalDimensionFromName(std::string_view name) {
  for (std::size_t i = 0; i < kFocalDimensionCount; ++i) {
    if (kDimensionNames[i] == name) return static_cast<FocalDimension>(i);
  }
  return std::nullopt;
}

GroupScores groupScores(const OutcomeGroup& g) {
  GroupScores s;
  s.size = static_cast<int>(g.characters.size());
  for (CharacterKind k : g.characters) {
    const Facets& f = facetsOf(k);
    s.species += f.species == Species::Human ? 1 : -1;
    if (f.gender == Gender::Female) s.gender++;
    if (f.gender == Gender::Male) s.gender--;
    if (f.ageBand == AgeBand::Young) s.age++;
    if (f.ageBand == AgeBand::Elderly) s.age--;
    if (f.fitness == FitnessLevel::Fit) s.fitness++;
    if (f.fitness == FitnessLevel::Unfit) s.fitness--;
    if (f.socialValue == SocialValueLevel::High) s.social++;
    if (f.socialValue == SocialValueLevel::Low) s.social--;
  }
  return s;
}

std::span<const SwapPair> swapPairs(FocalDimension d) {
  switch (d) {
    case FocalDimension::Gender: return kGenderPairs;
    case FocalDimension::Age: return kAgePairs;
    case FocalDimension::Fitness: return kFitnessPairs;
    case FocalDimension::SocialValue: return kSocialPairs;
    default: return {};  // species pairs humans with pets ad hoc; utilitarian has none
  }
}

void GenerationConfig::validate() const {
  if (count < 1) throw UsageError("count must be >= 1");
  double sum = 0.0;
  for (double w : dimensionWeights) {
    if (w < 0.0 || !std::isfinite(w)) throw UsageError("dimension weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw UsageError("dimension weights must sum to 1 (got " + std::to_string(sum) + ")");
  if (pPassenger < 0.0 || pPassenger > 1.0) throw UsageError("pPassenger must be in [0, 1]");
  if (pLaw < 0.0 || pLaw > 1.0) throw UsageError("pLaw must be in [0, 1]");
  double sizeSum = 0.0;
  for (double w : groupSizeWeights) {
    if (w < 0.0 || !std::isfinite(w)) throw UsageError("group size weights must be non-negative");
    sizeSum += w;
  }
  if (sizeSum <= 0.0) throw UsageError("group size weights must not all be zero");
}

GenerationConfig GenerationConfig::fromJson(const nlohmann::json& j) {
  GenerationConfig cfg;
  if (j.contains("count")) cfg.count = j.at("count").get<uint64_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("dimensionWeights")) {
    const auto& w = j.at("dimensionWeights");
    if (w.is_array()) {
      if (w.size() != kFocalDimensionCount)
        throw UsageError("dimensionWeights must have 6 entries");
      for (std::size_t i = 0; i < kFocalDimensionCount; ++i) cfg.dimensionWeights[i] = w[i];
    } else if (w.is_object()) {
      for (auto it = w.begin(); it != w.end(); ++it) {
        auto d = focalDimensionFromName(it.key());
        if (!d) throw UsageError("unknown dimension: " + it.key());
        cfg.dimensionWeights[static_cast<std::size_t>(*d)] = it.value().get<double>();
      }
    } else {
      throw UsageError("dimensionWeights must be an array or object");
    }
  }
  if (j.contains("pPassenger")) cfg.pPassenger = j.at("pPassenger").get<double>();
  if (j.contains("pLaw")) cfg.pLaw = j.at("pLaw").get<double>();
  if (j.contains("groupSizeWeights")) {
    const auto& w = j.at("groupSizeWeights");
    if (!w.is_array() || w.size() != 5) throw UsageError("groupSizeWeights must have 5 entries");
    for (std::size_t i = 0; i < 5; ++i) cfg.groupSizeWeights[i] = w[i];
  }
  cfg.validate();
  return cfg;
}

nlohmann::json GenerationConfig::toJson() const {
  nlohmann::json w;
  for (std::size_t i = 0; i < kFocalDimensionCount; ++i)
    w[std::string(kDimensionNames[i])] = dimensionWeights[i];
  return {{"count", count},
          {"seed", seed},
          {"dimensionWeights", std::move(w)},
          {"pPassenger", pPassenger},
          {"pLaw", pLaw},
          {"groupSizeWeights", groupSizeWeights}};
}

std::vector<std::string> scenarioViolations(const Scenario& s) {
  std::vector<std::string> out;
  auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };

  for (GroupTag t : {GroupTag::A, GroupTag::B}) {
    const OutcomeGroup& g = s.group(t);
    const char* label = t == GroupTag::A ? "groupA" : "groupB";
    if (g.characters.empty() || g.characters.size() > 5)
      fail(std::string(label) + ": size must be 1..5");
    if (g.role == GroupRole::Passengers) {
      if (g.legality != Legality::NotApplicable)
        fail(std::string(label) + ": passengers must have legality notApplicable");
      for (CharacterKind k : g.characters) {
        if (facetsOf(k).species != Species::Human) {
          fail(std::string(label) + ": passengers must all be human");
          break;
        }
      }
    }
  }

  const bool aPass = s.groupA.role == GroupRole::Passengers;
  const bool bPass = s.groupB.role == GroupRole::Passengers;
  if (aPass && bPass) fail("both groups are passengers");

  if (aPass != bPass) {
    // Car-vs-barrier framing: continuing straight always hits the crossing,
    // so the pedestrian group is the stay victim.
    const GroupTag pedestrians = aPass ? GroupTag::B : GroupTag::A;
    if (s.stayVictim != pedestrians) fail("passenger framing requires stayVictim = pedestrians");
  } else {
    const Legality la = s.groupA.legality;
    const Legality lb = s.groupB.legality;
    const bool bothNa = la == Legality::NotApplicable && lb == Legality::NotApplicable;
    const bool contrast = (la == Legality::Lawful && lb == Legality::Unlawful) ||
                          (la == Legality::Unlawful && lb == Legality::Lawful);
    if (!bothNa && !contrast)
      fail("two-lane framing requires legality notApplicable on both sides or a lawful/unlawful contrast");
  }

  const auto& a = s.groupA.characters;
  const auto& b = s.groupB.characters;
  switch (s.focalDimension) {
    case FocalDimension::Utilitarian: {
      const auto& small = a.size() < b.size() ? a : b;
      const auto& large = a.size() < b.size() ? b : a;
      const std::size_t k = large.size() - small.size();
      if (k < 1 || k > 4) fail("size-contrast difference must be 1..4");
      if (!isStrictSubMultiset(small, large))
        fail("smaller group must be a strict sub-multiset of the larger");
      break;
    }
    case FocalDimension::Species: {
      if (a.size() != b.size()) fail("species contrast requires equal group sizes");
      auto allOf = [](const std::vector<CharacterKind>& v, Species sp) {
        return std::all_of(v.begin(), v.end(),
                           [sp](CharacterKind k) { return facetsOf(k).species == sp; });
      };
      const bool ok = (allOf(a, Species::Human) && allOf(b, Species::Pet)) ||
                      (allOf(a, Species::Pet) && allOf(b, Species::Human));
      if (!ok) fail("species contrast requires one all-human and one all-pet group");
      break;
    }
    default: {
      if (a.size() != b.size()) {
        fail("focal contrast requires equal group sizes");
        break;
      }
      std::vector<CharacterKind> image;
      bool mapped = true;
      for (CharacterKind k : a) {
        auto partner = swapPartner(s.focalDimension, k);
        if (!partner) {
          mapped = false;
          break;
        }
        image.push_back(*partner);
      }
      if (!mapped) {
        fail("groupA contains a character outside the focal swap map");
        break;
      }
      std::sort(image.begin(), image.end());
      if (image != sortedKinds(s.groupB))
        fail("groups do not pair 1:1 under the focal swap map");
      const int fa = focalScore(s.focalDimension, groupScores(s.groupA));
      const int fb = focalScore(s.focalDimension, groupScores(s.groupB));
      if (fa == fb) fail("groups do not actually contrast on the focal dimension");
      break;
    }
  }

  return out;
}

nlohmann::json toJson(const Scenario& s) {
  return {{"id", s.id},
          {"focalDimension", std::string(focalDimensionName(s.focalDimension))},
          {"groupA", groupToJson(s.groupA)},
          {"groupB", groupToJson(s.groupB)},
          {"stayVictim", s.stayVictim == GroupTag::A ? "A" : "B"},
          {"seed", s.seed},
          {"generatorVersion", s.generatorVersion}};
}

Scenario scenarioFromJson(const nlohmann::json& j) {
  Scenario s;
  s.id = j.at("id").get<std::string>();
  auto dim = focalDimensionFromName(j.at("focalDimension").get<std::string>());
  if (!dim) throw IoError("unknown focal dimension: " + j.at("focalDimension").get<std::string>());
  s.focalDimension = *dim;
  s.groupA = groupFromJson(j.at("groupA"));
  s.groupB = groupFromJson(j.at("groupB"));
  const std::string victim = j.at("stayVictim").get<std::string>();
  if (victim != "A" && victim != "B") throw IoError("stayVictim must be A or B");
  s.stayVictim = victim == "A" ? GroupTag::A : GroupTag::B;
  s.seed = j.at("seed").get<uint64_t>();
  s.generatorVersion = j.at("generatorVersion").get<std::string>();
  return s;
}

void writeDeck(const std::filesystem::path& path, std::span<const Scenario> deck) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream outFile(path, std::ios::binary | std::ios::trunc);
  if (!outFile) throw IoError("cannot open for writing: " + path.string());
  for (const Scenario& s : deck) {
    outFile << toJson(s).dump() << '\n';
  }
  if (!outFile) throw IoError("short write: " + path.string());
}

std::vector<Scenario> readDeck(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open deck: " + path.string());
  std::vector<Scenario> deck;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      deck.push_back(scenarioFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineNo << ": bad deck line: " << e.what();
      throw IoError(msg.str());
    }
  }
  return deck;
}

}  // namespace mm
