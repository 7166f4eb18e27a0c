#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmeval/characters.hpp"

namespace mm {

enum class FocalDimension : uint8_t { Species, SocialValue, Gender, Age, Fitness, Utilitarian };

inline constexpr std::size_t kFocalDimensionCount = 6;

std::string_view focalDimensionName(FocalDimension d);
std::optional<FocalDimension> focalDimensionFromName(std::string_view name);

enum class GroupRole : uint8_t { Passengers, Pedestrians };
enum class Legality : uint8_t { Lawful, Unlawful, NotApplicable };
enum class GroupTag : uint8_t { A, B };

inline GroupTag otherTag(GroupTag t) { return t == GroupTag::A ? GroupTag::B : GroupTag::A; }

struct OutcomeGroup {
  std::vector<CharacterKind> characters;  // 1..5 members
  GroupRole role = GroupRole::Pedestrians;
  Legality legality = Legality::NotApplicable;
};

/// One dilemma: the car continues straight and kills the stay-victim group,
/// or swerves and kills the other group.
struct Scenario {
  std::string id;
  FocalDimension focalDimension = FocalDimension::Species;
  OutcomeGroup groupA;
  OutcomeGroup groupB;
  GroupTag stayVictim = GroupTag::A;
  uint64_t seed = 0;
  std::string generatorVersion;

  const OutcomeGroup& group(GroupTag t) const { return t == GroupTag::A ? groupA : groupB; }
  OutcomeGroup& group(GroupTag t) { return t == GroupTag::A ? groupA : groupB; }

  /// True when one group rides in the car (car-vs-barrier framing).
  bool passengerFraming() const {
    return groupA.role == GroupRole::Passengers || groupB.role == GroupRole::Passengers;
  }
};

struct GenerationConfig {
  uint64_t count = 1;
  uint64_t seed = 0;
  // Indexed by FocalDimension; must sum to 1 within 1e-12.
  std::array<double, kFocalDimensionCount> dimensionWeights = {1.0 / 6, 1.0 / 6, 1.0 / 6,
                                                               1.0 / 6, 1.0 / 6, 1.0 / 6};
  double pPassenger = 0.5;
  double pLaw = 0.5;
  // Weights for group sizes 1..5 (smaller group, for size-contrast dilemmas).
  std::array<double, 5> groupSizeWeights = {1, 1, 1, 1, 1};

  /// Throws UsageError when any field is out of contract.
  void validate() const;

  static GenerationConfig fromJson(const nlohmann::json& j);
  nlohmann::json toJson() const;
};

/// Signed facet counts of a group; used to orient contrasts and to drive
/// synthetic policies.
struct GroupScores {
  int species = 0;  // humans minus pets
  int gender = 0;   // females minus males
  int age = 0;      // young minus elderly
  int fitness = 0;  // fit minus unfit
  int social = 0;   // high minus low
  int size = 0;
};

GroupScores groupScores(const OutcomeGroup& g);

// Minimal-contrast swap pairs per dimension. `positive` carries the facet
// level the attribute's +1 orientation refers to (female, young, fit,
// higher status).
struct SwapPair {
  CharacterKind positive;
  CharacterKind negative;
};

std::span<const SwapPair> swapPairs(FocalDimension d);

/// Standalone validator. Returns human-readable violations; empty == valid.
std::vector<std::string> scenarioViolations(const Scenario& s);
inline bool isValidScenario(const Scenario& s) { return scenarioViolations(s).empty(); }

nlohmann::json toJson(const Scenario& s);
Scenario scenarioFromJson(const nlohmann::json& j);

/// Deck files are JSON Lines, one scenario per line.
void writeDeck(const std::filesystem::path& path, std::span<const Scenario> deck);
std::vector<Scenario> readDeck(const std::filesystem::path& path);

}  // namespace mm
