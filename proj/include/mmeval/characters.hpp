#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mm {

// The 20-member character taxonomy used by the dilemma generator.
enum class CharacterKind : uint8_t {
  Man,
  Woman,
  Boy,
  Girl,
  ElderlyMan,
  ElderlyWoman,
  PregnantWoman,
  Stroller,
  MaleDoctor,
  FemaleDoctor,
  MaleExecutive,
  FemaleExecutive,
  MaleAthlete,
  FemaleAthlete,
  LargeMan,
  LargeWoman,
  Homeless,
  Criminal,
  Dog,
  Cat,
};

inline constexpr std::size_t kKindCount = 20;

enum class Species : uint8_t { Human, Pet };
enum class Gender : uint8_t { Male, Female, None };
enum class AgeBand : uint8_t { Young, Adult, Elderly, None };
enum class FitnessLevel : uint8_t { Fit, Neutral, Unfit, None };
enum class SocialValueLevel : uint8_t { High, Neutral, Low, None };

/// Derived per-character facet tuple. Pets carry None on every human facet.
struct Facets {
  Species species;
  Gender gender;
  AgeBand ageBand;
  FitnessLevel fitness;
  SocialValueLevel socialValue;
};

/// Total mapping from kind to facets.
const Facets& facetsOf(CharacterKind kind);

std::string_view kindName(CharacterKind kind);
std::optional<CharacterKind> kindFromName(std::string_view name);

const std::array<CharacterKind, kKindCount>& allKinds();

/// The 18 human kinds, in enum order.
const std::array<CharacterKind, 18>& humanKinds();

}  // namespace mm
