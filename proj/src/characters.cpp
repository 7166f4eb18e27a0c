#include "mmeval/characters.hpp"

namespace mm {

namespace {

struct KindRow {
  CharacterKind kind;
  std::string_view name;
  Facets facets;
};

constexpr Species kHuman = Species::Human;
constexpr Species kPet = Species::Pet;

// Homeless is coded female so that the social-value contrast pairs
// (FemaleExecutive vs Homeless, MaleExecutive vs Criminal) differ in no
// facet other than social value.
const KindRow kTable[kKindCount] = {
    {CharacterKind::Man, "Man",
     {kHuman, Gender::Male, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::Woman, "Woman",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::Boy, "Boy",
     {kHuman, Gender::Male, AgeBand::Young, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::Girl, "Girl",
     {kHuman, Gender::Female, AgeBand::Young, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::ElderlyMan, "ElderlyMan",
     {kHuman, Gender::Male, AgeBand::Elderly, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::ElderlyWoman, "ElderlyWoman",
     {kHuman, Gender::Female, AgeBand::Elderly, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::PregnantWoman, "PregnantWoman",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::High}},
    {CharacterKind::Stroller, "Stroller",
     {kHuman, Gender::None, AgeBand::Young, FitnessLevel::Neutral, SocialValueLevel::Neutral}},
    {CharacterKind::MaleDoctor, "MaleDoctor",
     {kHuman, Gender::Male, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::High}},
    {CharacterKind::FemaleDoctor, "FemaleDoctor",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::High}},
    {CharacterKind::MaleExecutive, "MaleExecutive",
     {kHuman, Gender::Male, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::High}},
    {CharacterKind::FemaleExecutive, "FemaleExecutive",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::High}},
    {CharacterKind::MaleAthlete, "MaleAthlete",
     {kHuman, Gender::Male, AgeBand::Adult, FitnessLevel::Fit, SocialValueLevel::Neutral}},
    {CharacterKind::FemaleAthlete, "FemaleAthlete",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Fit, SocialValueLevel::Neutral}},
    {CharacterKind::LargeMan, "LargeMan",
     {kHuman, Gender::Male, AgeBand::Adult, FitnessLevel::Unfit, SocialValueLevel::Neutral}},
    {CharacterKind::LargeWoman, "LargeWoman",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Unfit, SocialValueLevel::Neutral}},
    {CharacterKind::Homeless, "Homeless",
     {kHuman, Gender::Female, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::Low}},
    {CharacterKind::Criminal, "Criminal",
     {kHuman, Gender::Male, AgeBand::Adult, FitnessLevel::Neutral, SocialValueLevel::Low}},
    {CharacterKind::Dog, "Dog",
     {kPet, Gender::None, AgeBand::None, FitnessLevel::None, SocialValueLevel::None}},
    {CharacterKind::Cat, "Cat",
     {kPet, Gender::None, AgeBand::None, FitnessLevel::None, SocialValueLevel::None}},
};

}  // namespace

const Facets& facetsOf(CharacterKind kind) {
  return kTable[static_cast<std::size_t>(kind)].facets;
}

std::string_view kindName(CharacterKind kind) {
  return kTable[static_cast<std::size_t>(kind)].name;
}

std::optional<CharacterKind> kindFromName(std::string_view name) {
  for (const auto& row : kTable) {
    if (row.name == name) return row.kind;
  }
  return std::nullopt;
}

const std::array<CharacterKind, kKindCount>& allKinds() {
  static const std::array<CharacterKind, kKindCount> kinds = [] {
    std::array<CharacterKind, kKindCount> out{};
    for (std::size_t i = 0; i < kKindCount; ++i) out[i] = kTable[i].kind;
    return out;
  }();
  return kinds;
}

const std::array<CharacterKind, 18>& humanKinds() {
  static const std::array<CharacterKind, 18> kinds = [] {
    std::array<CharacterKind, 18> out{};
    std::size_t j = 0;
    for (const auto& row : kTable) {
      if (row.facets.species == Species::Human) out[j++] = row.kind;
    }
    return out;
  }();
  return kinds;
}

}  // namespace mm
