#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmeval/records.hpp"
#include "mmeval/scenario.hpp"

namespace mm {

// The nine preference attributes, in report order. Positive orientation:
// humans, higher status, pedestrians, larger group, lawful, inaction,
// female, fit, young.
enum class Attribute : uint8_t {
  Species,
  SocialValue,
  RelationToAV,
  NCharacters,
  Law,
  Intervention,
  Gender,
  Fitness,
  Age,
};

inline constexpr std::size_t kAttributeCount = 9;

std::string_view attributeName(Attribute a);
std::optional<Attribute> attributeFromName(std::string_view name);
const std::array<Attribute, kAttributeCount>& allAttributes();

/// One outcome-group observation: whether the group was spared, plus a
/// signed orientation code per attribute (0 when the scenario does not
/// contrast that attribute). Every valid choice yields two rows with
/// opposite nonzero codes.
struct ProfileRow {
  std::string scenarioId;
  GroupTag group = GroupTag::A;
  int spared = 0;
  std::array<int8_t, kAttributeCount> codes{};
  int k = 0;  // group-size difference, size-contrast scenarios only

  int8_t code(Attribute a) const { return codes[static_cast<std::size_t>(a)]; }
};

/// Dummy-codes valid choice records against their deck scenarios.
/// A record referencing an unknown scenario id is a hard error; records
/// must already be filtered to definitive selections.
std::vector<ProfileRow> codeProfiles(std::span<const Scenario> deck,
                                     std::span<const ChoiceRecord> records);

struct AmceEstimate {
  double deltaP = 0.0;
  double se = 0.0;
  uint64_t n = 0;  // contrasted-scenario count
};

struct AmceProfile {
  std::string modelName;
  std::array<std::optional<AmceEstimate>, kAttributeCount> attributes;
  // Effect of k extra characters, k = 1..4 (index k-1).
  std::array<std::optional<AmceEstimate>, 4> perIncrement;
  std::optional<AmceEstimate> meanCharactersEffect;            // n-weighted
  std::optional<AmceEstimate> meanCharactersEffectUnweighted;  // plain mean over k
  std::vector<std::string> diagnostics;

  const std::optional<AmceEstimate>& at(Attribute a) const {
    return attributes[static_cast<std::size_t>(a)];
  }
};

/// Per attribute, the coefficient of the attribute's dummy in a linear
/// probability fit restricted to rows contrasting it (intercept included),
/// with a heteroskedasticity-robust standard error clustered by scenario.
AmceProfile estimateAmce(std::span<const ProfileRow> rows);

/// Independent check: raw difference of proportions with the closed-form
/// two-sample binomial standard error. On paired two-rows-per-scenario
/// data the deltaP must equal the regression coefficient.
AmceProfile amceOracle(std::span<const ProfileRow> rows);

nlohmann::json amceProfileToJson(const AmceProfile& p);
AmceProfile amceProfileFromJson(const nlohmann::json& j);

/// CSV with header attribute,deltaP,se,n; nine attribute rows followed by
/// k1..k4 and mean. Absent estimates leave deltaP/se empty.
std::string amceProfileToCsv(const AmceProfile& p);

}  // namespace mm
