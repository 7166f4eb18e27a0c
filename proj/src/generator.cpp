#include "mmeval/generator.hpp"

#include <algorithm>
#include <cstdio>

#include "mmeval/error.hpp"
#include "mmeval/version.hpp"

namespace mm {

namespace {

constexpr int kMaxRejections = 1000;
constexpr std::size_t kMaxGroupSize = 5;

struct SidePair {
  OutcomeGroup positive;  // the side the focal attribute's +1 orientation refers to
  OutcomeGroup negative;
};

CharacterKind drawFrom(Rng& rng, std::span<const CharacterKind> alphabet) {
  return alphabet[rng.below(alphabet.size())];
}

std::size_t drawGroupSize(Rng& rng, const GenerationConfig& cfg, std::size_t maxSize) {
  std::span<const double> weights(cfg.groupSizeWeights.data(), maxSize);
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return 0;  // caller rejects
  return 1 + rng.weighted(weights);
}

// One group per swap-pair side; slot i of the positive group pairs with
// slot i of the negative group.
SidePair drawContrastGroups(Rng& rng, const GenerationConfig& cfg, FocalDimension focal) {
  SidePair sides;
  const std::size_t n = drawGroupSize(rng, cfg, kMaxGroupSize);
  if (focal == FocalDimension::Species) {
    for (std::size_t i = 0; i < n; ++i) {
      sides.positive.characters.push_back(drawFrom(rng, humanKinds()));
      sides.negative.characters.push_back(i % 2 == 0 ? CharacterKind::Dog : CharacterKind::Cat);
    }
  } else {
    const auto pairs = swapPairs(focal);
    for (std::size_t i = 0; i < n; ++i) {
      const SwapPair& p = pairs[rng.below(pairs.size())];
      sides.positive.characters.push_back(p.positive);
      sides.negative.characters.push_back(p.negative);
    }
  }
  return sides;
}

// Size-contrast groups: the larger multiset strictly contains the smaller.
// k is drawn first, uniform over 1..4, so its marginal distribution stays
// uniform under the larger-group-size cap.
std::optional<SidePair> drawUtilitarianGroups(Rng& rng, const GenerationConfig& cfg,
                                              bool passengerFraming, bool passengersAreLarger) {
  const std::size_t k = 1 + rng.below(4);
  const std::size_t n = drawGroupSize(rng, cfg, kMaxGroupSize - k);
  if (n == 0) return std::nullopt;

  // Passengers must all be human. The common multiset is shared by both
  // sides, so it is restricted whenever either side rides in the car.
  const bool commonHuman = passengerFraming;
  const bool extrasHuman = passengerFraming && passengersAreLarger;
  const std::span<const CharacterKind> full(allKinds());
  const std::span<const CharacterKind> humans(humanKinds());

  SidePair sides;
  for (std::size_t i = 0; i < n; ++i) {
    const CharacterKind kind = drawFrom(rng, commonHuman ? humans : full);
    sides.positive.characters.push_back(kind);
    sides.negative.characters.push_back(kind);
  }
  for (std::size_t i = 0; i < k; ++i) {
    sides.positive.characters.push_back(drawFrom(rng, extrasHuman ? humans : full));
  }
  return sides;
}

}  // namespace

Scenario sampleScenario(Rng& rng, const GenerationConfig& cfg) {
  cfg.validate();

  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const auto focal = static_cast<FocalDimension>(rng.weighted(cfg.dimensionWeights));
    const bool passengerFraming = rng.bernoulli(cfg.pPassenger);

    // Which side carries the passengers. For the species contrast only the
    // human side may ride; for the others a coin decides.
    bool passengersPositive;
    if (focal == FocalDimension::Species) {
      passengersPositive = true;
    } else {
      passengersPositive = rng.coin();
    }

    SidePair sides;
    if (focal == FocalDimension::Utilitarian) {
      auto drawn = drawUtilitarianGroups(rng, cfg, passengerFraming, passengersPositive);
      if (!drawn) continue;
      sides = std::move(*drawn);
    } else {
      sides = drawContrastGroups(rng, cfg, focal);
    }

    Scenario s;
    s.focalDimension = focal;

    if (passengerFraming) {
      OutcomeGroup& pass = passengersPositive ? sides.positive : sides.negative;
      OutcomeGroup& peds = passengersPositive ? sides.negative : sides.positive;
      pass.role = GroupRole::Passengers;
      pass.legality = Legality::NotApplicable;
      peds.role = GroupRole::Pedestrians;
      // A single crossing can still carry a signal, as decoration; with only
      // one pedestrian group there is never a lawful/unlawful contrast.
      peds.legality = rng.bernoulli(cfg.pLaw)
                          ? (rng.coin() ? Legality::Lawful : Legality::Unlawful)
                          : Legality::NotApplicable;
      const bool positiveIsA = rng.coin();
      s.groupA = positiveIsA ? sides.positive : sides.negative;
      s.groupB = positiveIsA ? sides.negative : sides.positive;
      const GroupTag pedTag = (positiveIsA == passengersPositive) ? GroupTag::B : GroupTag::A;
      s.stayVictim = pedTag;
    } else {
      sides.positive.role = GroupRole::Pedestrians;
      sides.negative.role = GroupRole::Pedestrians;
      if (rng.bernoulli(cfg.pLaw)) {
        const bool positiveLawful = rng.coin();
        sides.positive.legality = positiveLawful ? Legality::Lawful : Legality::Unlawful;
        sides.negative.legality = positiveLawful ? Legality::Unlawful : Legality::Lawful;
      } else {
        sides.positive.legality = Legality::NotApplicable;
        sides.negative.legality = Legality::NotApplicable;
      }
      const bool positiveIsA = rng.coin();
      s.groupA = positiveIsA ? sides.positive : sides.negative;
      s.groupB = positiveIsA ? sides.negative : sides.positive;
      s.stayVictim = rng.coin() ? GroupTag::A : GroupTag::B;
    }

    if (isValidScenario(s)) return s;
  }
  throw GenerationError("no valid scenario within " + std::to_string(kMaxRejections) +
                        " rejections; check the generation config");
}

std::vector<Scenario> generateDeck(const GenerationConfig& cfg) {
  cfg.validate();
  std::vector<Scenario> deck;
  deck.reserve(cfg.count);
  for (uint64_t i = 0; i < cfg.count; ++i) {
    const uint64_t scenarioSeed = splitmix64(splitmix64(cfg.seed) ^ splitmix64(i + 1));
    Rng rng(scenarioSeed);
    Scenario s = sampleScenario(rng, cfg);
    char id[24];
    std::snprintf(id, sizeof(id), "scn-%08llu", static_cast<unsigned long long>(i));
    s.id = id;
    s.seed = scenarioSeed;
    s.generatorVersion = std::string(kGeneratorVersion);
    deck.push_back(std::move(s));
  }
  return deck;
}

std::vector<Scenario> filterForRationaleProbe(const std::vector<Scenario>& deck,
                                              std::optional<FocalDimension> focal) {
  std::vector<Scenario> out;
  for (const Scenario& s : deck) {
    const bool bothPedestrians = s.groupA.role == GroupRole::Pedestrians &&
                                 s.groupB.role == GroupRole::Pedestrians;
    const bool noLaw = s.groupA.legality == Legality::NotApplicable &&
                       s.groupB.legality == Legality::NotApplicable;
    if (!bothPedestrians || !noLaw) continue;
    if (focal && s.focalDimension != *focal) continue;
    out.push_back(s);
  }
  return out;
}

}  // namespace mm
