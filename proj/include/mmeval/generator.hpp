#pragma once

#include <optional>
#include <vector>

#include "mmeval/rng.hpp"
#include "mmeval/scenario.hpp"

namespace mm {

/// Draws one scenario by constrained randomization. The result satisfies
/// every structural invariant (`scenarioViolations` is empty); id, seed and
/// generatorVersion are left for the caller to fill. Throws GenerationError
/// after 1,000 rejected draws.
Scenario sampleScenario(Rng& rng, const GenerationConfig& cfg);

/// Deterministic deck: a pure function of (cfg.seed, cfg, generator version).
/// Each scenario gets its own sub-stream, a unique id and seed provenance.
std::vector<Scenario> generateDeck(const GenerationConfig& cfg);

/// Scenarios suitable for rationale probing: both groups pedestrians and no
/// legality involved. Optionally restricted to one focal dimension.
std::vector<Scenario> filterForRationaleProbe(
    const std::vector<Scenario>& deck,
    std::optional<FocalDimension> focal = std::nullopt);

}  // namespace mm
