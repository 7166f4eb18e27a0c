#pragma once

#include <nlohmann/json.hpp>

namespace mm {

// Pipeline commands. Each takes the full config document (its own section
// plus shared keys like "manifest"), works through the filesystem, updates
// the run manifest, and returns a summary.
//
// Error mapping: UsageError = bad config/arguments, EmptyResultError = no
// usable output, TransportError = nothing could be queried.

nlohmann::json cmdGenerate(const nlohmann::json& config);
nlohmann::json cmdRun(const nlohmann::json& config);
nlohmann::json cmdAnalyze(const nlohmann::json& config);
nlohmann::json cmdCompare(const nlohmann::json& config);
nlohmann::json cmdRationale(const nlohmann::json& config);
nlohmann::json cmdReport(const nlohmann::json& config);

/// Re-validates a labeled completion corpus ({"text","label"} JSON Lines)
/// against the current rule set; any mismatch is an error.
nlohmann::json cmdCorpus(const nlohmann::json& config);

}  // namespace mm
