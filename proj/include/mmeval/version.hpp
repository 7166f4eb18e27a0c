#pragma once

#include <string_view>

namespace mm {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

// Version of the scenario generator. Decks embed it; bumping it signals
// that previously generated decks are not reproducible by this build.
inline constexpr std::string_view kGeneratorVersion = "1.0.0";

// Version of the response-classification rule set. Changing any rule
// (normalization, token patterns, ambiguity policy) requires a bump.
inline constexpr std::string_view kRuleSetVersion = "1.0.0";

}  // namespace mm
