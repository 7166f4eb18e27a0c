#pragma once

#include <span>
#include <string>
#include <string_view>

#include "mmeval/records.hpp"

namespace mm {

/// Lowercases, strips punctuation adjacent to digits, collapses whitespace.
std::string normalizeResponse(std::string_view text);

/// Classifies a raw completion as a definitive Case 1 / Case 2 selection.
///
/// After normalization, the tokens "case 1"/"case one" and "case 2"/
/// "case two" are located. Exactly one distinct case mentioned decides the
/// label. When both appear, the first case token directly preceded by a
/// selection frame ("i choose", "i select", "i would choose/select",
/// "better option is", "answer:"/"answer is") wins; with no frame the text
/// is ambiguous and therefore invalid. Total over strings, never throws.
Classification classify(std::string_view rawText);

struct ValidityStats {
  uint64_t valid = 0;
  uint64_t total = 0;
  double rate = 0.0;
};

/// Fraction of records with a definitive selection. Transport failures
/// (empty rawText) are already counted invalid by the classifier.
/// Throws EmptyResultError on an empty list.
ValidityStats validRate(std::span<const ChoiceRecord> records);

}  // namespace mm
