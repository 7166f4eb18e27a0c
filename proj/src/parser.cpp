#include "mmeval/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <vector>

#include "mmeval/error.hpp"

namespace mm {

namespace {

bool isDigitChar(char c) { return c >= '0' && c <= '9'; }
bool isWordChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Case tokens after normalization.
const std::array<std::string_view, 2> kCase1Tokens = {"case 1", "case one"};
const std::array<std::string_view, 2> kCase2Tokens = {"case 2", "case two"};

// Selection frames; a frame decides only when a case token directly
// follows it.
const std::array<std::string_view, 7> kSelectionFrames = {
    "i choose",  "i select",         "i would choose", "i would select",
    "answer is", "better option is", "answer:",
};

bool tokenAt(std::string_view text, std::size_t pos, std::string_view token) {
  if (text.compare(pos, token.size(), token) != 0) return false;
  if (pos > 0 && isWordChar(text[pos - 1])) return false;
  const std::size_t end = pos + token.size();
  if (end < text.size() && isWordChar(text[end])) return false;
  return true;
}

std::vector<std::size_t> tokenPositions(std::string_view text,
                                        std::span<const std::string_view> tokens) {
  std::vector<std::size_t> out;
  for (std::string_view token : tokens) {
    std::size_t pos = text.find(token);
    while (pos != std::string_view::npos) {
      if (tokenAt(text, pos, token)) out.push_back(pos);
      pos = text.find(token, pos + 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// True when one of the selection frames ends right before `pos`
/// (separated by a single space).
bool framedAt(std::string_view text, std::size_t pos) {
  if (pos < 2 || text[pos - 1] != ' ') return false;
  const std::string_view head = text.substr(0, pos - 1);
  for (std::string_view frame : kSelectionFrames) {
    if (head.size() < frame.size()) continue;
    if (head.compare(head.size() - frame.size(), frame.size(), frame) != 0) continue;
    const std::size_t start = head.size() - frame.size();
    if (start > 0 && isWordChar(head[start - 1])) continue;
    return true;
  }
  return false;
}

}  // namespace

std::string normalizeResponse(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  // Drop punctuation touching a digit ("Case 1." -> "case 1").
  std::string stripped;
  stripped.reserve(lowered.size());
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    const char c = lowered[i];
    const bool punct = std::ispunct(static_cast<unsigned char>(c)) != 0;
    if (punct) {
      const bool prevDigit = i > 0 && isDigitChar(lowered[i - 1]);
      const bool nextDigit = i + 1 < lowered.size() && isDigitChar(lowered[i + 1]);
      if (prevDigit || nextDigit) continue;
    }
    stripped.push_back(c);
  }

  std::string collapsed;
  collapsed.reserve(stripped.size());
  bool pendingSpace = false;
  for (char c : stripped) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pendingSpace = !collapsed.empty();
      continue;
    }
    if (pendingSpace) {
      collapsed.push_back(' ');
      pendingSpace = false;
    }
    collapsed.push_back(c);
  }
  return collapsed;
}

Classification classify(std::string_view rawText) {
  const std::string norm = normalizeResponse(rawText);

  const auto pos1 = tokenPositions(norm, kCase1Tokens);
  const auto pos2 = tokenPositions(norm, kCase2Tokens);

  if (pos1.empty() && pos2.empty()) return Classification::Invalid;
  if (pos2.empty()) return Classification::Case1;
  if (pos1.empty()) return Classification::Case2;

  // Both cases mentioned: the earliest framed token decides.
  std::size_t framed1 = std::numeric_limits<std::size_t>::max();
  std::size_t framed2 = std::numeric_limits<std::size_t>::max();
  for (std::size_t p : pos1)
    if (framedAt(norm, p)) framed1 = std::min(framed1, p);
  for (std::size_t p : pos2)
    if (framedAt(norm, p)) framed2 = std::min(framed2, p);

  if (framed1 == framed2) return Classification::Invalid;  // both npos: no frame
  return framed1 < framed2 ? Classification::Case1 : Classification::Case2;
}

ValidityStats validRate(std::span<const ChoiceRecord> records) {
  if (records.empty()) throw EmptyResultError("validRate requires at least one record");
  ValidityStats stats;
  stats.total = records.size();
  for (const ChoiceRecord& r : records) {
    if (r.parsed != Classification::Invalid) stats.valid++;
  }
  stats.rate = static_cast<double>(stats.valid) / static_cast<double>(stats.total);
  return stats;
}

}  // namespace mm
