#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mm {

struct SubprocessResult {
  int exitCode = -1;
  bool timedOut = false;
  std::string output;
};

/// Runs argv with `input` on stdin and captures stdout. The child is
/// killed once the deadline passes.
SubprocessResult runSubprocess(const std::vector<std::string>& argv, std::string_view input,
                               double timeoutSeconds);

}  // namespace mm
