#pragma once

#include <stdexcept>
#include <string>

namespace mm {

/// Bad configuration, malformed input schema, unusable arguments.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// A command produced no usable output (e.g. every response invalid).
class EmptyResultError : public std::runtime_error {
 public:
  explicit EmptyResultError(const std::string& what) : std::runtime_error(what) {}
};

/// Every query in a campaign failed at the transport level.
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read/written/parsed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Constrained randomization failed to satisfy the invariants within the
/// retry bound.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mm
