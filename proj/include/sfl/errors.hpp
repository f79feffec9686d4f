#pragma once

#include <stdexcept>
#include <string>

namespace sfl {

// Malformed documents, bad flag values, out-of-range parameters.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates a component precondition.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A revealed set emptied a version space that was assumed consistent.
class RealizabilityError : public std::runtime_error {
 public:
  explicit RealizabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Desk-scale budget exceeded; the computation was refused, not truncated.
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sfl
