#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ubuntuworld {

// Malformed domain file, state or goal text or snapshot text.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reference to an undeclared type, object or predicate, or a duplicate name.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (e.g. apply() on an inapplicable
// action, step() after the episode ended).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Input that is well-formed but not acceptable here (unknown action, problem
// from another domain, duplicate post id).
class Rejection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Snapshot file is truncated, corrupted or for a different domain.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ubuntuworld
