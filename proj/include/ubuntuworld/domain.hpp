#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ubuntuworld {

struct TypedName {
  std::string name;
  std::string type;

  bool operator==(const TypedName&) const = default;
};

// A (possibly negated) atom inside an action schema. Arguments are either
// parameter names ("?s") or declared object names.
struct Literal {
  std::string predicate;
  std::vector<std::string> args;
  bool positive = true;

  bool operator==(const Literal&) const = default;
};

std::string to_string(const Literal& literal);

struct PredicateSchema {
  std::string name;
  std::vector<TypedName> params;

  bool operator==(const PredicateSchema&) const = default;
};

// Failure output keyed by the precondition whose violation produces it.
struct FailureFootprint {
  Literal trigger;
  std::string text;

  bool operator==(const FailureFootprint&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<Literal> preconditions;
  std::vector<Literal> effects;
  std::string doc;
  std::string footprint_success;
  // Used when no keyed failure footprint matches the first violated
  // precondition.
  std::string footprint_failure;
  std::vector<FailureFootprint> keyed_failures;

  bool operator==(const ActionSchema&) const = default;
};

struct Domain {
  std::vector<std::string> types;
  std::vector<TypedName> objects;
  std::vector<PredicateSchema> predicates;
  std::vector<ActionSchema> schemas;

  bool operator==(const Domain&) const = default;

  const PredicateSchema* find_predicate(std::string_view name) const;
  const ActionSchema* find_schema(std::string_view name) const;
  const TypedName* find_object(std::string_view name) const;
  // Objects of the given type, in declaration order.
  std::vector<std::string> objects_of(std::string_view type) const;
};

// Parses the line-oriented domain format. Throws ParseError (syntax, with
// line number) or ReferenceError (undeclared or duplicate names).
Domain parse_domain(std::string_view text);
Domain load_domain(const std::filesystem::path& path);

// Canonical text form; parse_domain(serialize_domain(d)) == d.
std::string serialize_domain(const Domain& domain);

// Checks every structural invariant; parse_domain calls this.
void validate(const Domain& domain);

}  // namespace ubuntuworld
