#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ubuntuworld/domain.hpp"

namespace ubuntuworld {

struct GroundPredicate {
  std::string name;
  std::vector<std::string> args;

  auto operator<=>(const GroundPredicate&) const = default;
  bool operator==(const GroundPredicate&) const = default;

  // "open gedit file"
  std::string str() const;
};

struct GroundLiteral {
  std::size_t predicate = 0;  // index into the grounded predicate list
  bool value = true;

  auto operator<=>(const GroundLiteral&) const = default;
};

struct GroundedAction {
  std::size_t schema = 0;  // index into Domain::schemas
  std::vector<std::string> binding;  // one object per schema parameter
  std::string name;  // "AptGet(gedit)", or the bare schema name when nullary
  std::vector<GroundLiteral> preconditions;
  std::vector<GroundLiteral> effects;
  std::string footprint_success;
  std::string footprint_failure;
  std::vector<std::pair<GroundLiteral, std::string>> keyed_failures;
};

// Total boolean assignment over the grounded predicates.
class State {
 public:
  State() = default;
  explicit State(std::vector<bool> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool operator[](std::size_t i) const { return values_[i]; }
  State with(std::size_t i, bool v) const;
  const std::vector<bool>& values() const { return values_; }

  bool operator==(const State&) const = default;
  std::size_t hash() const { return std::hash<std::vector<bool>>{}(values_); }

  // "0110..." in predicate order.
  std::string bits() const;
  static State from_bits(std::string_view bits);

 private:
  std::vector<bool> values_;
};

// Partial assignment; literals are sorted by predicate index and unique.
class Goal {
 public:
  Goal() = default;
  explicit Goal(std::vector<GroundLiteral> literals);

  std::span<const GroundLiteral> literals() const { return literals_; }
  bool empty() const { return literals_.empty(); }

  bool operator==(const Goal&) const = default;
  std::size_t hash() const;

  // "3=1,5=0"; "-" for the empty goal.
  std::string encode() const;
  static Goal decode(std::string_view text);

 private:
  std::vector<GroundLiteral> literals_;
};

struct Grounding {
  std::vector<GroundPredicate> predicates;
  std::vector<GroundedAction> actions;
};

// Predicates in declaration order with arguments ranging over objects in
// declaration order; actions sorted by schema name, then by the tuple of
// bound object names.
Grounding ground(const Domain& domain);

bool applicable(const State& state, const GroundedAction& action);
State apply(const State& state, const GroundedAction& action);
bool satisfies(const State& state, const Goal& goal);

// First violated precondition, if any.
std::optional<GroundLiteral> first_violation(const State& state, const GroundedAction& action);

// A parsed and grounded domain plus lookups. Immutable; share it through
// std::shared_ptr<const GroundedDomain>.
class GroundedDomain {
 public:
  explicit GroundedDomain(Domain domain);

  const Domain& domain() const { return domain_; }
  std::span<const GroundPredicate> predicates() const { return grounding_.predicates; }
  std::span<const GroundedAction> actions() const { return grounding_.actions; }
  const GroundedAction& action(std::size_t i) const { return grounding_.actions.at(i); }
  std::size_t num_actions() const { return grounding_.actions.size(); }
  std::size_t num_predicates() const { return grounding_.predicates.size(); }

  std::optional<std::size_t> find_predicate(const GroundPredicate& p) const;
  std::optional<std::size_t> find_predicate(std::string_view text) const;
  std::optional<std::size_t> find_action(std::string_view name) const;
  std::optional<std::size_t> find_action(std::string_view schema,
                                         const std::vector<std::string>& binding) const;

  // Stable hash of the canonical domain text; tags problems and snapshots.
  std::uint64_t fingerprint() const { return fingerprint_; }

  // "sudo-on, installed gedit": listed predicates true, the rest false.
  State parse_state(std::string_view text) const;
  // "open gedit file, !sudo-on": a partial assignment.
  Goal parse_goal(std::string_view text) const;
  GroundLiteral parse_literal(std::string_view text) const;

  // One "name : True|False" line per predicate.
  std::string format_state(const State& state) const;
  std::string format_goal(const Goal& goal) const;

  bool valid(const State& state) const { return state.size() == num_predicates(); }
  bool valid(const Goal& goal) const;

 private:
  Domain domain_;
  Grounding grounding_;
  std::uint64_t fingerprint_ = 0;
};

using DomainPtr = std::shared_ptr<const GroundedDomain>;

DomainPtr make_domain(Domain domain);
DomainPtr load_grounded_domain(const std::filesystem::path& path);

}  // namespace ubuntuworld

template <>
struct std::hash<ubuntuworld::State> {
  std::size_t operator()(const ubuntuworld::State& s) const { return s.hash(); }
};

template <>
struct std::hash<ubuntuworld::Goal> {
  std::size_t operator()(const ubuntuworld::Goal& g) const { return g.hash(); }
};
