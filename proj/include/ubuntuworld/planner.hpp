#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ubuntuworld/grounding.hpp"

namespace ubuntuworld {

struct Plan {
  std::vector<std::size_t> actions;  // indices into GroundedDomain::actions()

  std::size_t cost() const { return actions.size(); }
  bool operator==(const Plan&) const = default;
};

// Breadth-first search with unit costs; successors are generated in grounded
// action order, so among optimal plans the lexicographically first (by action
// index sequence) is returned. nullopt when the goal is unreachable.
std::optional<Plan> plan_optimal(const GroundedDomain& domain, const State& state,
                                 const Goal& goal);

class Unsolvable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// First action of a fresh optimal plan; nullopt when the goal already holds.
// Throws Unsolvable when no plan exists.
std::optional<std::size_t> planning_next_action(const GroundedDomain& domain, const State& state,
                                                const Goal& goal);

}  // namespace ubuntuworld
