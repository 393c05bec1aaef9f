#include "ubuntuworld/planner.hpp"

#include <algorithm>
#include <unordered_map>

#include "ubuntuworld/errors.hpp"

namespace ubuntuworld {

namespace {

struct Node {
  State state;
  std::size_t parent;  // index into the node list; self for the root
  std::size_t action;
};

Plan extract(const std::vector<Node>& nodes, std::size_t leaf) {
  Plan plan;
  for (std::size_t i = leaf; nodes[i].parent != i; i = nodes[i].parent) {
    plan.actions.push_back(nodes[i].action);
  }
  std::reverse(plan.actions.begin(), plan.actions.end());
  return plan;
}

}  // namespace

std::optional<Plan> plan_optimal(const GroundedDomain& domain, const State& state,
                                 const Goal& goal) {
  if (!domain.valid(state)) throw ContractViolation("plan_optimal: state is not total");
  if (!domain.valid(goal)) throw ContractViolation("plan_optimal: goal outside the domain");
  if (satisfies(state, goal)) return Plan{};

  std::vector<Node> nodes{{state, 0, 0}};
  std::unordered_map<State, std::size_t> seen{{state, 0}};
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    for (std::size_t a = 0; a < domain.num_actions(); ++a) {
      const GroundedAction& action = domain.action(a);
      if (!applicable(nodes[head].state, action)) continue;
      State next = apply(nodes[head].state, action);
      if (seen.contains(next)) continue;
      seen.emplace(next, nodes.size());
      const bool reached = satisfies(next, goal);
      nodes.push_back({std::move(next), head, a});
      if (reached) return extract(nodes, nodes.size() - 1);
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> planning_next_action(const GroundedDomain& domain, const State& state,
                                                const Goal& goal) {
  auto plan = plan_optimal(domain, state, goal);
  if (!plan) throw Unsolvable("goal " + domain.format_goal(goal) + " is unreachable");
  if (plan->actions.empty()) return std::nullopt;
  return plan->actions.front();
}

}  // namespace ubuntuworld
