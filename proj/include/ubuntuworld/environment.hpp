#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ubuntuworld/grounding.hpp"
#include "ubuntuworld/rng.hpp"

namespace ubuntuworld {

struct Problem {
  State start;
  Goal goal;
  std::uint64_t domain = 0;  // GroundedDomain::fingerprint() of the owner

  bool operator==(const Problem&) const = default;
};

struct Observation {
  State state;
  std::string footprint;
  std::size_t steps_taken = 0;
  bool done = false;
  bool goal_reached = false;
  // Whether the last executed action failed (its footprint is an error).
  bool last_failed = false;
};

struct EpisodeConfig {
  std::size_t max_steps = 30;
  std::uint64_t seed = 0;
};

struct EpisodeRecord {
  Problem problem;
  std::vector<std::size_t> actions;  // indices into GroundedDomain::actions()
  std::vector<double> rewards;
  std::size_t length = 0;
  bool success = false;

  double total_reward() const;
  bool operator==(const EpisodeRecord&) const = default;
};

// base -10; +5 when the state changed; +100 when next satisfies the goal.
double reward_fn(const State& s, const GroundedAction& a, const State& next, const Goal& goal);

struct Execution {
  State next;
  std::string footprint;
  bool failed = false;
};

// Where actions actually run. The environment only sees footprints and the
// sensed state.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Execution execute(const State& state, const GroundedAction& action) = 0;
};

// Simulation mode: applies the domain model and prints the schema's
// footprint templates.
class EmulatorBackend final : public Backend {
 public:
  Execution execute(const State& state, const GroundedAction& action) override;
};

// Placeholder for running commands in a real Bash shell; every call throws.
class ShellBackend final : public Backend {
 public:
  Execution execute(const State& state, const GroundedAction& action) override;
};

struct StepResult {
  Observation observation;
  double reward = 0;
};

class Environment {
 public:
  Environment(DomainPtr domain, EpisodeConfig config = {},
              std::unique_ptr<Backend> backend = std::make_unique<EmulatorBackend>());

  const GroundedDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  const EpisodeConfig& config() const { return config_; }

  Observation reset(const Problem& problem);
  StepResult step(std::size_t action);

  const Observation& observation() const { return obs_; }
  const Goal& goal() const { return goal_; }

  // Overwrites the sensed state without executing anything (what a user does
  // at their own terminal). Recomputes goal_reached, ending the episode if it
  // now holds; the step count is kept.
  void set_state(const State& state);

 private:
  DomainPtr domain_;
  EpisodeConfig config_;
  std::unique_ptr<Backend> backend_;
  Goal goal_;
  Observation obs_;
  bool active_ = false;
};

// Every state reachable from `from`, in breadth-first discovery order.
std::vector<State> reachable_states(const GroundedDomain& domain, const State& from);

// Goal drawing policy: with probability open_file_fraction a single
// "open <software> <item>" literal, otherwise 1..max_literals uniformly drawn
// predicates with uniform values.
struct GoalMix {
  double open_file_fraction = 0.8;
  std::size_t max_literals = 2;
  std::size_t walk_length = 32;
  std::size_t max_attempts = 1000;
};

// Start state by a random walk over applicable actions from `base`; goal per
// `mix`, not satisfied at the start and reachable from it.
Problem generate_problem(const GroundedDomain& domain, Rng& rng, const State& base,
                         const GoalMix& mix = {});

// The sensed state of a freshly booted machine: online, not root, firefox
// installed, nothing open (predicates missing from the domain are ignored).
State canonical_base_state(const GroundedDomain& domain);

class ProblemGenerator {
 public:
  ProblemGenerator(DomainPtr domain, std::uint64_t seed, GoalMix mix = {});

  Problem next();
  std::vector<Problem> batch(std::size_t n);

 private:
  DomainPtr domain_;
  Rng rng_;
  GoalMix mix_;
  State base_;
};

}  // namespace ubuntuworld
