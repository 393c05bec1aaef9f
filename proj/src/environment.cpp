#include "ubuntuworld/environment.hpp"

#include <deque>
#include <numeric>
#include <unordered_set>

#include "ubuntuworld/errors.hpp"

namespace ubuntuworld {

double EpisodeRecord::total_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

double reward_fn(const State& s, const GroundedAction& /*a*/, const State& next,
                 const Goal& goal) {
  double r = -10.0;
  if (next != s) r += 5.0;
  if (satisfies(next, goal)) r += 100.0;
  return r;
}

Execution EmulatorBackend::execute(const State& state, const GroundedAction& action) {
  const auto violated = first_violation(state, action);
  if (!violated) return {apply(state, action), action.footprint_success, false};
  for (const auto& [trigger, text] : action.keyed_failures) {
    if (trigger == *violated) return {state, text, true};
  }
  return {state, action.footprint_failure, true};
}

Execution ShellBackend::execute(const State& /*state*/, const GroundedAction& action) {
  throw ContractViolation("shell backend is not available in this build (action " +
                          action.name + ")");
}

Environment::Environment(DomainPtr domain, EpisodeConfig config, std::unique_ptr<Backend> backend)
    : domain_(std::move(domain)), config_(config), backend_(std::move(backend)) {
  if (!domain_) throw ContractViolation("environment needs a domain");
  if (config_.max_steps < 1) throw Rejection("max_steps must be at least 1");
  if (!backend_) throw ContractViolation("environment needs a backend");
}

Observation Environment::reset(const Problem& problem) {
  if (problem.domain != domain_->fingerprint()) {
    throw Rejection("problem was generated for a different domain");
  }
  if (!domain_->valid(problem.start) || !domain_->valid(problem.goal)) {
    throw Rejection("problem references predicates outside the domain");
  }
  goal_ = problem.goal;
  obs_ = Observation{};
  obs_.state = problem.start;
  obs_.goal_reached = satisfies(obs_.state, goal_);
  obs_.done = obs_.goal_reached;
  active_ = true;
  return obs_;
}

StepResult Environment::step(std::size_t action) {
  if (!active_) throw ContractViolation("step() before reset()");
  if (obs_.done) throw ContractViolation("step() after the episode is done");
  if (action >= domain_->num_actions()) {
    throw Rejection("unknown action index " + std::to_string(action));
  }
  const GroundedAction& a = domain_->action(action);
  Execution ex = backend_->execute(obs_.state, a);
  const double reward = reward_fn(obs_.state, a, ex.next, goal_);
  obs_.state = std::move(ex.next);
  obs_.footprint = std::move(ex.footprint);
  obs_.last_failed = ex.failed;
  ++obs_.steps_taken;
  obs_.goal_reached = satisfies(obs_.state, goal_);
  obs_.done = obs_.goal_reached || obs_.steps_taken >= config_.max_steps;
  return {obs_, reward};
}

void Environment::set_state(const State& state) {
  if (!domain_->valid(state)) throw Rejection("state does not match the domain");
  obs_.state = state;
  obs_.goal_reached = satisfies(obs_.state, goal_);
  if (obs_.goal_reached) obs_.done = true;
}

std::vector<State> reachable_states(const GroundedDomain& domain, const State& from) {
  std::vector<State> order{from};
  std::unordered_set<State> seen{from};
  for (std::size_t head = 0; head < order.size(); ++head) {
    const State current = order[head];
    for (const auto& a : domain.actions()) {
      if (!applicable(current, a)) continue;
      State next = apply(current, a);
      if (seen.insert(next).second) order.push_back(std::move(next));
    }
  }
  return order;
}

State canonical_base_state(const GroundedDomain& domain) {
  std::vector<bool> values(domain.num_predicates(), false);
  for (const char* name : {"internet-on", "installed firefox"}) {
    if (auto idx = domain.find_predicate(std::string_view(name))) values[*idx] = true;
  }
  return State(std::move(values));
}

namespace {

State random_walk(const GroundedDomain& domain, Rng& rng, State state, std::size_t length) {
  std::vector<std::size_t> options;
  for (std::size_t step = 0; step < length; ++step) {
    options.clear();
    for (std::size_t i = 0; i < domain.num_actions(); ++i) {
      if (applicable(state, domain.action(i))) options.push_back(i);
    }
    if (options.empty()) break;
    state = apply(state, domain.action(options[rng.below(options.size())]));
  }
  return state;
}

Goal random_goal(const GroundedDomain& domain, Rng& rng, const GoalMix& mix,
                 const std::vector<std::size_t>& open_predicates) {
  if (!open_predicates.empty() && rng.uniform() < mix.open_file_fraction) {
    return Goal({{open_predicates[rng.below(open_predicates.size())], true}});
  }
  const std::size_t n = domain.num_predicates();
  const std::size_t max_k = std::min(std::max<std::size_t>(mix.max_literals, 1), n);
  const std::size_t k = 1 + rng.below(max_k);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<GroundLiteral> lits;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(pool[i], pool[j]);
    lits.push_back({pool[i], rng.below(2) == 1});
  }
  return Goal(std::move(lits));
}

bool goal_reachable(const GroundedDomain& domain, const State& start, const Goal& goal) {
  for (const auto& s : reachable_states(domain, start)) {
    if (satisfies(s, goal)) return true;
  }
  return false;
}

}  // namespace

Problem generate_problem(const GroundedDomain& domain, Rng& rng, const State& base,
                         const GoalMix& mix) {
  if (!domain.valid(base)) throw Rejection("base state does not match the domain");
  if (domain.num_predicates() == 0) throw std::runtime_error("domain has no predicates");
  std::vector<std::size_t> open_predicates;
  for (std::size_t i = 0; i < domain.num_predicates(); ++i) {
    if (domain.predicates()[i].name == "open") open_predicates.push_back(i);
  }
  for (std::size_t attempt = 0; attempt < mix.max_attempts; ++attempt) {
    State start = random_walk(domain, rng, base, mix.walk_length);
    Goal goal = random_goal(domain, rng, mix, open_predicates);
    if (satisfies(start, goal)) continue;
    if (!goal_reachable(domain, start, goal)) continue;
    return {std::move(start), std::move(goal), domain.fingerprint()};
  }
  throw std::runtime_error("no unsatisfied reachable goal found after " +
                           std::to_string(mix.max_attempts) + " attempts");
}

ProblemGenerator::ProblemGenerator(DomainPtr domain, std::uint64_t seed, GoalMix mix)
    : domain_(std::move(domain)), rng_(seed), mix_(mix), base_(canonical_base_state(*domain_)) {}

Problem ProblemGenerator::next() { return generate_problem(*domain_, rng_, base_, mix_); }

std::vector<Problem> ProblemGenerator::batch(std::size_t n) {
  std::vector<Problem> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

}  // namespace ubuntuworld
