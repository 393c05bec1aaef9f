#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ubuntuworld/environment.hpp"
#include "ubuntuworld/grounding.hpp"
#include "ubuntuworld/rng.hpp"

namespace ubuntuworld {

struct LearnParams {
  double alpha = 0.03;  // learning rate, (0, 1]
  double gamma = 0.9;   // discount, [0, 1)
  double epsilon = 0.1; // uniform exploration probability
  double beta0 = 0.5;   // data-driven exploration amplitude
  double tau = 1000;    // envelope decay, in episodes
  double period = 200;  // oscillation period, in episodes

  void validate() const;
  bool operator==(const LearnParams&) const = default;
};

// Goal-conditioned table key.
struct QKey {
  State state;
  Goal goal;

  bool operator==(const QKey&) const = default;
};

struct QKeyHash {
  std::size_t operator()(const QKey& k) const {
    return k.state.hash() * 0x9e3779b97f4a7c15ULL ^ k.goal.hash();
  }
};

// Rows of action values per key; absent rows and entries read as 0.
class QTable {
 public:
  explicit QTable(std::size_t num_actions = 0) : num_actions_(num_actions) {}

  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_rows() const { return rows_.size(); }

  double value(const QKey& key, std::size_t action) const;
  double max_value(const QKey& key) const;
  // Lowest-index action among the maxima.
  std::size_t argmax(const QKey& key) const;
  void set(const QKey& key, std::size_t action, double v);
  const std::vector<double>* row(const QKey& key) const;

  const std::unordered_map<QKey, std::vector<double>, QKeyHash>& rows() const { return rows_; }

  bool operator==(const QTable&) const = default;

 private:
  std::size_t num_actions_;
  std::unordered_map<QKey, std::vector<double>, QKeyHash> rows_;
};

// Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
// Returns the new value. Throws Rejection for a non-finite reward.
double bellman_update(QTable& q, const QKey& s, std::size_t a, double r, const QKey& next,
                      const LearnParams& params);

// beta0 * exp(-t/tau) * |sin(2 pi t / period)|, clamped to [0, 1 - epsilon].
double beta_schedule(std::size_t t, const LearnParams& params);

// Footprint -> suggested action, or nullopt to fall back to random.
using Recommender = std::function<std::optional<std::size_t>(std::string_view)>;

enum class Branch { random, data, greedy };

struct Selection {
  std::size_t action = 0;
  Branch branch = Branch::greedy;
};

// What the data branch may look at.
struct ExplorationContext {
  const Recommender* recommender = nullptr;
  std::string_view footprint;
  bool last_failed = false;
};

// One uniform draw u picks the branch: u < epsilon explores uniformly,
// u < epsilon + beta(t) consults the recommender, anything else exploits.
// The recommender is only asked after a failed action; otherwise (or when it
// has nothing to say) the data branch explores uniformly. Without a
// recommender the data branch exploits.
template <RandomSource R>
Selection select_action(const QTable& q, const QKey& key, std::size_t t,
                        const LearnParams& params, R& rng, const ExplorationContext& ctx = {}) {
  const std::size_t n = q.num_actions();
  const double beta = beta_schedule(t, params);
  const double u = uniform01(rng);
  if (u < params.epsilon) {
    return {static_cast<std::size_t>(uniform_below(rng, n)), Branch::random};
  }
  if (u < params.epsilon + beta && ctx.recommender != nullptr && *ctx.recommender) {
    if (ctx.last_failed) {
      if (auto a = (*ctx.recommender)(ctx.footprint); a && *a < n) return {*a, Branch::data};
    }
    return {static_cast<std::size_t>(uniform_below(rng, n)), Branch::random};
  }
  return {q.argmax(key), Branch::greedy};
}

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string kind() const = 0;
  virtual std::unique_ptr<Agent> clone() const = 0;

  virtual void begin_episode(const Problem& /*problem*/) {}
  // nullopt means the agent considers the goal achieved.
  virtual std::optional<std::size_t> next_action(const Observation& obs, const Goal& goal) = 0;
  virtual void observe(const Observation& /*before*/, std::size_t /*action*/, double /*reward*/,
                       const Observation& /*after*/, const Goal& /*goal*/) {}
  virtual void end_episode() {}

  // Training on: explore and learn. Off: greedy, no updates.
  virtual void set_training(bool /*on*/) {}
  virtual bool training() const { return false; }
  // Called once before an evaluate() pass; agents with randomness reseed so
  // repeated evaluations agree.
  virtual void begin_evaluation() {}
};

class RandomAgent final : public Agent {
 public:
  RandomAgent(std::size_t num_actions, std::uint64_t seed);

  std::string kind() const override { return "random"; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<RandomAgent>(*this); }
  std::optional<std::size_t> next_action(const Observation& obs, const Goal& goal) override;
  void begin_evaluation() override;

 private:
  std::size_t num_actions_;
  std::uint64_t seed_;
  Rng rng_;
};

// Replans optimally from the sensed state every step.
class PlanningAgent final : public Agent {
 public:
  explicit PlanningAgent(DomainPtr domain) : domain_(std::move(domain)) {}

  std::string kind() const override { return "planner"; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<PlanningAgent>(*this); }
  std::optional<std::size_t> next_action(const Observation& obs, const Goal& goal) override;

 private:
  DomainPtr domain_;
};

struct QEntry {
  State state;
  Goal goal;
  std::size_t action = 0;
  double value = 0;

  bool operator==(const QEntry&) const = default;
};

struct AgentSnapshot {
  std::string kind;  // "qlearn" or "qlearn+data"
  std::uint64_t domain = 0;
  LearnParams params;
  std::size_t episodes = 0;
  std::string rng_state;
  std::vector<QEntry> entries;  // non-zero values, sorted

  bool operator==(const AgentSnapshot&) const = default;
};

// Tabular Q-learning with epsilon-random exploration and, when given a
// recommender, data-driven exploration on failures.
class QLearningAgent final : public Agent {
 public:
  QLearningAgent(DomainPtr domain, LearnParams params, std::uint64_t seed,
                 Recommender recommender = {});

  std::string kind() const override { return recommender_ ? "qlearn+data" : "qlearn"; }
  std::unique_ptr<Agent> clone() const override {
    return std::make_unique<QLearningAgent>(*this);
  }

  std::optional<std::size_t> next_action(const Observation& obs, const Goal& goal) override;
  void observe(const Observation& before, std::size_t action, double reward,
               const Observation& after, const Goal& goal) override;
  void end_episode() override;
  void set_training(bool on) override { training_ = on; }
  bool training() const override { return training_; }

  const QTable& table() const { return q_; }
  const LearnParams& params() const { return params_; }
  std::size_t episodes() const { return episodes_; }
  void set_recommender(Recommender r) { recommender_ = std::move(r); }
  const Branch& last_branch() const { return last_branch_; }

  AgentSnapshot snapshot() const;
  // Throws IntegrityError when the snapshot belongs to another domain or
  // names unknown actions.
  static QLearningAgent restore(const AgentSnapshot& snap, DomainPtr domain,
                                Recommender recommender = {});

 private:
  DomainPtr domain_;
  LearnParams params_;
  Rng rng_;
  Recommender recommender_;
  QTable q_;
  std::size_t episodes_ = 0;
  bool training_ = true;
  Branch last_branch_ = Branch::greedy;
};

std::string serialize_snapshot(const AgentSnapshot& snap, const GroundedDomain& domain);
// Throws IntegrityError on any truncation, checksum or field error.
AgentSnapshot parse_snapshot(std::string_view text, const GroundedDomain& domain);
void save_snapshot(const AgentSnapshot& snap, const GroundedDomain& domain,
                   const std::filesystem::path& path);
AgentSnapshot load_snapshot(const std::filesystem::path& path, const GroundedDomain& domain);

EpisodeRecord run_episode(Agent& agent, Environment& env, const Problem& problem);

// Runs the instance list (replays + 1) times in order.
std::vector<EpisodeRecord> train(Agent& agent, Environment& env,
                                 std::span<const Problem> instances, std::size_t replays,
                                 const std::function<void(const EpisodeRecord&)>& on_episode = {});

struct EvalResult {
  std::size_t length = 0;
  bool success = false;

  bool operator==(const EvalResult&) const = default;
};

// Greedy, non-learning pass; the agent's training flag is restored after.
std::vector<EvalResult> evaluate(Agent& agent, Environment& env,
                                 std::span<const Problem> problems);

}  // namespace ubuntuworld
