#include "ubuntuworld/agents.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ubuntuworld/errors.hpp"
#include "ubuntuworld/planner.hpp"

namespace ubuntuworld {

void LearnParams::validate() const {
  auto fail = [](const std::string& msg) { throw Rejection("learn params: " + msg); };
  if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must be in [0, 1]");
  if (!(beta0 >= 0.0) || !std::isfinite(beta0)) fail("beta0 must be a finite value >= 0");
  if (!(tau > 0.0)) fail("tau must be > 0");
  if (!(period > 0.0) || !std::isfinite(period)) fail("period must be finite and > 0");
}

double QTable::value(const QKey& key, std::size_t action) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? 0.0 : it->second.at(action);
}

double QTable::max_value(const QKey& key) const {
  auto it = rows_.find(key);
  if (it == rows_.end() || it->second.empty()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

std::size_t QTable::argmax(const QKey& key) const {
  auto it = rows_.find(key);
  if (it == rows_.end()) return 0;
  // max_element returns the first maximum.
  return static_cast<std::size_t>(
      std::max_element(it->second.begin(), it->second.end()) - it->second.begin());
}

void QTable::set(const QKey& key, std::size_t action, double v) {
  if (action >= num_actions_) throw Rejection("action index out of range");
  if (!std::isfinite(v)) throw Rejection("non-finite Q value");
  auto [it, inserted] = rows_.try_emplace(key);
  if (inserted) it->second.assign(num_actions_, 0.0);
  it->second[action] = v;
}

const std::vector<double>* QTable::row(const QKey& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

double bellman_update(QTable& q, const QKey& s, std::size_t a, double r, const QKey& next,
                      const LearnParams& params) {
  if (!std::isfinite(r)) throw Rejection("bellman_update: non-finite reward");
  const double target = r + params.gamma * q.max_value(next);
  const double v = (1.0 - params.alpha) * q.value(s, a) + params.alpha * target;
  q.set(s, a, v);
  return v;
}

double beta_schedule(std::size_t t, const LearnParams& params) {
  const double x = static_cast<double>(t);
  const double envelope = params.beta0 * std::exp(-x / params.tau);
  const double beta = envelope * std::abs(std::sin(2.0 * std::numbers::pi * x / params.period));
  return std::clamp(beta, 0.0, std::max(0.0, 1.0 - params.epsilon));
}

RandomAgent::RandomAgent(std::size_t num_actions, std::uint64_t seed)
    : num_actions_(num_actions), seed_(seed), rng_(seed) {
  if (num_actions_ == 0) throw Rejection("random agent needs at least one action");
}

std::optional<std::size_t> RandomAgent::next_action(const Observation& /*obs*/,
                                                    const Goal& /*goal*/) {
  return static_cast<std::size_t>(rng_.below(num_actions_));
}

void RandomAgent::begin_evaluation() { rng_ = Rng(mix_seed(seed_, 0xe7a1)); }

std::optional<std::size_t> PlanningAgent::next_action(const Observation& obs, const Goal& goal) {
  return planning_next_action(*domain_, obs.state, goal);
}

QLearningAgent::QLearningAgent(DomainPtr domain, LearnParams params, std::uint64_t seed,
                               Recommender recommender)
    : domain_(std::move(domain)),
      params_(params),
      rng_(seed),
      recommender_(std::move(recommender)),
      q_(domain_->num_actions()) {
  params_.validate();
  if (domain_->num_actions() == 0) throw Rejection("domain has no actions");
}

std::optional<std::size_t> QLearningAgent::next_action(const Observation& obs, const Goal& goal) {
  const QKey key{obs.state, goal};
  if (!training_) {
    last_branch_ = Branch::greedy;
    return q_.argmax(key);
  }
  const ExplorationContext ctx{recommender_ ? &recommender_ : nullptr, obs.footprint,
                               obs.last_failed};
  const Selection sel = select_action(q_, key, episodes_, params_, rng_, ctx);
  last_branch_ = sel.branch;
  return sel.action;
}

void QLearningAgent::observe(const Observation& before, std::size_t action, double reward,
                             const Observation& after, const Goal& goal) {
  if (!training_) return;
  bellman_update(q_, {before.state, goal}, action, reward, {after.state, goal}, params_);
}

void QLearningAgent::end_episode() {
  if (training_) ++episodes_;
}

AgentSnapshot QLearningAgent::snapshot() const {
  AgentSnapshot snap;
  snap.kind = kind();
  snap.domain = domain_->fingerprint();
  snap.params = params_;
  snap.episodes = episodes_;
  snap.rng_state = rng_.save();
  for (const auto& [key, row] : q_.rows()) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (row[a] != 0.0) snap.entries.push_back({key.state, key.goal, a, row[a]});
    }
  }
  std::sort(snap.entries.begin(), snap.entries.end(), [](const QEntry& x, const QEntry& y) {
    const auto xs = x.state.bits(), ys = y.state.bits();
    if (xs != ys) return xs < ys;
    const auto xg = x.goal.encode(), yg = y.goal.encode();
    if (xg != yg) return xg < yg;
    return x.action < y.action;
  });
  return snap;
}

QLearningAgent QLearningAgent::restore(const AgentSnapshot& snap, DomainPtr domain,
                                       Recommender recommender) {
  if (snap.domain != domain->fingerprint()) {
    throw IntegrityError("snapshot was taken on a different domain");
  }
  QLearningAgent agent(domain, snap.params, 0, std::move(recommender));
  agent.episodes_ = snap.episodes;
  agent.rng_.restore(snap.rng_state);
  for (const auto& e : snap.entries) {
    if (!domain->valid(e.state) || !domain->valid(e.goal) || e.action >= domain->num_actions()) {
      throw IntegrityError("snapshot entry does not fit the domain");
    }
    agent.q_.set({e.state, e.goal}, e.action, e.value);
  }
  return agent;
}

namespace {

constexpr std::string_view kSnapshotFormat = "ubuntuworld-snapshot/1";

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IntegrityError("snapshot: bad number '" + s + "'");
  }
  if (used != s.size()) throw IntegrityError("snapshot: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, int base = 10) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IntegrityError("snapshot: bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::string serialize_snapshot(const AgentSnapshot& snap, const GroundedDomain& domain) {
  std::ostringstream out;
  out << "format " << kSnapshotFormat << '\n';
  out << "kind " << snap.kind << '\n';
  out << "domain " << hex64(snap.domain) << '\n';
  out << "alpha " << exact(snap.params.alpha) << '\n';
  out << "gamma " << exact(snap.params.gamma) << '\n';
  out << "epsilon " << exact(snap.params.epsilon) << '\n';
  out << "beta0 " << exact(snap.params.beta0) << '\n';
  out << "tau " << exact(snap.params.tau) << '\n';
  out << "period " << exact(snap.params.period) << '\n';
  out << "episodes " << snap.episodes << '\n';
  out << "rng " << snap.rng_state << '\n';
  out << "entries " << snap.entries.size() << '\n';
  for (const auto& e : snap.entries) {
    out << "q " << e.state.bits() << ' ' << e.goal.encode() << ' '
        << domain.action(e.action).name << ' ' << exact(e.value) << '\n';
  }
  std::string body = out.str();
  body += "checksum " + hex64(fnv1a(body)) + "\n";
  return body;
}

AgentSnapshot parse_snapshot(std::string_view text, const GroundedDomain& domain) {
  const auto marker = text.rfind("checksum ");
  if (marker == std::string_view::npos || (marker != 0 && text[marker - 1] != '\n')) {
    throw IntegrityError("snapshot: missing checksum (truncated?)");
  }
  const auto body = text.substr(0, marker);
  auto tail = text.substr(marker + 9);
  // The writer always ends with a newline; without it the file was cut short.
  if (tail.empty() || tail.back() != '\n') throw IntegrityError("snapshot: truncated");
  tail.remove_suffix(1);
  if (!tail.empty() && tail.back() == '\r') tail.remove_suffix(1);
  if (parse_u64(std::string(tail), 16) != fnv1a(body)) {
    throw IntegrityError("snapshot: checksum mismatch");
  }

  std::istringstream in{std::string(body)};
  std::string line;
  auto field = [&](std::string_view name) -> std::string {
    if (!std::getline(in, line)) throw IntegrityError("snapshot: missing " + std::string(name));
    if (line.rfind(std::string(name) + " ", 0) != 0) {
      throw IntegrityError("snapshot: expected '" + std::string(name) + "'");
    }
    return line.substr(name.size() + 1);
  };

  AgentSnapshot snap;
  if (field("format") != kSnapshotFormat) throw IntegrityError("snapshot: unknown format");
  snap.kind = field("kind");
  if (snap.kind != "qlearn" && snap.kind != "qlearn+data") {
    throw IntegrityError("snapshot: unknown agent kind '" + snap.kind + "'");
  }
  snap.domain = parse_u64(field("domain"), 16);
  snap.params.alpha = parse_double(field("alpha"));
  snap.params.gamma = parse_double(field("gamma"));
  snap.params.epsilon = parse_double(field("epsilon"));
  snap.params.beta0 = parse_double(field("beta0"));
  snap.params.tau = parse_double(field("tau"));
  snap.params.period = parse_double(field("period"));
  try {
    snap.params.validate();
  } catch (const Rejection& e) {
    throw IntegrityError(std::string("snapshot: ") + e.what());
  }
  snap.episodes = parse_u64(field("episodes"));
  snap.rng_state = field("rng");
  const auto count = parse_u64(field("entries"));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::istringstream row(field("q"));
    std::string bits, goal, action, value, extra;
    if (!(row >> bits >> goal >> action >> value) || (row >> extra)) {
      throw IntegrityError("snapshot: malformed q entry");
    }
    QEntry e;
    try {
      e.state = State::from_bits(bits);
      e.goal = Goal::decode(goal);
    } catch (const std::exception& ex) {
      throw IntegrityError(std::string("snapshot: ") + ex.what());
    }
    const auto idx = domain.find_action(action);
    if (!idx) throw IntegrityError("snapshot: unknown action '" + action + "'");
    e.action = *idx;
    e.value = parse_double(value);
    if (!std::isfinite(e.value)) throw IntegrityError("snapshot: non-finite value");
    snap.entries.push_back(std::move(e));
  }
  if (std::getline(in, line)) throw IntegrityError("snapshot: trailing data");
  return snap;
}

void save_snapshot(const AgentSnapshot& snap, const GroundedDomain& domain,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  out << serialize_snapshot(snap, domain);
  if (!out) throw std::runtime_error("failed writing snapshot " + path.string());
}

AgentSnapshot load_snapshot(const std::filesystem::path& path, const GroundedDomain& domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_snapshot(buffer.str(), domain);
}

EpisodeRecord run_episode(Agent& agent, Environment& env, const Problem& problem) {
  EpisodeRecord rec;
  rec.problem = problem;
  Observation obs = env.reset(problem);
  agent.begin_episode(problem);
  while (!obs.done) {
    const auto action = agent.next_action(obs, problem.goal);
    if (!action) break;
    StepResult result = env.step(*action);
    agent.observe(obs, *action, result.reward, result.observation, problem.goal);
    rec.actions.push_back(*action);
    rec.rewards.push_back(result.reward);
    obs = std::move(result.observation);
  }
  agent.end_episode();
  rec.length = rec.actions.size();
  rec.success = obs.goal_reached;
  return rec;
}

std::vector<EpisodeRecord> train(Agent& agent, Environment& env,
                                 std::span<const Problem> instances, std::size_t replays,
                                 const std::function<void(const EpisodeRecord&)>& on_episode) {
  if (instances.empty()) throw Rejection("train: no instances");
  std::vector<EpisodeRecord> curve;
  curve.reserve(instances.size() * (replays + 1));
  for (std::size_t pass = 0; pass <= replays; ++pass) {
    for (const auto& p : instances) {
      curve.push_back(run_episode(agent, env, p));
      if (on_episode) on_episode(curve.back());
    }
  }
  return curve;
}

std::vector<EvalResult> evaluate(Agent& agent, Environment& env,
                                 std::span<const Problem> problems) {
  const bool was_training = agent.training();
  agent.set_training(false);
  agent.begin_evaluation();
  std::vector<EvalResult> out;
  out.reserve(problems.size());
  for (const auto& p : problems) {
    const auto rec = run_episode(agent, env, p);
    out.push_back({rec.length, rec.success});
  }
  agent.set_training(was_training);
  return out;
}

}  // namespace ubuntuworld
