#include "ubuntuworld/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ubuntuworld/errors.hpp"
#include "ubuntuworld/planner.hpp"

namespace ubuntuworld {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void require_file(const std::filesystem::path& path, const char* what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError(std::string(what) + " not found: " + path.string());
  }
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  return f;
}

std::uint64_t seed_of(const RunConfig& config) {
  if (!config.seed) throw ConfigError("a seed is required (--seed)");
  return *config.seed;
}

bool learns(const std::string& kind) { return kind == "qlearn" || kind == "qlearn+data"; }

// Stream tags keep the instance, task and agent generators independent.
constexpr std::uint64_t tasks_stream = 0x7e57;
constexpr std::uint64_t random_stream = 0xa11;

}  // namespace

namespace {

// The build-time data directory unless UBUNTUWORLD_DATA_DIR points elsewhere
// (an installed Python package ships its own copy).
std::filesystem::path data_dir() {
  if (const char* env = std::getenv("UBUNTUWORLD_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return UBUNTUWORLD_DATA_DIR;
}

}  // namespace

std::filesystem::path default_domain_path() { return data_dir() / "ubuntuworld.domain"; }

std::filesystem::path default_corpus_path() { return data_dir() / "askubuntu_mini.jsonl"; }

bool is_agent_kind(const std::string& kind) {
  return kind == "random" || kind == "planner" || learns(kind);
}

void RunConfig::validate() const {
  if (!is_agent_kind(agent)) {
    throw ConfigError("unknown agent '" + agent + "' (random, planner, qlearn, qlearn+data)");
  }
  try {
    params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (instances == 0) throw ConfigError("instances must be positive");
  if (tasks == 0) throw ConfigError("tasks must be positive");
  if (max_steps == 0) throw ConfigError("max-steps must be positive");
  if (window == 0) throw ConfigError("window must be positive");
  if (top_k == 0) throw ConfigError("k must be positive");
  if (!(open_fraction >= 0.0 && open_fraction <= 1.0)) {
    throw ConfigError("open-fraction must lie in [0, 1]");
  }
}

GoalMix RunConfig::goal_mix() const {
  GoalMix mix;
  mix.open_file_fraction = open_fraction;
  return mix;
}

MovingAverage::MovingAverage(std::size_t window) : window_(window) {
  if (window_ == 0) throw Rejection("moving average window must be positive");
  buf_.reserve(window_);
}

double MovingAverage::push(double x) {
  if (buf_.size() < window_) {
    buf_.push_back(x);
    sum_ += x;
  } else {
    sum_ += x - buf_[next_];
    buf_[next_] = x;
    next_ = (next_ + 1) % window_;
  }
  // Resumming avoids drift over long runs.
  if (next_ == 0) sum_ = std::accumulate(buf_.begin(), buf_.end(), 0.0);
  return sum_ / static_cast<double>(buf_.size());
}

std::vector<MetricsRow> metrics_rows(const std::vector<EpisodeRecord>& records,
                                     std::size_t window,
                                     const std::vector<std::size_t>& optimal) {
  MovingAverage ma(window);
  std::vector<MetricsRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    MetricsRow row{i + 1, r.length, r.total_reward(), r.success,
                   ma.push(static_cast<double>(r.length)), std::nullopt};
    if (!optimal.empty()) row.optimal_length = optimal[i % optimal.size()];
    rows.push_back(row);
  }
  return rows;
}

std::string format_row(const MetricsRow& row) {
  std::string s = std::to_string(row.episode) + ',' + std::to_string(row.length) + ',' +
                  fixed(row.total_reward, 1) + ',' + (row.success ? "1" : "0") + ',' +
                  fixed(row.moving_average) + ',';
  if (row.optimal_length) s += std::to_string(*row.optimal_length);
  return s;
}

Workspace Workspace::open(const RunConfig& config, bool need_corpus) {
  config.validate();
  require_file(config.domain, "domain file");
  Workspace ws;
  try {
    ws.domain = load_grounded_domain(config.domain);
  } catch (const ParseError& e) {
    throw ConfigError(config.domain.string() + ": " + e.what());
  } catch (const ReferenceError& e) {
    throw ConfigError(config.domain.string() + ": " + e.what());
  } catch (const Rejection& e) {
    throw ConfigError(config.domain.string() + ": " + e.what());
  }
  if (need_corpus || config.corpus) {
    const auto path = config.corpus.value_or(default_corpus_path());
    require_file(path, "corpus file");
    try {
      ws.index = std::make_shared<const CorpusIndex>(CorpusIndex::build(load_corpus(path)));
    } catch (const ParseError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    } catch (const Rejection& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return ws;
}

Recommender Workspace::recommender(std::size_t k) const {
  if (!index) return {};
  auto rec = std::make_shared<const DataDrivenRecommender>(domain, index, k);
  return [rec](std::string_view footprint) { return (*rec)(footprint); };
}

std::unique_ptr<Agent> make_agent(const RunConfig& config, const Workspace& ws) {
  const std::uint64_t seed = seed_of(config);
  if (config.agent == "random") {
    return std::make_unique<RandomAgent>(ws.domain->num_actions(), mix_seed(seed, random_stream));
  }
  if (config.agent == "planner") return std::make_unique<PlanningAgent>(ws.domain);
  Recommender rec;
  if (config.agent == "qlearn+data") rec = ws.recommender(config.top_k);
  return std::make_unique<QLearningAgent>(ws.domain, config.params, seed, std::move(rec));
}

std::unique_ptr<Agent> load_agent(const RunConfig& config, const Workspace& ws) {
  if (!config.snapshot) return make_agent(config, ws);
  require_file(*config.snapshot, "snapshot");
  AgentSnapshot snap = load_snapshot(*config.snapshot, *ws.domain);
  Recommender rec;
  if (snap.kind == "qlearn+data") {
    // Evaluation never explores, so a silent recommender keeps the kind.
    rec = ws.index ? ws.recommender(config.top_k)
                   : Recommender([](std::string_view) { return std::optional<std::size_t>(); });
  }
  return std::make_unique<QLearningAgent>(QLearningAgent::restore(snap, ws.domain, std::move(rec)));
}

std::vector<Problem> training_instances(const RunConfig& config, const DomainPtr& domain) {
  return ProblemGenerator(domain, seed_of(config), config.goal_mix()).batch(config.instances);
}

std::vector<Problem> test_tasks(const RunConfig& config, const DomainPtr& domain) {
  return ProblemGenerator(domain, mix_seed(seed_of(config), tasks_stream), config.goal_mix())
      .batch(config.tasks);
}

std::vector<std::size_t> optimal_lengths(const GroundedDomain& domain,
                                         const std::vector<Problem>& problems) {
  std::vector<std::size_t> out;
  out.reserve(problems.size());
  for (const auto& p : problems) {
    const auto plan = plan_optimal(domain, p.start, p.goal);
    if (!plan) throw Unsolvable("generated problem has no plan");
    out.push_back(plan->cost());
  }
  return out;
}

TestSummary run_test(Agent& agent, const RunConfig& config, const Workspace& ws,
                     const std::vector<Problem>& tasks) {
  Environment env(ws.domain, {config.max_steps, seed_of(config)});
  const auto results = evaluate(agent, env, tasks);
  RandomAgent random(ws.domain->num_actions(), mix_seed(seed_of(config), random_stream));
  const auto baseline = evaluate(random, env, tasks);
  const auto optimal = optimal_lengths(*ws.domain, tasks);

  TestSummary s;
  std::size_t successes = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    s.rows.push_back({i + 1, results[i].length, results[i].success, optimal[i],
                      baseline[i].length});
    s.agent_mean += static_cast<double>(results[i].length);
    s.optimal_mean += static_cast<double>(optimal[i]);
    s.random_mean += static_cast<double>(baseline[i].length);
    successes += results[i].success ? 1 : 0;
  }
  const double n = static_cast<double>(tasks.size());
  s.agent_mean /= n;
  s.optimal_mean /= n;
  s.random_mean /= n;
  s.success_rate = static_cast<double>(successes) / n;
  return s;
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const Workspace ws = Workspace::open(config, config.agent == "qlearn+data");
  auto agent = make_agent(config, ws);
  const auto instances = training_instances(config, ws.domain);
  const auto optimal = optimal_lengths(*ws.domain, instances);

  std::ofstream curve = open_output(config.out, "curve.csv");
  curve << curve_header << '\n' << std::flush;
  MovingAverage ma(config.window);
  std::size_t episode = 0;
  double optimal_mean = 0;
  for (auto n : optimal) optimal_mean += static_cast<double>(n);
  optimal_mean /= static_cast<double>(optimal.size());

  Environment env(ws.domain, {config.max_steps, seed_of(config)});
  double last_ma = 0;
  train(*agent, env, instances, config.replays, [&](const EpisodeRecord& r) {
    last_ma = ma.push(static_cast<double>(r.length));
    MetricsRow row{episode + 1, r.length, r.total_reward(), r.success, last_ma,
                   optimal[episode % optimal.size()]};
    ++episode;
    curve << format_row(row) << '\n' << std::flush;
    if (!curve) throw std::runtime_error("write failed: " + (config.out / "curve.csv").string());
  });

  out << "trained " << agent->kind() << " for " << episode << " episodes\n"
      << "optimal mean " << fixed(optimal_mean, 3) << ", final moving average "
      << fixed(last_ma, 3) << " (window " << config.window << ")\n"
      << "curve: " << (config.out / "curve.csv").string() << '\n';

  if (auto* q = dynamic_cast<QLearningAgent*>(agent.get())) {
    const auto path = config.out / "agent.snapshot";
    open_output(config.out, "agent.snapshot").close();
    save_snapshot(q->snapshot(), *ws.domain, path);
    out << "snapshot: " << path.string() << '\n';
  }
}

void cmd_test(const RunConfig& config, std::ostream& out) {
  const Workspace ws = Workspace::open(config, false);
  auto agent = load_agent(config, ws);
  const auto tasks = test_tasks(config, ws.domain);
  const TestSummary s = run_test(*agent, config, ws, tasks);

  std::ofstream f = open_output(config.out, "test.csv");
  f << test_header << '\n';
  for (const auto& r : s.rows) {
    f << r.task << ',' << r.agent_length << ',' << (r.agent_success ? 1 : 0) << ','
      << r.optimal_length << ',' << r.random_length << '\n';
  }
  f << "mean," << fixed(s.agent_mean) << ',' << fixed(s.success_rate) << ','
    << fixed(s.optimal_mean) << ',' << fixed(s.random_mean) << '\n';
  if (!f) throw std::runtime_error("write failed: " + (config.out / "test.csv").string());

  out << agent->kind() << " on " << s.rows.size() << " tasks: mean length "
      << fixed(s.agent_mean, 3) << ", success " << fixed(100.0 * s.success_rate, 1)
      << "%; optimal " << fixed(s.optimal_mean, 3) << "; random " << fixed(s.random_mean, 3)
      << '\n'
      << "results: " << (config.out / "test.csv").string() << '\n';
}

namespace {

constexpr const char* demo_help =
    "requests:\n"
    "  open <software>     open the file with <software>\n"
    "  install <software>  install <software>\n"
    "  remove <software>   uninstall <software> yourself, outside the agent\n"
    "  suggest <goal>      show the next action for a goal, e.g. suggest open gedit file\n"
    "  state               print the sensed state\n"
    "  help                this text\n"
    "  quit                leave\n";

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

class Demo {
 public:
  Demo(const RunConfig& config, const Workspace& ws, std::unique_ptr<Agent> agent,
       std::ostream& out)
      : config_(config), ws_(ws), agent_(std::move(agent)), out_(out),
        state_(canonical_base_state(*ws.domain)) {
    agent_->set_training(false);
    agent_->begin_evaluation();
  }

  // False on quit.
  bool handle(const std::string& line) {
    const auto w = words(line);
    if (w.empty()) return true;
    const std::string& verb = w[0];
    if (verb == "quit" || verb == "exit") return false;
    if (verb == "help") {
      out_ << demo_help;
    } else if (verb == "state" && w.size() == 1) {
      out_ << ws_.domain->format_state(state_);
    } else if ((verb == "open" || verb == "install" || verb == "remove") && w.size() == 2) {
      if (!is_software(w[1])) {
        out_ << "unknown software '" << w[1] << "'\n" << demo_help;
      } else if (verb == "remove") {
        remove(w[1]);
      } else {
        run_task(verb == "open" ? "open " + w[1] + " " + item() : "installed " + w[1]);
      }
    } else if (verb == "suggest" && w.size() >= 2) {
      suggest(line.substr(line.find(verb) + verb.size()));
    } else {
      out_ << "cannot parse '" << line << "'\n" << demo_help;
    }
    return true;
  }

 private:
  bool is_software(const std::string& name) const {
    const auto* obj = ws_.domain->domain().find_object(name);
    return obj != nullptr && obj->type == "software";
  }

  std::string item() const {
    const auto items = ws_.domain->domain().objects_of("item");
    return items.empty() ? std::string() : items.front();
  }

  void set(const std::string& predicate, bool value) {
    if (auto i = ws_.domain->find_predicate(predicate)) state_ = state_.with(*i, value);
  }

  void remove(const std::string& software) {
    set("installed " + software, false);
    for (const auto& o : ws_.domain->domain().objects_of("item")) {
      set("open " + software + " " + o, false);
    }
    out_ << software << " removed\n";
  }

  std::optional<Goal> parse_goal(const std::string& goal_text) {
    try {
      return ws_.domain->parse_goal(goal_text);
    } catch (const std::exception& e) {
      out_ << "bad goal: " << e.what() << '\n';
      return std::nullopt;
    }
  }

  void suggest(const std::string& goal_text) {
    const auto goal = parse_goal(goal_text);
    if (!goal) return;
    if (satisfies(state_, *goal)) {
      out_ << "already done\n";
      return;
    }
    Observation obs;
    obs.state = state_;
    std::optional<std::size_t> a;
    try {
      a = agent_->next_action(obs, *goal);
    } catch (const Unsolvable&) {
      out_ << "unsolvable\n";
      return;
    }
    if (a) out_ << "suggestion: " << ws_.domain->action(*a).name << '\n';
  }

  void run_task(const std::string& goal_text) {
    const auto goal = parse_goal(goal_text);
    if (!goal) return;
    if (satisfies(state_, *goal)) {
      out_ << "already done\n";
      return;
    }
    Environment env(ws_.domain, {config_.max_steps, 0});
    Observation obs = env.reset({state_, *goal, ws_.domain->fingerprint()});
    agent_->begin_episode({state_, *goal, ws_.domain->fingerprint()});
    try {
      while (!obs.done) {
        const auto a = agent_->next_action(obs, *goal);
        if (!a) break;
        obs = env.step(*a).observation;
        out_ << "$ " << ws_.domain->action(*a).name << '\n';
        if (!obs.footprint.empty()) out_ << obs.footprint << '\n';
      }
    } catch (const Unsolvable&) {
      out_ << "unsolvable\n";
    }
    agent_->end_episode();
    state_ = obs.state;
    if (obs.goal_reached) {
      out_ << "done in " << obs.steps_taken << " step" << (obs.steps_taken == 1 ? "" : "s")
           << '\n';
    } else {
      out_ << "gave up after " << obs.steps_taken << " steps\n";
    }
  }

  const RunConfig& config_;
  const Workspace& ws_;
  std::unique_ptr<Agent> agent_;
  std::ostream& out_;
  State state_;
};

}  // namespace

void cmd_demo(const RunConfig& config, std::istream& in, std::ostream& out) {
  const Workspace ws = Workspace::open(config, false);
  if (learns(config.agent) && !config.snapshot) {
    throw ConfigError("demo needs a trained snapshot (--snapshot)");
  }
  RunConfig cfg = config;
  if (!cfg.seed) cfg.seed = 0;
  Demo demo(cfg, ws, load_agent(cfg, ws), out);
  out << "ubuntuworld demo; type help for requests\n";
  for (std::string line; out << "> " << std::flush, std::getline(in, line);) {
    if (!demo.handle(line)) break;
  }
  out << "bye\n";
}

void cmd_query(const RunConfig& config, const std::string& text, std::ostream& out) {
  const Workspace ws = Workspace::open(config, true);
  std::vector<Hit> hits;
  try {
    hits = ws.index->query(text, config.top_k);
  } catch (const EmptyQuery&) {
  }
  if (hits.empty()) {
    out << "no matching posts\nno recommendation\n";
    return;
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const Post& p = ws.index->posts()[hits[i].post];
    out << i + 1 << ". " << p.id << "  " << fixed(hits[i].score) << "  " << p.title << '\n';
  }
  const DataDrivenRecommender rec(ws.domain, ws.index, config.top_k);
  const auto r = rec.recommend(text);
  if (!r) {
    out << "no recommendation\n";
    return;
  }
  out << "recommendation: " << r->action;
  if (auto a = rec.ground(r->action, text)) out << " -> " << ws.domain->action(*a).name;
  out << " (similarity " << fixed(r->similarity) << "; posts";
  for (const auto& id : r->supporting_posts) out << ' ' << id;
  out << ")\n";
}

void cmd_plan(const RunConfig& config, const std::string& start, const std::string& goal,
              std::ostream& out) {
  const Workspace ws = Workspace::open(config, false);
  State s;
  Goal g;
  try {
    s = start == "base" ? canonical_base_state(*ws.domain)
                          : ws.domain->parse_state(start);
    g = ws.domain->parse_goal(goal);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto plan = plan_optimal(*ws.domain, s, g);
  if (!plan) {
    out << "unsolvable\n";
    return;
  }
  if (plan->actions.empty()) {
    out << "goal already satisfied; empty plan\n";
    return;
  }
  for (std::size_t i = 0; i < plan->actions.size(); ++i) {
    out << i + 1 << ". " << ws.domain->action(plan->actions[i]).name << '\n';
  }
  out << plan->cost() << " action" << (plan->cost() == 1 ? "" : "s") << '\n';
}

int run_command(const std::function<void()>& command, std::ostream& err) {
  try {
    command();
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}

}  // namespace ubuntuworld
