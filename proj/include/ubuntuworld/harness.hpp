#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubuntuworld/agents.hpp"
#include "ubuntuworld/environment.hpp"
#include "ubuntuworld/retrieval.hpp"

namespace ubuntuworld {

// Bad flags, missing files, unparseable inputs. Maps to exit status 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_runtime = 2;

// Bundled files; the directory can be overridden with UBUNTUWORLD_DATA_DIR.
std::filesystem::path default_domain_path();
std::filesystem::path default_corpus_path();

struct RunConfig {
  std::filesystem::path domain = default_domain_path();
  std::optional<std::filesystem::path> corpus;
  std::string agent = "qlearn";  // random | planner | qlearn | qlearn+data
  LearnParams params;
  std::size_t instances = 1000;
  std::size_t replays = 4;
  std::size_t tasks = 200;
  std::size_t max_steps = 30;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  std::size_t window = 100;
  std::optional<std::filesystem::path> snapshot;
  // Share of single "open <software> <item>" goals among generated problems.
  double open_fraction = 1.0;
  std::size_t top_k = 5;

  // Throws ConfigError. File existence is checked where a file is needed.
  void validate() const;
  GoalMix goal_mix() const;
};

bool is_agent_kind(const std::string& kind);

struct MetricsRow {
  std::size_t episode = 0;  // 1-based
  std::size_t length = 0;
  double total_reward = 0;
  bool success = false;
  double moving_average = 0;
  std::optional<std::size_t> optimal_length;
};

// Mean of the last `window` values pushed; fewer while the window fills.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t window);
  double push(double x);

 private:
  std::size_t window_;
  std::vector<double> buf_;
  std::size_t next_ = 0;
  double sum_ = 0;
};

std::vector<MetricsRow> metrics_rows(const std::vector<EpisodeRecord>& records,
                                     std::size_t window,
                                     const std::vector<std::size_t>& optimal = {});

inline constexpr const char* curve_header =
    "episode,length,total_reward,success,moving_average,optimal_length";
std::string format_row(const MetricsRow& row);

struct TaskRow {
  std::size_t task = 0;  // 1-based
  std::size_t agent_length = 0;
  bool agent_success = false;
  std::size_t optimal_length = 0;
  std::size_t random_length = 0;
};

struct TestSummary {
  std::vector<TaskRow> rows;
  double agent_mean = 0;
  double optimal_mean = 0;
  double random_mean = 0;
  double success_rate = 0;
};

inline constexpr const char* test_header =
    "task,agent_length,agent_success,optimal_length,random_length";

// Shared plumbing for the subcommands.
struct Workspace {
  DomainPtr domain;
  std::shared_ptr<const CorpusIndex> index;  // null without a corpus

  static Workspace open(const RunConfig& config, bool need_corpus);
  Recommender recommender(std::size_t k = 5) const;
};

std::unique_ptr<Agent> make_agent(const RunConfig& config, const Workspace& ws);
// The agent described by config.snapshot, or a fresh one of config.agent.
std::unique_ptr<Agent> load_agent(const RunConfig& config, const Workspace& ws);

std::vector<Problem> training_instances(const RunConfig& config, const DomainPtr& domain);
// Drawn from a stream disjoint from the training instances.
std::vector<Problem> test_tasks(const RunConfig& config, const DomainPtr& domain);
std::vector<std::size_t> optimal_lengths(const GroundedDomain& domain,
                                         const std::vector<Problem>& problems);

TestSummary run_test(Agent& agent, const RunConfig& config, const Workspace& ws,
                     const std::vector<Problem>& tasks);

// Each command writes results to files under config.out and a human summary
// to `out`. They throw; run_command maps exceptions to exit statuses.
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_test(const RunConfig& config, std::ostream& out);
void cmd_demo(const RunConfig& config, std::istream& in, std::ostream& out);
void cmd_query(const RunConfig& config, const std::string& text, std::ostream& out);
void cmd_plan(const RunConfig& config, const std::string& start, const std::string& goal,
              std::ostream& out);

int run_command(const std::function<void()>& command, std::ostream& err);

}  // namespace ubuntuworld
