#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ubuntuworld/harness.hpp"

namespace uw = ubuntuworld;

int main(int argc, char** argv) {
  uw::RunConfig cfg;
  CLI::App app{"UbuntuWorld: learning agents for an emulated Ubuntu terminal"};
  app.set_config("--config", "", "INI or TOML file with option defaults");
  app.require_subcommand(1);
  app.fallthrough();

  std::string domain = cfg.domain.string();
  std::string corpus, out = ".", snapshot;
  std::uint64_t seed = 0;
  auto env = [](const char* name) { return std::string("UBUNTUWORLD_") + name; };

  app.add_option("--domain", domain, "domain file")->envname(env("DOMAIN"))->capture_default_str();
  app.add_option("--corpus", corpus, "Q&A corpus (JSON Lines)")->envname(env("CORPUS"));
  app.add_option("--agent", cfg.agent, "random | planner | qlearn | qlearn+data")
      ->envname(env("AGENT"))
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "random seed")->envname(env("SEED"));
  app.add_option("--episodes", cfg.instances, "training instances per pass")
      ->envname(env("EPISODES"))
      ->capture_default_str();
  app.add_option("--replays", cfg.replays, "extra passes over the instances")
      ->envname(env("REPLAYS"))
      ->capture_default_str();
  app.add_option("--tasks", cfg.tasks, "test tasks")->envname(env("TASKS"))->capture_default_str();
  app.add_option("--max-steps", cfg.max_steps, "episode step cap")
      ->envname(env("MAX_STEPS"))
      ->capture_default_str();
  app.add_option("--alpha", cfg.params.alpha)->envname(env("ALPHA"))->capture_default_str();
  app.add_option("--gamma", cfg.params.gamma)->envname(env("GAMMA"))->capture_default_str();
  app.add_option("--epsilon", cfg.params.epsilon)->envname(env("EPSILON"))->capture_default_str();
  app.add_option("--beta0", cfg.params.beta0)->envname(env("BETA0"))->capture_default_str();
  app.add_option("--tau", cfg.params.tau)->envname(env("TAU"))->capture_default_str();
  app.add_option("--period", cfg.params.period)->envname(env("PERIOD"))->capture_default_str();
  app.add_option("--open-fraction", cfg.open_fraction, "share of open-file goals")
      ->envname(env("OPEN_FRACTION"))
      ->capture_default_str();
  app.add_option("--out", out, "output directory")->envname(env("OUT"))->capture_default_str();
  app.add_option("--window", cfg.window, "moving-average window")
      ->envname(env("WINDOW"))
      ->capture_default_str();
  app.add_option("--snapshot", snapshot, "agent snapshot to load")->envname(env("SNAPSHOT"));
  app.add_option("-k,--top-k", cfg.top_k, "posts retrieved per query")
      ->envname(env("TOP_K"))
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "train an agent, write curve.csv and agent.snapshot");
  auto* test = app.add_subcommand("test", "compare an agent with optimal and random on fresh tasks");
  auto* demo = app.add_subcommand("demo", "interactive session with a trained agent");
  auto* query = app.add_subcommand("query", "retrieve posts and a recommended action for a text");
  std::string text;
  query->add_option("text", text, "error text or question")->required();
  auto* plan = app.add_subcommand("plan", "print an optimal plan");
  std::string start = "base", goal;
  plan->add_option("--start", start, "true predicates, comma separated, or 'base'")
      ->capture_default_str();
  plan->add_option("--goal", goal, "goal literals, e.g. 'open gedit file'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? uw::exit_ok : uw::exit_config;
  }

  cfg.domain = domain;
  if (!corpus.empty()) cfg.corpus = corpus;
  cfg.out = out;
  if (!snapshot.empty()) cfg.snapshot = snapshot;
  if (seed_opt->count() > 0) cfg.seed = seed;

  return uw::run_command(
      [&] {
        if (*train) uw::cmd_train(cfg, std::cout);
        if (*test) uw::cmd_test(cfg, std::cout);
        if (*demo) uw::cmd_demo(cfg, std::cin, std::cout);
        if (*query) uw::cmd_query(cfg, text, std::cout);
        if (*plan) uw::cmd_plan(cfg, start, goal, std::cout);
      },
      std::cerr);
}
