#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "oracles.hpp"
#include "ubuntuworld/environment.hpp"
#include "ubuntuworld/errors.hpp"
#include "ubuntuworld/planner.hpp"

using namespace ubuntuworld;

namespace {

DomainPtr bundled() {
  static DomainPtr d = load_grounded_domain(std::string(UBUNTUWORLD_DATA_DIR) + "/ubuntuworld.domain");
  return d;
}

std::size_t act(const std::string& name) { return *bundled()->find_action(name); }

Problem problem(const std::string& start, const std::string& goal) {
  auto d = bundled();
  return {d->parse_state(start), d->parse_goal(goal), d->fingerprint()};
}

}  // namespace

TEST_CASE("reward function values") {
  auto d = bundled();
  const auto& a = d->action(act("Sudo_On"));
  const State s = d->parse_state("");
  const State t = d->parse_state("sudo-on");
  CHECK(reward_fn(s, a, s, d->parse_goal("sudo-on")) == -10.0);
  CHECK(reward_fn(s, a, s, d->parse_goal("installed vlc")) == -10.0);
  CHECK(reward_fn(s, a, t, d->parse_goal("installed vlc")) == -5.0);
  CHECK(reward_fn(s, a, t, d->parse_goal("sudo-on")) == 95.0);
  // Goal already true and nothing changed.
  CHECK(reward_fn(t, a, t, d->parse_goal("sudo-on")) == 90.0);
}

TEST_CASE("reset") {
  auto d = bundled();
  Environment env(d);
  SUBCASE("satisfied start") {
    const Observation o = env.reset(problem("installed gedit, open gedit file", "open gedit file"));
    CHECK(o.done);
    CHECK(o.goal_reached);
    CHECK(o.steps_taken == 0);
  }
  SUBCASE("open gedit problem") {
    const Problem p = problem("internet-on", "open gedit file");
    const Observation o = env.reset(p);
    CHECK_FALSE(o.done);
    CHECK(o.state == p.start);
    CHECK(o.footprint.empty());
  }
  SUBCASE("foreign problem") {
    Problem p = problem("internet-on", "open gedit file");
    p.domain ^= 1;
    CHECK_THROWS_AS(env.reset(p), Rejection);
    Problem q = problem("internet-on", "open gedit file");
    q.start = State(std::vector<bool>(3, false));
    CHECK_THROWS_AS(env.reset(q), Rejection);
  }
}

TEST_CASE("step: failures, state changes and the goal") {
  auto d = bundled();
  Environment env(d);
  env.reset(problem("internet-on", "open gedit file"));

  auto r = env.step(act("AptGet(gedit)"));
  CHECK(r.reward == -10.0);
  CHECK(r.observation.state == d->parse_state("internet-on"));
  CHECK(r.observation.footprint.find("Permission denied") != std::string::npos);
  CHECK(r.observation.last_failed);
  CHECK(r.observation.steps_taken == 1);

  r = env.step(act("Sudo_On"));
  CHECK(r.reward == -5.0);
  CHECK(r.observation.state[*d->find_predicate("sudo-on")]);
  CHECK_FALSE(r.observation.last_failed);

  env.step(act("AptGet(gedit)"));
  r = env.step(act("Open_gedit(file)"));
  CHECK(r.observation.footprint.find("cannot open display") != std::string::npos);
  CHECK(r.reward == -10.0);
  env.step(act("Sudo_Off"));
  r = env.step(act("Open_gedit(file)"));
  CHECK(r.reward == 95.0);
  CHECK(r.observation.done);
  CHECK(r.observation.goal_reached);
  CHECK_THROWS_AS(env.step(act("Sudo_On")), ContractViolation);
}

TEST_CASE("step contract") {
  auto d = bundled();
  Environment env(d);
  CHECK_THROWS_AS(env.step(0), ContractViolation);  // no episode
  env.reset(problem("internet-on", "open gedit file"));
  CHECK_THROWS_AS(env.step(d->num_actions()), Rejection);
}

TEST_CASE("failure footprints are chosen by the violated precondition") {
  auto d = bundled();
  Environment env(d);
  env.reset(problem("sudo-on", "open vlc file"));
  auto r = env.step(act("AptGet(vlc)"));
  CHECK(r.observation.footprint.find("Temporary failure resolving") != std::string::npos);
  CHECK(r.observation.footprint.find("vlc") != std::string::npos);
  env.reset(problem("", "open vlc file"));
  r = env.step(act("Open_vlc(file)"));
  CHECK(r.observation.footprint.find("Command 'vlc' not found") != std::string::npos);
}

TEST_CASE("episode cap") {
  auto d = bundled();
  Environment env(d, {3, 0});
  env.reset(problem("", "open vlc file"));
  StepResult r;
  for (int i = 0; i < 3; ++i) r = env.step(act("Internet_Off"));
  CHECK(r.observation.done);
  CHECK_FALSE(r.observation.goal_reached);
  CHECK(r.observation.steps_taken == 3);
}

TEST_CASE("shell backend is not available") {
  ShellBackend shell;
  auto d = bundled();
  CHECK_THROWS_AS(shell.execute(d->parse_state(""), d->action(0)), ContractViolation);
}

TEST_CASE("set_state senses an external change") {
  auto d = bundled();
  Environment env(d);
  env.reset(problem("internet-on", "open gedit file"));
  env.set_state(d->parse_state("installed gedit, open gedit file"));
  CHECK(env.observation().goal_reached);
  CHECK(env.observation().done);
}

TEST_CASE("problem generation") {
  auto d = bundled();
  SUBCASE("same seed, same problems") {
    ProblemGenerator a(d, 0), b(d, 0);
    for (int i = 0; i < 50; ++i) CHECK(a.next() == b.next());
    ProblemGenerator c(d, 1);
    CHECK(ProblemGenerator(d, 0).batch(20) != c.batch(20));
  }
  SUBCASE("1000 problems: reachable, unsatisfied at the start") {
    ProblemGenerator gen(d, 7);
    std::size_t open_goals = 0;
    for (const auto& p : gen.batch(1000)) {
      CHECK_FALSE(satisfies(p.start, p.goal));
      const unsigned start = oracle::to_mask(*d, p.start);
      CHECK(oracle::distance(start, [&](unsigned s) {
              return satisfies(oracle::from_mask(*d, s), p.goal);
            }) > 0);
      if (p.goal.literals().size() == 1 &&
          d->predicates()[p.goal.literals()[0].predicate].name == "open") {
        ++open_goals;
      }
    }
    // At least the 80% open-file share; the random-literal family can also
    // draw a single open literal.
    CHECK(open_goals > 740);
  }
  SUBCASE("open fraction 1 gives only open-file goals") {
    GoalMix mix;
    mix.open_file_fraction = 1.0;
    for (const auto& p : ProblemGenerator(d, 5, mix).batch(300)) {
      REQUIRE(p.goal.literals().size() == 1);
      CHECK(d->predicates()[p.goal.literals()[0].predicate].name == "open");
      CHECK(p.goal.literals()[0].value);
    }
  }
  SUBCASE("open-file family spans plan lengths 1 to 5") {
    GoalMix mix;
    mix.open_file_fraction = 1.0;
    ProblemGenerator gen(d, 3, mix);
    std::set<std::size_t> lengths;
    for (const auto& p : gen.batch(1000)) {
      lengths.insert(plan_optimal(*d, p.start, p.goal)->cost());
    }
    CHECK(lengths == std::set<std::size_t>{1, 2, 3, 4, 5});
  }
  SUBCASE("unsatisfiable request") {
    const Domain tiny = parse_domain("predicates:\n  p\n");
    Rng rng(1);
    CHECK_THROWS(generate_problem(GroundedDomain(tiny), rng, State(std::vector<bool>{false})));
  }
}
