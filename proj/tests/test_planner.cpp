#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "ubuntuworld/agents.hpp"
#include "ubuntuworld/environment.hpp"
#include "ubuntuworld/planner.hpp"

using namespace ubuntuworld;

namespace {

DomainPtr bundled() {
  static DomainPtr d = load_grounded_domain(std::string(UBUNTUWORLD_DATA_DIR) + "/ubuntuworld.domain");
  return d;
}

std::vector<std::string> names(const Plan& p) {
  std::vector<std::string> out;
  for (auto a : p.actions) out.push_back(bundled()->action(a).name);
  return out;
}

}  // namespace

TEST_CASE("worked plans") {
  auto d = bundled();
  const Goal g = d->parse_goal("open gedit file");

  auto one = plan_optimal(*d, d->parse_state("installed gedit"), g);
  REQUIRE(one);
  CHECK(names(*one) == std::vector<std::string>{"Open_gedit(file)"});

  auto none = plan_optimal(*d, d->parse_state("installed gedit, open gedit file"), g);
  REQUIRE(none);
  CHECK(none->cost() == 0);

  auto five = plan_optimal(*d, d->parse_state(""), g);
  REQUIRE(five);
  // Sudo_On and Internet_On commute; canonical order puts Internet_On first.
  CHECK(names(*five) == std::vector<std::string>{"Internet_On", "Sudo_On", "AptGet(gedit)",
                                                 "Sudo_Off", "Open_gedit(file)"});
}

TEST_CASE("unreachable goal") {
  const Domain tiny = parse_domain(R"(predicates:
  p
  q
action: SetP
  eff: p
  doc:
    sets p.
)");
  GroundedDomain d(tiny);
  CHECK_FALSE(plan_optimal(d, d.parse_state(""), d.parse_goal("q")));
  CHECK_THROWS_AS(planning_next_action(d, d.parse_state(""), d.parse_goal("q")), Unsolvable);
}

TEST_CASE("planning agent next action") {
  auto d = bundled();
  const Goal g = d->parse_goal("open gedit file");
  CHECK(d->action(*planning_next_action(*d, d->parse_state(""), g)).name == "Internet_On");
  CHECK(d->action(*planning_next_action(*d, d->parse_state("internet-on"), g)).name ==
        "Sudo_On");
  CHECK(d->action(*planning_next_action(*d, d->parse_state("installed gedit"), g)).name ==
        "Open_gedit(file)");
  CHECK_FALSE(planning_next_action(*d, d->parse_state("installed gedit, open gedit file"), g));
}

TEST_CASE("plan lengths equal the oracle over every state and open-file goal") {
  auto d = bundled();
  std::size_t longest = 0;
  for (int s = 0; s < 3; ++s) {
    const Goal g = d->parse_goal("open " + oracle::software[s] + " file");
    const auto dist = oracle::distances_to([&](unsigned m) { return (m & oracle::opened(s)) != 0; });
    for (unsigned m = 0; m < 256; ++m) {
      const auto plan = plan_optimal(*d, oracle::from_mask(*d, m), g);
      REQUIRE(plan);
      CHECK(static_cast<int>(plan->cost()) == dist[m]);
      longest = std::max(longest, plan->cost());
    }
  }
  CHECK(longest == 5);
}

TEST_CASE("plans replay cleanly and replanning matches their cost") {
  auto d = bundled();
  Environment env(d);
  PlanningAgent agent(d);
  for (int s = 0; s < 3; ++s) {
    const Goal g = d->parse_goal("open " + oracle::software[s] + " file");
    for (unsigned m = 0; m < 256; m += 3) {
      const State start = oracle::from_mask(*d, m);
      const auto plan = plan_optimal(*d, start, g);
      REQUIRE(plan);
      const Problem p{start, g, d->fingerprint()};
      Observation o = env.reset(p);
      for (auto a : plan->actions) {
        auto r = env.step(a);
        CHECK_FALSE(r.observation.last_failed);
        o = r.observation;
      }
      CHECK(o.goal_reached);
      CHECK(o.steps_taken == plan->cost());

      const auto rec = run_episode(agent, env, p);
      CHECK(rec.success);
      CHECK(rec.length == plan->cost());
    }
  }
}

TEST_CASE("lexicographically first among optimal plans") {
  auto d = bundled();
  // Both Sudo_On/Internet_On orders are optimal; the smaller index comes first.
  const auto plan = plan_optimal(*d, d->parse_state(""), d->parse_goal("installed vlc"));
  REQUIRE(plan);
  REQUIRE(plan->cost() == 3);
  const auto on = *d->find_action("Sudo_On");
  const auto net = *d->find_action("Internet_On");
  CHECK(plan->actions[0] == std::min(on, net));
}
