#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "ubuntuworld/errors.hpp"
#include "ubuntuworld/harness.hpp"

using namespace ubuntuworld;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("uw-harness-" + name + "-" + std::to_string(std::random_device{}()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

bool has_line(const std::string& text, const std::string& line) {
  for (const auto& l : lines(text)) {
    if (l == line) return true;
  }
  return false;
}

RunConfig base(const fs::path& out) {
  RunConfig c;
  c.seed = 11;
  c.out = out;
  return c;
}

}  // namespace

TEST_CASE("moving average") {
  MovingAverage ma(3);
  CHECK(ma.push(3) == 3.0);
  CHECK(ma.push(5) == 4.0);
  CHECK(ma.push(7) == 5.0);
  CHECK(ma.push(9) == 7.0);
  CHECK_THROWS(MovingAverage(0));
}

TEST_CASE("config validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.agent = "oracle";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.params.alpha = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.open_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(is_agent_kind("qlearn+data"));
  CHECK_FALSE(is_agent_kind("QLEARN"));
}

TEST_CASE("train writes one curve row per episode, reproducibly") {
  const auto dir = scratch("train");
  RunConfig c = base(dir / "a");
  c.instances = 10;
  c.replays = 0;
  std::ostringstream log;
  cmd_train(c, log);
  const auto curve = slurp(dir / "a" / "curve.csv");
  const auto rows = lines(curve);
  REQUIRE(rows.size() == 11);
  CHECK(rows[0] == curve_header);
  CHECK(rows[1].rfind("1,", 0) == 0);
  CHECK(rows[10].rfind("10,", 0) == 0);
  CHECK(fs::exists(dir / "a" / "agent.snapshot"));
  CHECK(log.str().find("10 episodes") != std::string::npos);

  c.out = dir / "b";
  cmd_train(c, log);
  CHECK(slurp(dir / "b" / "curve.csv") == curve);
  CHECK(slurp(dir / "b" / "agent.snapshot") == slurp(dir / "a" / "agent.snapshot"));

  c.out = dir / "c";
  c.seed = 12;
  cmd_train(c, log);
  CHECK(slurp(dir / "c" / "curve.csv") != curve);

  c.seed.reset();
  CHECK_THROWS_AS(cmd_train(c, log), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("planner test run matches the optimal lengths") {
  const auto dir = scratch("test");
  RunConfig c = base(dir);
  c.agent = "planner";
  c.tasks = 25;
  std::ostringstream log;
  cmd_test(c, log);
  const auto rows = lines(slurp(dir / "test.csv"));
  REQUIRE(rows.size() == 27);
  CHECK(rows[0] == test_header);
  for (std::size_t i = 1; i <= 25; ++i) {
    std::vector<std::string> f;
    std::istringstream in(rows[i]);
    for (std::string x; std::getline(in, x, ',');) f.push_back(x);
    REQUIRE(f.size() == 5);
    CHECK(f[0] == std::to_string(i));
    CHECK(f[1] == f[3]);
    CHECK(f[2] == "1");
  }
  CHECK(rows[26].rfind("mean,", 0) == 0);

  const Workspace ws = Workspace::open(c, false);
  const auto train = training_instances(c, ws.domain);
  const auto tasks = test_tasks(c, ws.domain);
  CHECK(train.front() != tasks.front());
  fs::remove_all(dir);
}

TEST_CASE("query") {
  RunConfig c = base(".");
  c.corpus = default_corpus_path();
  std::ostringstream out;
  cmd_query(c, "Permission denied", out);
  CHECK(out.str().rfind("1. ", 0) == 0);
  CHECK(out.str().find("recommendation: Sudo_On") != std::string::npos);

  std::ostringstream none;
  cmd_query(c, "zyzzyva quokka", none);
  CHECK(has_line(none.str(), "no recommendation"));

  c.corpus = "/nonexistent/corpus.jsonl";
  std::ostringstream err;
  CHECK(run_command([&] { cmd_query(c, "Permission denied", out); }, err) == exit_config);
  CHECK_FALSE(err.str().empty());
}

TEST_CASE("plan") {
  RunConfig c = base(".");
  std::ostringstream five;
  cmd_plan(c, "", "open gedit file", five);
  CHECK(lines(five.str()) == std::vector<std::string>{"1. Internet_On", "2. Sudo_On",
                                                      "3. AptGet(gedit)", "4. Sudo_Off",
                                                      "5. Open_gedit(file)", "5 actions"});
  std::ostringstream base_start;
  cmd_plan(c, "base", "open firefox file", base_start);
  CHECK(lines(base_start.str()) ==
        std::vector<std::string>{"1. Open_firefox(file)", "1 action"});

  std::ostringstream done;
  cmd_plan(c, "installed vlc", "installed vlc", done);
  CHECK(has_line(done.str(), "goal already satisfied; empty plan"));

  std::ostringstream bad;
  CHECK_THROWS_AS(cmd_plan(c, "", "open emacs file", bad), ConfigError);
}

TEST_CASE("unsolvable plan") {
  const auto dir = scratch("plan");
  {
    std::ofstream f(dir / "tiny.domain");
    f << "predicates:\n  p\n  q\naction: SetP\n  eff: p\n  doc:\n    sets p.\n";
  }
  RunConfig c = base(dir);
  c.domain = dir / "tiny.domain";
  std::ostringstream out;
  cmd_plan(c, "", "q", out);
  CHECK(has_line(out.str(), "unsolvable"));
  fs::remove_all(dir);
}

TEST_CASE("scripted demo") {
  RunConfig c = base(".");
  c.agent = "planner";
  std::istringstream in("open firefox\nremove firefox\nopen firefox\nopen emacs\nquit\n");
  std::ostringstream out;
  cmd_demo(c, in, out);
  std::vector<std::string> actions;
  for (auto l : lines(out.str())) {
    while (l.rfind("> ", 0) == 0) l = l.substr(2);  // prompts share a line with the reply
    if (l.rfind("$ ", 0) == 0) actions.push_back(l.substr(2));
  }
  CHECK(actions == std::vector<std::string>{"Open_firefox(file)", "Sudo_On", "AptGet(firefox)",
                                            "Sudo_Off", "Open_firefox(file)"});
  CHECK(out.str().find("done in 1 step\n") != std::string::npos);
  CHECK(out.str().find("done in 4 steps\n") != std::string::npos);
  CHECK(out.str().find("unknown software 'emacs'") != std::string::npos);
  CHECK(out.str().find("bye") != std::string::npos);

  RunConfig q = base(".");
  std::istringstream none;
  CHECK_THROWS_AS(cmd_demo(q, none, out), ConfigError);
}

TEST_CASE("exit statuses") {
  std::ostringstream err;
  CHECK(run_command([] {}, err) == exit_ok);
  CHECK(run_command([] { throw ConfigError("bad flag"); }, err) == exit_config);
  CHECK(run_command([] { throw std::runtime_error("boom"); }, err) == exit_runtime);
  CHECK(run_command([] { throw IntegrityError("bad snapshot"); }, err) == exit_runtime);
  CHECK(err.str().find("bad flag") != std::string::npos);
}
