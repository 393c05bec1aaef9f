#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cctype>

#include "oracles.hpp"
#include "retrieval_queries.hpp"
#include "ubuntuworld/errors.hpp"
#include "ubuntuworld/retrieval.hpp"

using namespace ubuntuworld;

namespace {

const std::string data_dir = UBUNTUWORLD_DATA_DIR;

DomainPtr bundled() {
  static DomainPtr d = load_grounded_domain(data_dir + "/ubuntuworld.domain");
  return d;
}

std::shared_ptr<const CorpusIndex> corpus() {
  static auto idx = std::make_shared<const CorpusIndex>(
      CorpusIndex::build(load_corpus(data_dir + "/askubuntu_mini.jsonl")));
  return idx;
}

std::vector<oracle::Doc> docs_of(const CorpusIndex& idx) {
  std::vector<oracle::Doc> out;
  for (const auto& p : idx.posts()) out.push_back({p.id, p.title + "\n" + p.body});
  return out;
}

std::vector<std::string> ids(const CorpusIndex& idx, const std::vector<Hit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(idx.posts()[h.post].id);
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Post post(std::string id, std::string title, std::string body,
          std::optional<std::string> answer = std::nullopt) {
  return {std::move(id), std::move(title), std::move(body), std::move(answer), 0};
}

}  // namespace

TEST_CASE("tokenize") {
  using V = std::vector<std::string>;
  CHECK(tokenize("Permission denied") == V{"permission", "denied"});
  CHECK(tokenize("E: Could not open lock file!") == V{"could", "not", "open", "lock", "file"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("the and of").empty());
  CHECK(tokenize("apt-get\tinstall vlc2") == V{"apt", "get", "install", "vlc2"});
  CHECK(tokenize("caf\xc3\xa9 ok") == V{"caf", "ok"});
  CHECK(stopwords().size() == 50);
  CHECK(std::is_sorted(stopwords().begin(), stopwords().end()));
}

TEST_CASE("index counts") {
  auto idx = CorpusIndex::build({post("a", "apt", "apt install"), post("b", "apt", "remove")});
  CHECK(idx.doc_count() == 2);
  CHECK(idx.term_frequency("apt", 0) == 2);
  CHECK(idx.doc_freq("apt") == 2);
  CHECK(idx.doc_freq("install") == 1);
  CHECK(idx.idf("apt") == doctest::Approx(std::log(2.0)));
  CHECK(idx.idf("apt") > 0);
  CHECK(idx.idf("install") == doctest::Approx(std::log(3.0)));
  CHECK(idx.find("b") != nullptr);
  CHECK(idx.find("c") == nullptr);

  try {
    CorpusIndex::build({post("x", "t", "b"), post("y", "t", "b"), post("x", "t", "c")});
    FAIL("expected rejection");
  } catch (const Rejection& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
}

TEST_CASE("query edge cases") {
  const auto& idx = *corpus();
  CHECK_THROWS_AS(idx.query("   "), EmptyQuery);
  CHECK_THROWS_AS(idx.query("the of and"), EmptyQuery);
  CHECK(idx.query("zyzzyva").empty());
  const auto all = idx.query("sudo", 1000);
  CHECK(all.size() == static_cast<std::size_t>(idx.doc_freq("sudo")));
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
}

TEST_CASE("the permission-denied query retrieves the sudo answer") {
  const auto& idx = *corpus();
  const auto hits = idx.query("E: Could not open lock file - open (13: Permission denied)");
  REQUIRE_FALSE(hits.empty());
  const auto& top = idx.posts()[hits[0].post];
  REQUIRE(top.accepted_answer);
  CHECK(lower(*top.accepted_answer).find("prefix the command with sudo") != std::string::npos);

  const DataDrivenRecommender rec(bundled(), corpus());
  const auto r = rec.recommend("Permission denied");
  REQUIRE(r);
  CHECK(r->action == "Sudo_On");
  CHECK_FALSE(r->supporting_posts.empty());
  CHECK(bundled()->action(*rec("Permission denied")).name == "Sudo_On");
}

TEST_CASE("ranking equals the brute-force oracle") {
  const auto& idx = *corpus();
  const auto docs = docs_of(idx);
  const auto& queries = retrieval_queries();
  REQUIRE(queries.size() == 20);
  for (const auto& q : queries) {
    const auto expect = oracle::rank(docs, q);
    std::vector<std::string> want;
    for (const auto& [id, score] : expect) want.push_back(id);
    std::vector<Hit> got;
    try {
      got = idx.query(q, idx.doc_count());
    } catch (const EmptyQuery&) {
    }
    CHECK_MESSAGE(ids(idx, got) == want, q);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].score == doctest::Approx(expect[i].second).epsilon(1e-12));
    }
  }
}

TEST_CASE("adding an unrelated post keeps the relative order") {
  auto posts = load_corpus(data_dir + "/askubuntu_mini.jsonl");
  const auto base = CorpusIndex::build(posts);
  posts.push_back(post("zz-1", "Wallpaper", "Desktop background colour keeps resetting"));
  const auto more = CorpusIndex::build(posts);
  for (const char* q : {"Permission denied", "Temporary failure resolving", "no process found"}) {
    CHECK(ids(base, base.query(q, 100)) == ids(more, more.query(q, 100)));
  }
}

TEST_CASE("recommend_action") {
  const Domain& dom = bundled()->domain();
  SUBCASE("sudo answer") {
    const std::vector<std::string> answers = {
        "Prefix the command with sudo so it runs as root.",
        "You need administrative privileges; use sudo."};
    CHECK(recommend_action(answers, dom).action == "Sudo_On");
  }
  SUBCASE("a schema's own doc matches it best") {
    const ActionMatcher m(dom);
    for (std::size_t i = 0; i < dom.schemas.size(); ++i) {
      const std::vector<std::string> answers = {dom.schemas[i].doc};
      const auto s = m.scores(answers);
      CHECK(m.best(answers).action == dom.schemas[i].name);
      CHECK(s[i] == *std::max_element(s.begin(), s.end()));
    }
  }
  SUBCASE("no overlap") {
    const std::vector<std::string> answers = {"zyzzyva quokka"};
    CHECK_THROWS_AS(recommend_action(answers, dom), NoRecommendation);
    const std::vector<std::string> empty = {"", "  "};
    CHECK_THROWS_AS(recommend_action(empty, dom), NoRecommendation);
  }
  SUBCASE("duplicated answers keep the argmax") {
    const auto& idx = *corpus();
    for (const auto& p : idx.posts()) {
      if (!p.accepted_answer) continue;
      std::vector<std::string> one = {*p.accepted_answer};
      if (tokenize(one[0]).empty()) continue;
      std::vector<std::string> two = {one[0], one[0]};
      std::string a, b;
      try {
        a = recommend_action(one, dom).action;
      } catch (const NoRecommendation&) {
      }
      try {
        b = recommend_action(two, dom).action;
      } catch (const NoRecommendation&) {
      }
      CHECK(a == b);
    }
  }
}

TEST_CASE("recommender on the domain's failure footprints") {
  auto d = bundled();
  const DataDrivenRecommender rec(d, corpus());
  auto name = [&](const std::string& text) -> std::string {
    const auto a = rec(text);
    return a ? d->action(*a).name : "-";
  };
  CHECK(name("E: Unable to locate package vlc") == "AptGet(vlc)");
  CHECK(name("E: Unable to locate package") == "AptGet(gedit)");  // first declared software
  CHECK(name("") == "-");
  CHECK(name("zyzzyva") == "-");
  for (const auto& a : d->actions()) {
    for (const auto& [lit, text] : a.keyed_failures) {
      const auto& pred = d->predicates()[lit.predicate];
      std::string want;
      if (pred.name == "sudo-on") want = lit.value ? "Sudo_On" : "Sudo_Off";
      if (pred.name == "internet-on") want = "Internet_On";
      if (pred.name == "installed") want = "AptGet(" + pred.args[0] + ")";
      if (!want.empty()) CHECK_MESSAGE(name(text) == want, a.name);
    }
  }
}

TEST_CASE("corpus file format") {
  const auto posts = parse_corpus(
      R"({"id": "p1", "title": "T", "body": "B", "accepted_answer": null, "score": 3})"
      "\n\n"
      R"({"id": "p2", "title": "T2", "body": "B2", "accepted_answer": "A", "score": -1})"
      "\n");
  REQUIRE(posts.size() == 2);
  CHECK_FALSE(posts[0].accepted_answer);
  CHECK(posts[1].accepted_answer == "A");
  CHECK(posts[1].score == -1);
  CHECK(parse_corpus(to_jsonl(posts)) == posts);

  try {
    parse_corpus("{\"id\": \"p1\", \"title\": \"T\", \"body\": \"B\", \"accepted_answer\": null, "
                 "\"score\": 1}\n{not json}\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_corpus("{\"id\": \"p1\"}\n"), ParseError);
  CHECK(load_corpus(data_dir + "/askubuntu_mini.jsonl").size() == 60);
}

TEST_CASE("stack exchange row conversion") {
  const std::map<std::string, std::string> q = {
      {"Id", "42"}, {"Title", "apt & sudo"}, {"Body", "<p>Why <code>Permission denied</code>?</p>"},
      {"Score", "7"}, {"AcceptedAnswerId", "43"}};
  const std::map<std::string, std::string> a = {{"Id", "43"}, {"Body", "<p>Use sudo.</p>"}};
  const Post p = post_from_stack_exchange(q, &a);
  CHECK(p.id == "42");
  CHECK(p.title == "apt & sudo");
  CHECK(p.body.find("Permission denied") != std::string::npos);
  CHECK(p.body.find('<') == std::string::npos);
  CHECK(p.accepted_answer.value_or("").find("Use sudo.") != std::string::npos);
  CHECK(p.score == 7);
  CHECK_FALSE(post_from_stack_exchange(q, nullptr).accepted_answer);
}
