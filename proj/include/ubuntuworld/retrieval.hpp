#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ubuntuworld/grounding.hpp"

namespace ubuntuworld {

// Lowercase ASCII, split on anything that is not [a-z0-9], drop tokens
// shorter than two characters and the bundled stopwords. Bytes outside ASCII
// act as separators.
std::vector<std::string> tokenize(std::string_view text);

std::span<const std::string_view> stopwords();

struct Post {
  std::string id;
  std::string title;
  std::string body;
  std::optional<std::string> accepted_answer;
  long long score = 0;

  bool operator==(const Post&) const = default;
};

// JSON Lines, one post per line: id, title, body, accepted_answer (string or
// null), score.
std::vector<Post> load_corpus(const std::filesystem::path& path);
std::vector<Post> parse_corpus(std::string_view jsonl);
std::string to_jsonl(std::span<const Post> posts);

// Maps one Stack Exchange data-dump row (attributes of a <row> element in
// Posts.xml, PostTypeId=1) to a Post:
//   Id -> id, Title -> title, Body -> body (HTML tags dropped, entities
//   decoded), Score -> score, and the Body of the row whose Id equals
//   AcceptedAnswerId -> accepted_answer.
// Reading the XML dump itself is left to external tooling.
Post post_from_stack_exchange(const std::map<std::string, std::string>& question,
                              const std::map<std::string, std::string>* accepted_answer);

std::string strip_html(std::string_view html);

class EmptyQuery : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoRecommendation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Hit {
  std::size_t post = 0;  // index into CorpusIndex::posts()
  double score = 0;
};

struct Posting {
  std::size_t post = 0;
  std::size_t tf = 0;
};

// Inverted TF-IDF index over title + body. Weight of a term in a post is
// tf * ln(1 + N / df); scores are cosine similarities. Immutable once built.
class CorpusIndex {
 public:
  // Throws Rejection naming the first duplicate id.
  static CorpusIndex build(std::vector<Post> posts);

  std::span<const Post> posts() const { return posts_; }
  std::size_t doc_count() const { return posts_.size(); }
  std::size_t doc_freq(const std::string& term) const;
  std::size_t term_frequency(const std::string& term, std::size_t post) const;
  double idf(const std::string& term) const;
  double norm(std::size_t post) const { return norms_.at(post); }
  const Post* find(std::string_view id) const;

  // Posts with positive score, best first, ties by ascending id; at most k.
  // Throws EmptyQuery when the text has no indexable tokens.
  std::vector<Hit> query(std::string_view text, std::size_t k = 5) const;

 private:
  std::vector<Post> posts_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<double> norms_;
};

struct Recommendation {
  std::string action;  // schema name
  double similarity = 0;
  std::vector<std::string> supporting_posts;
};

// TF-IDF space over the schema docs; scores the concatenated answers against
// each doc by cosine.
class ActionMatcher {
 public:
  explicit ActionMatcher(const Domain& domain);

  // Cosine score per schema, in Domain::schemas order.
  std::vector<double> scores(std::span<const std::string> answers) const;
  // Argmax with ties to the smaller schema name. Throws NoRecommendation
  // when every answer is empty or nothing overlaps any doc.
  Recommendation best(std::span<const std::string> answers) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::unordered_map<std::string, double>> weights_;
  std::unordered_map<std::string, double> idf_;
  std::vector<double> norms_;
};

Recommendation recommend_action(std::span<const std::string> answers, const Domain& domain);

// footprint -> top-k posts -> accepted answers -> best-matching schema ->
// grounded action. Any failure along the way yields nullopt so the caller
// can fall back to random exploration.
class DataDrivenRecommender {
 public:
  DataDrivenRecommender(DomainPtr domain, std::shared_ptr<const CorpusIndex> index,
                        std::size_t k = 5);

  std::optional<Recommendation> recommend(std::string_view footprint) const;
  std::optional<std::size_t> operator()(std::string_view footprint) const;

  // Binds each parameter to the object of its type mentioned first in the
  // footprint, else the first declared object of that type.
  std::optional<std::size_t> ground(const std::string& schema, std::string_view footprint) const;

  const CorpusIndex& index() const { return *index_; }

 private:
  DomainPtr domain_;
  std::shared_ptr<const CorpusIndex> index_;
  ActionMatcher matcher_;
  std::size_t k_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::optional<std::size_t>> cache_;
};

}  // namespace ubuntuworld
