#include "ubuntuworld/retrieval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ubuntuworld/errors.hpp"

namespace ubuntuworld {

namespace {

constexpr std::array<std::string_view, 50> kStopwords = {
    "am",    "an",   "and",   "are",  "as",    "at",   "be",  "been", "but",   "by",
    "did",   "do",   "does",  "for",  "from",  "had",  "has", "have", "he",    "how",
    "if",    "in",   "is",    "it",   "its",   "me",   "my",  "of",   "on",    "or",
    "our",   "she",  "so",    "that", "the",   "then", "there", "these", "they", "this",
    "those", "to",   "was",   "we",   "were",  "what", "which", "with", "you",  "your",
};

bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

std::map<std::string, std::size_t> term_counts(std::string_view text) {
  std::map<std::string, std::size_t> counts;
  for (auto& t : tokenize(text)) ++counts[std::move(t)];
  return counts;
}

}  // namespace

std::span<const std::string_view> stopwords() { return kStopwords; }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !is_stopword(current)) out.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<Post> parse_corpus(std::string_view jsonl) {
  std::vector<Post> posts;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line_no;
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Post p;
      p.id = j.at("id").get<std::string>();
      p.title = j.at("title").get<std::string>();
      p.body = j.at("body").get<std::string>();
      if (j.contains("accepted_answer") && !j.at("accepted_answer").is_null()) {
        p.accepted_answer = j.at("accepted_answer").get<std::string>();
      }
      p.score = j.at("score").get<long long>();
      posts.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("corpus: ") + e.what());
    }
  }
  return posts;
}

std::vector<Post> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus(buffer.str());
}

std::string to_jsonl(std::span<const Post> posts) {
  std::string out;
  for (const auto& p : posts) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["title"] = p.title;
    j["body"] = p.body;
    j["accepted_answer"] =
        p.accepted_answer ? nlohmann::ordered_json(*p.accepted_answer) : nlohmann::ordered_json();
    j["score"] = p.score;
    out += j.dump() + "\n";
  }
  return out;
}

std::string strip_html(std::string_view html) {
  std::string text;
  bool in_tag = false;
  for (char c : html) {
    if (c == '<') {
      in_tag = true;
      text += ' ';
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      text += c;
    }
  }
  static const std::pair<std::string_view, std::string_view> kEntities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#39;", "'"}, {"&#xA;", "\n"},
      {"&amp;", "&"}};
  for (const auto& [from, to] : kEntities) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
      text.replace(pos, from.size(), to);
      pos += to.size();
    }
  }
  return text;
}

Post post_from_stack_exchange(const std::map<std::string, std::string>& question,
                              const std::map<std::string, std::string>* accepted_answer) {
  auto field = [&](const char* name) -> std::string {
    auto it = question.find(name);
    return it == question.end() ? std::string() : it->second;
  };
  Post p;
  p.id = field("Id");
  if (p.id.empty()) throw Rejection("Stack Exchange row without Id");
  p.title = field("Title");
  p.body = strip_html(field("Body"));
  const auto score = field("Score");
  p.score = score.empty() ? 0 : std::stoll(score);
  if (accepted_answer != nullptr) {
    auto it = accepted_answer->find("Body");
    if (it != accepted_answer->end()) p.accepted_answer = strip_html(it->second);
  }
  return p;
}

CorpusIndex CorpusIndex::build(std::vector<Post> posts) {
  CorpusIndex index;
  {
    std::map<std::string_view, int> ids;
    for (const auto& p : posts) {
      if (!ids.emplace(p.id, 0).second) throw Rejection("duplicate post id '" + p.id + "'");
    }
  }
  index.posts_ = std::move(posts);
  for (std::size_t d = 0; d < index.posts_.size(); ++d) {
    const Post& p = index.posts_[d];
    for (auto& [term, tf] : term_counts(p.title + "\n" + p.body)) {
      index.postings_[term].push_back({d, tf});
    }
  }
  index.norms_.assign(index.posts_.size(), 0.0);
  for (const auto& [term, list] : index.postings_) {
    const double w_idf = index.idf(term);
    for (const auto& posting : list) {
      const double w = static_cast<double>(posting.tf) * w_idf;
      index.norms_[posting.post] += w * w;
    }
  }
  for (auto& n : index.norms_) n = std::sqrt(n);
  return index;
}

std::size_t CorpusIndex::doc_freq(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::size_t CorpusIndex::term_frequency(const std::string& term, std::size_t post) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return 0;
  for (const auto& p : it->second) {
    if (p.post == post) return p.tf;
  }
  return 0;
}

double CorpusIndex::idf(const std::string& term) const {
  const auto df = doc_freq(term);
  if (df == 0) return 0.0;
  return std::log(1.0 + static_cast<double>(doc_count()) / static_cast<double>(df));
}

const Post* CorpusIndex::find(std::string_view id) const {
  for (const auto& p : posts_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::vector<Hit> CorpusIndex::query(std::string_view text, std::size_t k) const {
  const auto counts = term_counts(text);
  if (counts.empty()) throw EmptyQuery("query has no indexable terms");

  // Terms unknown to the corpus only scale the query norm, which does not
  // affect the ranking; they are left out.
  std::vector<double> dot(posts_.size(), 0.0);
  double q_norm = 0.0;
  for (const auto& [term, tf] : counts) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w_idf = idf(term);
    const double wq = static_cast<double>(tf) * w_idf;
    q_norm += wq * wq;
    for (const auto& posting : it->second) {
      dot[posting.post] += wq * static_cast<double>(posting.tf) * w_idf;
    }
  }
  std::vector<Hit> hits;
  if (q_norm == 0.0) return hits;
  q_norm = std::sqrt(q_norm);
  for (std::size_t d = 0; d < posts_.size(); ++d) {
    if (dot[d] > 0.0) hits.push_back({d, dot[d] / (q_norm * norms_[d])});
  }
  std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return posts_[a.post].id < posts_[b.post].id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

ActionMatcher::ActionMatcher(const Domain& domain) {
  std::vector<std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> df;
  for (const auto& s : domain.schemas) {
    names_.push_back(s.name);
    counts.push_back(term_counts(s.doc));
    for (const auto& [term, tf] : counts.back()) ++df[term];
  }
  const double n = static_cast<double>(domain.schemas.size());
  for (const auto& [term, f] : df) idf_[term] = std::log(1.0 + n / static_cast<double>(f));
  for (const auto& c : counts) {
    std::unordered_map<std::string, double> w;
    double norm = 0.0;
    for (const auto& [term, tf] : c) {
      const double x = static_cast<double>(tf) * idf_.at(term);
      w[term] = x;
      norm += x * x;
    }
    weights_.push_back(std::move(w));
    norms_.push_back(std::sqrt(norm));
  }
}

std::vector<double> ActionMatcher::scores(std::span<const std::string> answers) const {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : answers) {
    for (auto& t : tokenize(a)) ++counts[std::move(t)];
  }
  std::vector<double> dot(names_.size(), 0.0);
  double q_norm = 0.0;
  for (const auto& [term, tf] : counts) {
    auto it = idf_.find(term);
    if (it == idf_.end()) continue;
    const double wq = static_cast<double>(tf) * it->second;
    q_norm += wq * wq;
    for (std::size_t s = 0; s < names_.size(); ++s) {
      auto w = weights_[s].find(term);
      if (w != weights_[s].end()) dot[s] += wq * w->second;
    }
  }
  if (q_norm > 0.0) {
    q_norm = std::sqrt(q_norm);
    for (std::size_t s = 0; s < names_.size(); ++s) {
      if (norms_[s] > 0.0) dot[s] /= q_norm * norms_[s];
    }
  }
  return dot;
}

Recommendation ActionMatcher::best(std::span<const std::string> answers) const {
  const bool any_text = std::any_of(answers.begin(), answers.end(), [](const std::string& a) {
    return !tokenize(a).empty();
  });
  if (!any_text) throw NoRecommendation("no answer text to match");
  const auto s = scores(answers);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] <= 0.0) continue;
    if (!best || s[i] > s[*best] || (s[i] == s[*best] && names_[i] < names_[*best])) best = i;
  }
  if (!best) throw NoRecommendation("answers share no vocabulary with any action doc");
  return {names_[*best], s[*best], {}};
}

Recommendation recommend_action(std::span<const std::string> answers, const Domain& domain) {
  return ActionMatcher(domain).best(answers);
}

DataDrivenRecommender::DataDrivenRecommender(DomainPtr domain,
                                             std::shared_ptr<const CorpusIndex> index,
                                             std::size_t k)
    : domain_(std::move(domain)), index_(std::move(index)), matcher_(domain_->domain()), k_(k) {}

std::optional<Recommendation> DataDrivenRecommender::recommend(std::string_view footprint) const {
  std::vector<Hit> hits;
  try {
    hits = index_->query(footprint, k_);
  } catch (const EmptyQuery&) {
    return std::nullopt;
  }
  std::vector<std::string> answers;
  std::vector<std::string> support;
  for (const auto& h : hits) {
    const Post& p = index_->posts()[h.post];
    if (p.accepted_answer && !p.accepted_answer->empty()) {
      answers.push_back(*p.accepted_answer);
      support.push_back(p.id);
    }
  }
  if (answers.empty()) return std::nullopt;
  try {
    Recommendation rec = matcher_.best(answers);
    rec.supporting_posts = std::move(support);
    return rec;
  } catch (const NoRecommendation&) {
    return std::nullopt;
  }
}

std::optional<std::size_t> DataDrivenRecommender::ground(const std::string& schema_name,
                                                         std::string_view footprint) const {
  const Domain& domain = domain_->domain();
  const ActionSchema* schema = domain.find_schema(schema_name);
  if (schema == nullptr) return std::nullopt;

  std::vector<std::string> words;
  {
    std::string current;
    for (char ch : footprint) {
      const auto c = static_cast<unsigned char>(ch);
      if (c < 0x80 && (std::isalnum(c) || c == '-' || c == '_')) {
        current += static_cast<char>(std::tolower(c));
      } else if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) words.push_back(std::move(current));
  }
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };

  std::vector<std::string> binding;
  for (const auto& param : schema->params) {
    const auto candidates = domain.objects_of(param.type);
    if (candidates.empty()) return std::nullopt;
    std::size_t best_pos = words.size();
    std::string chosen = candidates.front();
    for (const auto& obj : candidates) {
      auto it = std::find(words.begin(), words.end(), lower(obj));
      const auto pos = static_cast<std::size_t>(it - words.begin());
      if (pos < best_pos) {
        best_pos = pos;
        chosen = obj;
      }
    }
    binding.push_back(chosen);
  }
  return domain_->find_action(schema_name, binding);
}

std::optional<std::size_t> DataDrivenRecommender::operator()(std::string_view footprint) const {
  const std::string key(footprint);
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::optional<std::size_t> action;
  if (auto rec = recommend(footprint)) action = ground(rec->action, footprint);
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(key, action);
  return action;
}

}  // namespace ubuntuworld
