#include "ubuntuworld/domain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "ubuntuworld/errors.hpp"

namespace ubuntuworld {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
           c == '_' || c == '?';
  });
}

// "\n" and "\\" escapes keep multi-line terminal output on one line.
std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      if (s[i + 1] == 'n') {
        out += '\n';
        ++i;
        continue;
      }
      if (s[i + 1] == '\\') {
        out += '\\';
        ++i;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\\') {
      out += "\\\\";
    } else {
      out += c;
    }
  }
  return out;
}

// "a b - t1 c - t2" -> [(a,t1), (b,t1), (c,t2)]
std::vector<TypedName> parse_typed_list(const std::vector<std::string>& tokens,
                                        std::size_t begin, std::size_t line) {
  std::vector<TypedName> out;
  std::vector<std::string> pending;
  for (std::size_t i = begin; i < tokens.size(); ++i) {
    if (tokens[i] == "-") {
      if (pending.empty()) throw ParseError(line, "'-' without names");
      if (i + 1 >= tokens.size()) throw ParseError(line, "missing type after '-'");
      const std::string& type = tokens[++i];
      if (!valid_identifier(type)) throw ParseError(line, "bad type name '" + type + "'");
      for (auto& name : pending) out.push_back({std::move(name), type});
      pending.clear();
    } else {
      if (!valid_identifier(tokens[i])) {
        throw ParseError(line, "bad identifier '" + tokens[i] + "'");
      }
      pending.push_back(tokens[i]);
    }
  }
  if (!pending.empty()) {
    throw ParseError(line, "untyped name '" + pending.front() + "'");
  }
  return out;
}

Literal parse_literal(std::string_view text, std::size_t line) {
  text = trim(text);
  Literal lit;
  if (!text.empty() && text.front() == '!') {
    lit.positive = false;
    text = trim(text.substr(1));
  }
  auto tokens = split_ws(text);
  if (tokens.empty()) throw ParseError(line, "empty literal");
  for (const auto& t : tokens) {
    if (!valid_identifier(t)) throw ParseError(line, "bad identifier '" + t + "'");
  }
  lit.predicate = tokens.front();
  lit.args.assign(tokens.begin() + 1, tokens.end());
  return lit;
}

std::vector<Literal> parse_literal_list(std::string_view text, std::size_t line) {
  std::vector<Literal> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_literal(
        text.substr(start, comma == std::string_view::npos ? text.npos : comma - start),
        line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Leading [a-z_]+ of a line, when followed by ':' or '['.
std::string_view key_of(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (std::islower(static_cast<unsigned char>(line[i])) || line[i] == '_')) {
    ++i;
  }
  if (i == 0 || i >= line.size() || (line[i] != ':' && line[i] != '[')) return {};
  return line.substr(0, i);
}

enum class Section { none, types, objects, predicates, action };

class Parser {
 public:
  Domain run(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      handle(text.substr(pos, end - pos), line_no);
      pos = end + 1;
    }
    finish_doc();
    validate(domain_);
    return std::move(domain_);
  }

 private:
  void handle(std::string_view raw, std::size_t line) {
    const auto content = trim(raw);
    if (content.empty()) {
      finish_doc();
      return;
    }
    if (content.front() == '#') return;
    if (in_doc_) {
      doc_lines_.emplace_back(content);
      return;
    }

    const auto key = key_of(content);
    if (key == "types" || key == "objects" || key == "predicates") {
      expect_colon(content, key, line);
      section_ = key == "types" ? Section::types
                 : key == "objects" ? Section::objects
                                    : Section::predicates;
      const auto rest = trim(strip_comment(content.substr(key.size() + 1)));
      if (!rest.empty()) entry(rest, line);
      return;
    }
    if (key == "action") {
      expect_colon(content, key, line);
      const auto name = trim(strip_comment(content.substr(key.size() + 1)));
      if (!valid_identifier(name) || name.front() == '?') {
        throw ParseError(line, "bad action name '" + std::string(name) + "'");
      }
      section_ = Section::action;
      domain_.schemas.push_back({});
      domain_.schemas.back().name = std::string(name);
      return;
    }
    if (section_ == Section::action && !key.empty()) {
      action_key(content, key, line);
      return;
    }
    entry(trim(strip_comment(content)), line);
  }

  static void expect_colon(std::string_view content, std::string_view key, std::size_t line) {
    if (content.size() <= key.size() || content[key.size()] != ':') {
      throw ParseError(line, "expected ':' after '" + std::string(key) + "'");
    }
  }

  void entry(std::string_view content, std::size_t line) {
    if (content.empty()) return;
    auto tokens = split_ws(content);
    switch (section_) {
      case Section::types:
        for (auto& t : tokens) {
          if (!valid_identifier(t) || t.front() == '?') {
            throw ParseError(line, "bad type name '" + t + "'");
          }
          domain_.types.push_back(std::move(t));
        }
        return;
      case Section::objects:
        for (auto& obj : parse_typed_list(tokens, 0, line)) {
          if (obj.name.front() == '?') {
            throw ParseError(line, "object names cannot start with '?'");
          }
          domain_.objects.push_back(std::move(obj));
        }
        return;
      case Section::predicates: {
        if (tokens.front().front() == '?' || !valid_identifier(tokens.front())) {
          throw ParseError(line, "bad predicate name '" + tokens.front() + "'");
        }
        PredicateSchema pred{tokens.front(), parse_typed_list(tokens, 1, line)};
        for (const auto& p : pred.params) {
          if (p.name.front() != '?') {
            throw ParseError(line, "predicate parameter '" + p.name + "' must start with '?'");
          }
        }
        domain_.predicates.push_back(std::move(pred));
        return;
      }
      case Section::action:
      case Section::none:
        throw ParseError(line, "unexpected line '" + std::string(content) + "'");
    }
  }

  void action_key(std::string_view content, std::string_view key, std::size_t line) {
    ActionSchema& schema = domain_.schemas.back();
    std::string_view rest;
    std::string trigger;
    if (content[key.size()] == '[') {
      if (key != "footprint_err") {
        throw ParseError(line, "only footprint_err takes a [literal] key");
      }
      const auto close = content.find("]:");
      if (close == std::string_view::npos) throw ParseError(line, "expected ']:'");
      trigger = std::string(content.substr(key.size() + 1, close - key.size() - 1));
      rest = content.substr(close + 2);
    } else {
      rest = content.substr(key.size() + 1);
    }

    if (key == "params") {
      for (auto& p : parse_typed_list(split_ws(strip_comment(rest)), 0, line)) {
        if (p.name.front() != '?') {
          throw ParseError(line, "parameter '" + p.name + "' must start with '?'");
        }
        schema.params.push_back(std::move(p));
      }
    } else if (key == "pre") {
      auto lits = parse_literal_list(strip_comment(rest), line);
      schema.preconditions.insert(schema.preconditions.end(), lits.begin(), lits.end());
    } else if (key == "eff") {
      auto lits = parse_literal_list(strip_comment(rest), line);
      schema.effects.insert(schema.effects.end(), lits.begin(), lits.end());
    } else if (key == "footprint_ok") {
      schema.footprint_success = unescape(trim(rest));
    } else if (key == "footprint_err") {
      if (trigger.empty()) {
        schema.footprint_failure = unescape(trim(rest));
      } else {
        schema.keyed_failures.push_back({parse_literal(trigger, line), unescape(trim(rest))});
      }
    } else if (key == "doc") {
      in_doc_ = true;
      doc_lines_.clear();
      const auto inline_text = trim(rest);
      if (!inline_text.empty()) doc_lines_.emplace_back(inline_text);
    } else {
      throw ParseError(line, "unknown action field '" + std::string(key) + "'");
    }
  }

  void finish_doc() {
    if (!in_doc_) return;
    std::string doc;
    for (std::size_t i = 0; i < doc_lines_.size(); ++i) {
      if (i > 0) doc += '\n';
      doc += doc_lines_[i];
    }
    domain_.schemas.back().doc = std::move(doc);
    in_doc_ = false;
    doc_lines_.clear();
  }

  Domain domain_;
  Section section_ = Section::none;
  bool in_doc_ = false;
  std::vector<std::string> doc_lines_;
};

template <class Range, class Name>
void check_unique(const Range& items, Name name_of, const char* category) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    const std::string& n = name_of(item);
    if (!seen.insert(n).second) {
      throw ReferenceError(std::string("duplicate ") + category + " '" + n + "'");
    }
  }
}

void check_literals(const Domain& domain, const ActionSchema& schema,
                    const std::vector<Literal>& literals, const char* where) {
  for (const auto& lit : literals) {
    const auto* pred = domain.find_predicate(lit.predicate);
    if (pred == nullptr) {
      throw ReferenceError("action '" + schema.name + "' " + where +
                           " uses undeclared predicate '" + lit.predicate + "'");
    }
    if (pred->params.size() != lit.args.size()) {
      throw ReferenceError("action '" + schema.name + "': predicate '" + lit.predicate +
                           "' expects " + std::to_string(pred->params.size()) + " argument(s)");
    }
    for (std::size_t i = 0; i < lit.args.size(); ++i) {
      const std::string& arg = lit.args[i];
      std::string type;
      if (arg.front() == '?') {
        auto it = std::find_if(schema.params.begin(), schema.params.end(),
                               [&](const TypedName& p) { return p.name == arg; });
        if (it == schema.params.end()) {
          throw ReferenceError("action '" + schema.name + "' uses undeclared parameter '" +
                               arg + "'");
        }
        type = it->type;
      } else {
        const auto* obj = domain.find_object(arg);
        if (obj == nullptr) {
          throw ReferenceError("action '" + schema.name + "' uses undeclared object '" +
                               arg + "'");
        }
        type = obj->type;
      }
      if (type != pred->params[i].type) {
        throw ReferenceError("action '" + schema.name + "': argument '" + arg + "' of '" +
                             lit.predicate + "' has type " + type + ", expected " +
                             pred->params[i].type);
      }
    }
  }
  for (std::size_t i = 0; i < literals.size(); ++i) {
    for (std::size_t j = i + 1; j < literals.size(); ++j) {
      if (literals[i].predicate == literals[j].predicate &&
          literals[i].args == literals[j].args &&
          literals[i].positive != literals[j].positive) {
        throw Rejection("action '" + schema.name + "' " + where + " contains both " +
                        to_string(literals[i]) + " and " + to_string(literals[j]));
      }
    }
  }
}

}  // namespace

std::string to_string(const Literal& literal) {
  std::string out = literal.positive ? "" : "!";
  out += literal.predicate;
  for (const auto& a : literal.args) out += " " + a;
  return out;
}

const PredicateSchema* Domain::find_predicate(std::string_view name) const {
  auto it = std::find_if(predicates.begin(), predicates.end(),
                         [&](const PredicateSchema& p) { return p.name == name; });
  return it == predicates.end() ? nullptr : &*it;
}

const ActionSchema* Domain::find_schema(std::string_view name) const {
  auto it = std::find_if(schemas.begin(), schemas.end(),
                         [&](const ActionSchema& s) { return s.name == name; });
  return it == schemas.end() ? nullptr : &*it;
}

const TypedName* Domain::find_object(std::string_view name) const {
  auto it = std::find_if(objects.begin(), objects.end(),
                         [&](const TypedName& o) { return o.name == name; });
  return it == objects.end() ? nullptr : &*it;
}

std::vector<std::string> Domain::objects_of(std::string_view type) const {
  std::vector<std::string> out;
  for (const auto& o : objects) {
    if (o.type == type) out.push_back(o.name);
  }
  return out;
}

void validate(const Domain& domain) {
  check_unique(domain.types, [](const std::string& t) -> const std::string& { return t; },
               "type");
  check_unique(domain.objects, [](const TypedName& o) -> const std::string& { return o.name; },
               "object");
  check_unique(domain.predicates,
               [](const PredicateSchema& p) -> const std::string& { return p.name; },
               "predicate");
  check_unique(domain.schemas,
               [](const ActionSchema& s) -> const std::string& { return s.name; }, "action");

  auto known_type = [&](const std::string& t) {
    return std::find(domain.types.begin(), domain.types.end(), t) != domain.types.end();
  };
  for (const auto& o : domain.objects) {
    if (!known_type(o.type)) {
      throw ReferenceError("object '" + o.name + "' has undeclared type '" + o.type + "'");
    }
  }
  for (const auto& p : domain.predicates) {
    check_unique(p.params, [](const TypedName& t) -> const std::string& { return t.name; },
                 "predicate parameter");
    for (const auto& param : p.params) {
      if (!known_type(param.type)) {
        throw ReferenceError("predicate '" + p.name + "' has undeclared type '" +
                             param.type + "'");
      }
    }
  }
  for (const auto& s : domain.schemas) {
    check_unique(s.params, [](const TypedName& t) -> const std::string& { return t.name; },
                 "action parameter");
    for (const auto& param : s.params) {
      if (!known_type(param.type)) {
        throw ReferenceError("action '" + s.name + "' has undeclared type '" + param.type + "'");
      }
    }
    check_literals(domain, s, s.preconditions, "preconditions");
    check_literals(domain, s, s.effects, "effects");
    for (const auto& keyed : s.keyed_failures) {
      if (std::find(s.preconditions.begin(), s.preconditions.end(), keyed.trigger) ==
          s.preconditions.end()) {
        throw ReferenceError("action '" + s.name + "': footprint key '" +
                             to_string(keyed.trigger) + "' is not a precondition");
      }
    }
    if (trim(s.doc).empty()) {
      throw Rejection("action '" + s.name + "' has no doc text");
    }
  }
}

Domain parse_domain(std::string_view text) { return Parser().run(text); }

Domain load_domain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read domain file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_domain(buffer.str());
}

namespace {

void write_typed(std::ostream& out, const std::vector<TypedName>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << (i == 0 ? "" : " ") << names[i].name << " - " << names[i].type;
  }
}

void write_literals(std::ostream& out, const std::vector<Literal>& literals) {
  for (std::size_t i = 0; i < literals.size(); ++i) {
    out << (i == 0 ? " " : ", ") << to_string(literals[i]);
  }
}

}  // namespace

std::string serialize_domain(const Domain& domain) {
  std::ostringstream out;
  out << "types:";
  for (const auto& t : domain.types) out << ' ' << t;
  out << "\n\nobjects:\n";
  for (const auto& o : domain.objects) out << "  " << o.name << " - " << o.type << '\n';
  out << "\npredicates:\n";
  for (const auto& p : domain.predicates) {
    out << "  " << p.name;
    if (!p.params.empty()) {
      out << ' ';
      write_typed(out, p.params);
    }
    out << '\n';
  }
  for (const auto& s : domain.schemas) {
    out << "\naction: " << s.name << '\n';
    if (!s.params.empty()) {
      out << "  params: ";
      write_typed(out, s.params);
      out << '\n';
    }
    out << "  pre:";
    write_literals(out, s.preconditions);
    out << "\n  eff:";
    write_literals(out, s.effects);
    out << '\n';
    if (!s.footprint_success.empty()) {
      out << "  footprint_ok: " << escape(s.footprint_success) << '\n';
    }
    if (!s.footprint_failure.empty()) {
      out << "  footprint_err: " << escape(s.footprint_failure) << '\n';
    }
    for (const auto& k : s.keyed_failures) {
      out << "  footprint_err[" << to_string(k.trigger) << "]: " << escape(k.text) << '\n';
    }
    out << "  doc:\n";
    std::istringstream doc(s.doc);
    for (std::string line; std::getline(doc, line);) out << "    " << line << '\n';
  }
  return out.str();
}

}  // namespace ubuntuworld
