#include "ubuntuworld/grounding.hpp"

#include <algorithm>
#include <sstream>

#include "ubuntuworld/errors.hpp"

namespace ubuntuworld {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// Every combination of one object per type, odometer order (last varies
// fastest).
std::vector<std::vector<std::string>> cartesian(const Domain& domain,
                                                const std::vector<TypedName>& params) {
  std::vector<std::vector<std::string>> pools;
  for (const auto& p : params) pools.push_back(domain.objects_of(p.type));
  std::vector<std::vector<std::string>> out;
  for (const auto& pool : pools) {
    if (pool.empty()) return out;
  }
  std::vector<std::size_t> idx(pools.size(), 0);
  while (true) {
    std::vector<std::string> combo;
    for (std::size_t i = 0; i < pools.size(); ++i) combo.push_back(pools[i][idx[i]]);
    out.push_back(std::move(combo));
    std::size_t k = pools.size();
    while (k > 0) {
      --k;
      if (++idx[k] < pools[k].size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (pools.empty()) return out;
  }
}

std::string substitute(std::string text, const std::vector<TypedName>& params,
                       const std::vector<std::string>& binding) {
  // Longest names first so "?so" is not clobbered by "?s".
  std::vector<std::size_t> order(params.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return params[a].name.size() > params[b].name.size();
  });
  for (std::size_t i : order) {
    const std::string& from = params[i].name;
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
      text.replace(pos, from.size(), binding[i]);
      pos += binding[i].size();
    }
  }
  return text;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string GroundPredicate::str() const {
  std::string out = name;
  for (const auto& a : args) out += " " + a;
  return out;
}

State State::with(std::size_t i, bool v) const {
  State out = *this;
  out.values_.at(i) = v;
  return out;
}

std::string State::bits() const {
  std::string out;
  out.reserve(values_.size());
  for (bool v : values_) out += v ? '1' : '0';
  return out;
}

State State::from_bits(std::string_view bits) {
  std::vector<bool> values;
  values.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw ParseError(0, "bad state bits '" + std::string(bits) + "'");
    values.push_back(c == '1');
  }
  return State(std::move(values));
}

Goal::Goal(std::vector<GroundLiteral> literals) : literals_(std::move(literals)) {
  std::sort(literals_.begin(), literals_.end());
  literals_.erase(std::unique(literals_.begin(), literals_.end()), literals_.end());
  for (std::size_t i = 1; i < literals_.size(); ++i) {
    if (literals_[i].predicate == literals_[i - 1].predicate) {
      throw Rejection("goal assigns predicate " + std::to_string(literals_[i].predicate) +
                      " both values");
    }
  }
}

std::size_t Goal::hash() const {
  std::size_t h = 0x84222325;
  for (const auto& l : literals_) {
    h ^= (l.predicate * 2 + (l.value ? 1 : 0)) + 0x9e3779b9 + (h << 6) + (h >> 2);
  }
  return h;
}

std::string Goal::encode() const {
  if (literals_.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(literals_[i].predicate) + (literals_[i].value ? "=1" : "=0");
  }
  return out;
}

Goal Goal::decode(std::string_view text) {
  if (text == "-") return Goal{};
  std::vector<GroundLiteral> lits;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(start, comma - start);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq + 2 != item.size() ||
        (item[eq + 1] != '0' && item[eq + 1] != '1')) {
      throw ParseError(0, "bad goal encoding '" + std::string(text) + "'");
    }
    std::size_t pred = 0;
    for (char c : item.substr(0, eq)) {
      if (c < '0' || c > '9') throw ParseError(0, "bad goal encoding '" + std::string(text) + "'");
      pred = pred * 10 + static_cast<std::size_t>(c - '0');
    }
    if (eq == 0) throw ParseError(0, "bad goal encoding '" + std::string(text) + "'");
    lits.push_back({pred, item[eq + 1] == '1'});
    start = comma + 1;
  }
  return Goal(std::move(lits));
}

Grounding ground(const Domain& domain) {
  Grounding g;
  for (const auto& pred : domain.predicates) {
    for (auto& args : cartesian(domain, pred.params)) {
      g.predicates.push_back({pred.name, std::move(args)});
    }
  }
  auto index_of = [&](const Literal& lit, const ActionSchema& schema,
                      const std::vector<std::string>& binding) {
    GroundPredicate gp{lit.predicate, {}};
    for (const auto& a : lit.args) {
      if (!a.empty() && a.front() == '?') {
        auto it = std::find_if(schema.params.begin(), schema.params.end(),
                               [&](const TypedName& p) { return p.name == a; });
        gp.args.push_back(binding[static_cast<std::size_t>(it - schema.params.begin())]);
      } else {
        gp.args.push_back(a);
      }
    }
    auto it = std::find(g.predicates.begin(), g.predicates.end(), gp);
    if (it == g.predicates.end()) {
      throw ReferenceError("grounded literal '" + gp.str() + "' is not a domain predicate");
    }
    return GroundLiteral{static_cast<std::size_t>(it - g.predicates.begin()), lit.positive};
  };

  std::vector<std::size_t> schema_order(domain.schemas.size());
  for (std::size_t i = 0; i < schema_order.size(); ++i) schema_order[i] = i;
  std::stable_sort(schema_order.begin(), schema_order.end(), [&](std::size_t a, std::size_t b) {
    return domain.schemas[a].name < domain.schemas[b].name;
  });

  for (std::size_t si : schema_order) {
    const ActionSchema& schema = domain.schemas[si];
    auto bindings = cartesian(domain, schema.params);
    std::sort(bindings.begin(), bindings.end());
    for (auto& binding : bindings) {
      GroundedAction ga;
      ga.schema = si;
      ga.name = schema.name;
      if (!binding.empty()) {
        ga.name += '(';
        for (std::size_t i = 0; i < binding.size(); ++i) {
          ga.name += (i == 0 ? "" : ",") + binding[i];
        }
        ga.name += ')';
      }
      for (const auto& lit : schema.preconditions) {
        ga.preconditions.push_back(index_of(lit, schema, binding));
      }
      for (const auto& lit : schema.effects) {
        ga.effects.push_back(index_of(lit, schema, binding));
      }
      ga.footprint_success = substitute(schema.footprint_success, schema.params, binding);
      ga.footprint_failure = substitute(schema.footprint_failure, schema.params, binding);
      for (const auto& keyed : schema.keyed_failures) {
        ga.keyed_failures.emplace_back(index_of(keyed.trigger, schema, binding),
                                       substitute(keyed.text, schema.params, binding));
      }
      ga.binding = std::move(binding);
      g.actions.push_back(std::move(ga));
    }
  }
  return g;
}

std::optional<GroundLiteral> first_violation(const State& state, const GroundedAction& action) {
  for (const auto& lit : action.preconditions) {
    if (lit.predicate >= state.size()) {
      throw ContractViolation("action " + action.name + " references predicate " +
                              std::to_string(lit.predicate) + " outside the state");
    }
    if (state[lit.predicate] != lit.value) return lit;
  }
  return std::nullopt;
}

bool applicable(const State& state, const GroundedAction& action) {
  return !first_violation(state, action).has_value();
}

State apply(const State& state, const GroundedAction& action) {
  if (!applicable(state, action)) {
    throw ContractViolation("apply: " + action.name + " is not applicable");
  }
  std::vector<bool> values = state.values();
  for (const auto& lit : action.effects) {
    if (lit.predicate >= values.size()) {
      throw ContractViolation("action " + action.name + " affects predicate outside the state");
    }
    values[lit.predicate] = lit.value;
  }
  return State(std::move(values));
}

bool satisfies(const State& state, const Goal& goal) {
  return std::all_of(goal.literals().begin(), goal.literals().end(), [&](const GroundLiteral& l) {
    return l.predicate < state.size() && state[l.predicate] == l.value;
  });
}

GroundedDomain::GroundedDomain(Domain domain)
    : domain_(std::move(domain)),
      grounding_(ground(domain_)),
      fingerprint_(fnv1a(serialize_domain(domain_))) {}

std::optional<std::size_t> GroundedDomain::find_predicate(const GroundPredicate& p) const {
  auto it = std::find(grounding_.predicates.begin(), grounding_.predicates.end(), p);
  if (it == grounding_.predicates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - grounding_.predicates.begin());
}

std::optional<std::size_t> GroundedDomain::find_predicate(std::string_view text) const {
  auto tokens = split_ws(text);
  if (tokens.empty()) return std::nullopt;
  GroundPredicate p{tokens.front(), {tokens.begin() + 1, tokens.end()}};
  return find_predicate(p);
}

std::optional<std::size_t> GroundedDomain::find_action(std::string_view name) const {
  std::string compact;
  for (char c : name) {
    if (c != ' ') compact += c;
  }
  for (std::size_t i = 0; i < grounding_.actions.size(); ++i) {
    if (grounding_.actions[i].name == compact) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> GroundedDomain::find_action(
    std::string_view schema, const std::vector<std::string>& binding) const {
  for (std::size_t i = 0; i < grounding_.actions.size(); ++i) {
    const auto& a = grounding_.actions[i];
    if (domain_.schemas[a.schema].name == schema && a.binding == binding) return i;
  }
  return std::nullopt;
}

GroundLiteral GroundedDomain::parse_literal(std::string_view text) const {
  text = trim(text);
  bool value = true;
  if (!text.empty() && text.front() == '!') {
    value = false;
    text = trim(text.substr(1));
  }
  auto idx = find_predicate(text);
  if (!idx) throw ReferenceError("unknown predicate '" + std::string(text) + "'");
  return {*idx, value};
}

namespace {

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = trim(text.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

}  // namespace

State GroundedDomain::parse_state(std::string_view text) const {
  std::vector<bool> values(num_predicates(), false);
  for (auto item : split_commas(text)) {
    const auto lit = parse_literal(item);
    values[lit.predicate] = lit.value;
  }
  return State(std::move(values));
}

Goal GroundedDomain::parse_goal(std::string_view text) const {
  std::vector<GroundLiteral> lits;
  for (auto item : split_commas(text)) lits.push_back(parse_literal(item));
  return Goal(std::move(lits));
}

std::string GroundedDomain::format_state(const State& state) const {
  std::string out;
  for (std::size_t i = 0; i < num_predicates() && i < state.size(); ++i) {
    out += grounding_.predicates[i].str() + " : " + (state[i] ? "True" : "False") + "\n";
  }
  return out;
}

std::string GroundedDomain::format_goal(const Goal& goal) const {
  std::string out;
  for (const auto& l : goal.literals()) {
    if (!out.empty()) out += ", ";
    if (!l.value) out += '!';
    out += l.predicate < num_predicates() ? grounding_.predicates[l.predicate].str() : "?";
  }
  return out;
}

bool GroundedDomain::valid(const Goal& goal) const {
  return std::all_of(goal.literals().begin(), goal.literals().end(),
                     [&](const GroundLiteral& l) { return l.predicate < num_predicates(); });
}

DomainPtr make_domain(Domain domain) {
  return std::make_shared<const GroundedDomain>(std::move(domain));
}

DomainPtr load_grounded_domain(const std::filesystem::path& path) {
  return make_domain(load_domain(path));
}

}  // namespace ubuntuworld
