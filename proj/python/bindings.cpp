#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ubuntuworld/agents.hpp"
#include "ubuntuworld/environment.hpp"
#include "ubuntuworld/errors.hpp"
#include "ubuntuworld/harness.hpp"
#include "ubuntuworld/planner.hpp"
#include "ubuntuworld/retrieval.hpp"

namespace py = pybind11;
using namespace ubuntuworld;

namespace {

std::vector<std::string> action_names(const GroundedDomain& d, const std::vector<std::size_t>& ids) {
  std::vector<std::string> out;
  for (auto i : ids) out.push_back(d.action(i).name);
  return out;
}

std::size_t action_index(const GroundedDomain& d, const std::string& name) {
  if (auto i = d.find_action(name)) return *i;
  throw py::key_error("unknown action '" + name + "'");
}

// Runs one harness command and returns what it printed.
template <class F>
std::string captured(F&& f) {
  std::ostringstream out;
  f(out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UbuntuWorld simulator: domain, planner, Q-learning agents, retrieval.";

  auto base = py::register_exception<std::runtime_error>(m, "UbuntuWorldError");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ReferenceError>(m, "ReferenceError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  py::register_exception<Unsolvable>(m, "Unsolvable", base.ptr());
  py::register_exception<NoRecommendation>(m, "NoRecommendation", base.ptr());
  py::register_exception<Rejection>(m, "Rejection", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EmptyQuery>(m, "EmptyQuery", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

  py::class_<State>(m, "State")
      .def_static("from_bits", &State::from_bits)
      .def_property_readonly("bits", &State::bits)
      .def("__len__", &State::size)
      .def("__getitem__",
           [](const State& s, std::size_t i) {
             if (i >= s.size()) throw py::index_error();
             return s[i];
           })
      .def("__eq__", [](const State& a, const State& b) { return a == b; })
      .def("__hash__", &State::hash)
      .def("__repr__", [](const State& s) { return "State('" + s.bits() + "')"; });

  py::class_<Goal>(m, "Goal")
      .def_static("decode", &Goal::decode)
      .def("encode", &Goal::encode)
      .def("__eq__", [](const Goal& a, const Goal& b) { return a == b; })
      .def("__repr__", [](const Goal& g) { return "Goal('" + g.encode() + "')"; });

  py::class_<GroundedDomain, std::shared_ptr<GroundedDomain>>(m, "Domain")
      .def_static(
          "load", [](const std::filesystem::path& p) {
            return std::const_pointer_cast<GroundedDomain>(load_grounded_domain(p));
          },
          py::arg("path") = default_domain_path())
      .def_static("parse", [](const std::string& text) {
        return std::make_shared<GroundedDomain>(parse_domain(text));
      })
      .def_property_readonly("predicates",
                             [](const GroundedDomain& d) {
                               std::vector<std::string> out;
                               for (const auto& p : d.predicates()) out.push_back(p.str());
                               return out;
                             })
      .def_property_readonly("actions",
                             [](const GroundedDomain& d) {
                               std::vector<std::string> out;
                               for (const auto& a : d.actions()) out.push_back(a.name);
                               return out;
                             })
      .def_property_readonly("fingerprint", &GroundedDomain::fingerprint)
      .def("parse_state", &GroundedDomain::parse_state)
      .def("parse_goal", &GroundedDomain::parse_goal)
      .def("format_state", &GroundedDomain::format_state)
      .def("base_state", [](const GroundedDomain& d) { return canonical_base_state(d); })
      .def("applicable",
           [](const GroundedDomain& d, const State& s, const std::string& a) {
             return applicable(s, d.action(action_index(d, a)));
           })
      .def("apply",
           [](const GroundedDomain& d, const State& s, const std::string& a) {
             return apply(s, d.action(action_index(d, a)));
           })
      .def_static("satisfies", &satisfies)
      .def("serialize", [](const GroundedDomain& d) { return serialize_domain(d.domain()); });

  m.def(
      "plan",
      [](const GroundedDomain& d, const State& s, const Goal& g)
          -> std::optional<std::vector<std::string>> {
        auto p = plan_optimal(d, s, g);
        if (!p) return std::nullopt;
        return action_names(d, p->actions);
      },
      py::arg("domain"), py::arg("state"), py::arg("goal"),
      "Shortest action sequence, or None when the goal is unreachable.");

  py::class_<Problem>(m, "Problem")
      .def_readonly("start", &Problem::start)
      .def_readonly("goal", &Problem::goal)
      .def_readonly("domain", &Problem::domain);

  m.def(
      "generate_problems",
      [](const std::shared_ptr<GroundedDomain>& d, std::uint64_t seed, std::size_t n,
         double open_fraction) {
        GoalMix mix;
        mix.open_file_fraction = open_fraction;
        return ProblemGenerator(d, seed, mix).batch(n);
      },
      py::arg("domain"), py::arg("seed"), py::arg("n"), py::arg("open_fraction") = 0.8);

  py::class_<Observation>(m, "Observation")
      .def_readonly("state", &Observation::state)
      .def_readonly("footprint", &Observation::footprint)
      .def_readonly("steps_taken", &Observation::steps_taken)
      .def_readonly("done", &Observation::done)
      .def_readonly("goal_reached", &Observation::goal_reached)
      .def_readonly("last_failed", &Observation::last_failed);

  py::class_<Environment>(m, "Environment")
      .def(py::init([](const std::shared_ptr<GroundedDomain>& d, std::size_t max_steps) {
             return Environment(d, {max_steps, 0});
           }),
           py::arg("domain"), py::arg("max_steps") = 30)
      .def("reset",
           [](Environment& e, const State& start, const Goal& goal) {
             return e.reset({start, goal, e.domain().fingerprint()});
           })
      .def("step",
           [](Environment& e, const std::string& action) {
             auto r = e.step(action_index(e.domain(), action));
             return py::make_tuple(r.observation, r.reward);
           })
      .def_property_readonly("observation", &Environment::observation);

  m.def("reward", [](const GroundedDomain& d, const State& s, const std::string& a, const State& t,
                     const Goal& g) { return reward_fn(s, d.action(action_index(d, a)), t, g); });

  py::class_<LearnParams>(m, "LearnParams")
      .def(py::init<>())
      .def_readwrite("alpha", &LearnParams::alpha)
      .def_readwrite("gamma", &LearnParams::gamma)
      .def_readwrite("epsilon", &LearnParams::epsilon)
      .def_readwrite("beta0", &LearnParams::beta0)
      .def_readwrite("tau", &LearnParams::tau)
      .def_readwrite("period", &LearnParams::period)
      .def("validate", &LearnParams::validate);
  m.def("beta", &beta_schedule, py::arg("t"), py::arg("params"));

  m.def("tokenize", [](const std::string& text) { return tokenize(text); });

  py::class_<CorpusIndex, std::shared_ptr<CorpusIndex>>(m, "CorpusIndex")
      .def_static(
          "load",
          [](const std::filesystem::path& p) {
            return std::make_shared<CorpusIndex>(CorpusIndex::build(load_corpus(p)));
          },
          py::arg("path") = default_corpus_path())
      .def("__len__", &CorpusIndex::doc_count)
      .def(
          "query",
          [](const CorpusIndex& idx, const std::string& text, std::size_t k) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& h : idx.query(text, k)) out.emplace_back(idx.posts()[h.post].id, h.score);
            return out;
          },
          py::arg("text"), py::arg("k") = 5);

  m.def(
      "recommend",
      [](const std::shared_ptr<GroundedDomain>& d, const std::shared_ptr<CorpusIndex>& idx,
         const std::string& footprint, std::size_t k) -> std::optional<std::string> {
        const DataDrivenRecommender rec(d, idx, k);
        auto a = rec(footprint);
        if (!a) return std::nullopt;
        return d->action(*a).name;
      },
      py::arg("domain"), py::arg("index"), py::arg("footprint"), py::arg("k") = 5,
      "Grounded action suggested for a failure footprint, or None.");

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("domain", &RunConfig::domain)
      .def_readwrite("corpus", &RunConfig::corpus)
      .def_readwrite("agent", &RunConfig::agent)
      .def_readwrite("params", &RunConfig::params)
      .def_readwrite("instances", &RunConfig::instances)
      .def_readwrite("replays", &RunConfig::replays)
      .def_readwrite("tasks", &RunConfig::tasks)
      .def_readwrite("max_steps", &RunConfig::max_steps)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("out", &RunConfig::out)
      .def_readwrite("window", &RunConfig::window)
      .def_readwrite("snapshot", &RunConfig::snapshot)
      .def_readwrite("open_fraction", &RunConfig::open_fraction)
      .def_readwrite("top_k", &RunConfig::top_k)
      .def("validate", &RunConfig::validate);

  m.def("train", [](const RunConfig& c) { return captured([&](auto& o) { cmd_train(c, o); }); });
  m.def("test", [](const RunConfig& c) { return captured([&](auto& o) { cmd_test(c, o); }); });
  m.def("query", [](const RunConfig& c, const std::string& text) {
    return captured([&](auto& o) { cmd_query(c, text, o); });
  });
  m.def("plan_text", [](const RunConfig& c, const std::string& start, const std::string& goal) {
    return captured([&](auto& o) { cmd_plan(c, start, goal, o); });
  });
  m.def("default_domain_path", &default_domain_path);
  m.def("default_corpus_path", &default_corpus_path);
}
