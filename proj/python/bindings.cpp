#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "p2pcf/benchgen.hpp"
#include "p2pcf/deca.hpp"
#include "p2pcf/error.hpp"
#include "p2pcf/recursive.hpp"
#include "p2pcf/somewhere.hpp"
#include "p2pcf/theory_io.hpp"

namespace py = pybind11;
using namespace p2pcf;

namespace {

// Clauses cross the boundary as lists of literal tokens like "-x".
using PyClause = std::vector<std::string>;

Clause to_clause(const PyClause& lits) {
  std::vector<Literal> v;
  for (const auto& s : lits) v.push_back(parse_literal(s));
  return Clause(std::move(v));
}

PyClause from_clause(const Clause& c) {
  PyClause out;
  for (Literal l : literals_by_name(c)) out.push_back(to_string(l));
  return out;
}

ClauseSet to_set(const std::vector<PyClause>& cs) {
  ClauseSet out;
  for (const auto& c : cs) out.insert(to_clause(c));
  return out;
}

std::vector<PyClause> from_set(const ClauseSet& cs) {
  std::vector<PyClause> out;
  for (const Clause& c : cs) out.push_back(from_clause(c));
  std::sort(out.begin(), out.end());
  return out;
}

ResourceLimits limits_of(std::size_t max_clauses) {
  ResourceLimits l;
  l.max_clauses = max_clauses;
  return l;
}

py::dict ask(const AcquaintanceGraph& g, const std::string& peer, const PyClause& query, const std::string& engine,
             std::uint64_t seed, const std::string& policy, std::optional<double> timeout_ms,
             std::optional<std::size_t> max_deliveries, std::size_t max_clauses, bool minimized) {
  const PeerId p = PeerId::named(peer);
  const Clause q = to_clause(query);
  const ResourceLimits limits = limits_of(max_clauses);
  py::dict result;
  ClauseSet answers;
  if (engine == "deca") {
    ScheduleConfig cfg;
    cfg.seed = seed;
    cfg.policy = parse_policy(policy);
    cfg.ttl_budget = timeout_ms;
    cfg.max_deliveries = max_deliveries;
    QueryOutcome out;
    {
      py::gil_scoped_release release;
      out = DecaNetwork(g, limits).ask_clause(p, q, cfg);
    }
    answers.insert(out.answers.begin(), out.answers.end());
    result["terminated"] = out.terminated;
    result["timed_out"] = out.report.timed_out;
    result["aborted"] = out.report.aborted;
    result["delivered"] = out.report.delivered;
    result["depth"] = out.depth;
  } else if (engine == "recursive") {
    py::gil_scoped_release release;
    answers = rcf_clause(q, p, g, limits);
  } else if (engine == "oracle") {
    py::gil_scoped_release release;
    answers = target_consequences(q, g, limits);
  } else {
    throw InputError("unknown engine '" + engine + "'");
  }
  result["answers"] = from_set(minimized ? proper_minimal(answers, g) : answers);
  return result;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed consequence finding over peer networks";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ResourceLimitError>(m, "ResourceLimitError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());

  m.def("is_satisfiable", [](const std::vector<PyClause>& cs) { return is_satisfiable(to_set(cs)); });
  m.def("entails", [](const std::vector<PyClause>& cs, const PyClause& c) { return entails(to_set(cs), to_clause(c)); });
  m.def(
      "prime_implicates",
      [](const std::vector<PyClause>& cs, std::size_t max_clauses) {
        return from_set(prime_implicates(to_set(cs), limits_of(max_clauses)));
      },
      py::arg("clauses"), py::arg("max_clauses") = 1'000'000);

  py::class_<AcquaintanceGraph>(m, "Network")
      .def_static("load", &load_manifest, py::arg("manifest"), "Load a manifest file or a directory holding one.")
      .def_static(
          "from_schema", [](const std::filesystem::path& p) { return prop_encode_schema(read_schema(p)); },
          py::arg("schema"))
      .def_static(
          "generate",
          [](std::size_t np, std::size_t k, double pr, std::size_t n, std::size_t m, std::size_t t, std::size_t q,
             double pct3cnf, std::uint64_t seed) {
            return gen_instance(GenParams{np, k, pr, n, m, t, q, pct3cnf, seed}).graph;
          },
          py::arg("np") = 10, py::arg("k") = 2, py::arg("pr") = 0.1, py::arg("n") = 10, py::arg("m") = 10,
          py::arg("t") = 5, py::arg("q") = 2, py::arg("pct3cnf") = 0.0, py::arg("seed") = 0)
      .def("save", &write_manifest, py::arg("dir"))
      .def("peers",
           [](const AcquaintanceGraph& g) {
             std::vector<std::string> out;
             for (PeerId p : g.peers()) out.push_back(p.name());
             return out;
           })
      .def("clauses", [](const AcquaintanceGraph& g, const std::string& p) {
        return from_set(g.peer(PeerId::named(p)).theory.clauses());
      })
      .def("path_property_holds", [](const AcquaintanceGraph& g) { return check_path_property(g).holds; })
      .def("target_consistent", &AcquaintanceGraph::target_consistent)
      .def("ask", &ask, py::arg("peer"), py::arg("query"), py::arg("engine") = "deca", py::arg("seed") = 0,
           py::arg("policy") = "random", py::arg("timeout_ms") = py::none(), py::arg("max_deliveries") = py::none(),
           py::arg("max_clauses") = 1'000'000, py::arg("minimize") = true,
           "Consequences of the query clause in the target language; a dict with 'answers' and run facts.");

  m.def(
      "rewritings",
      [](const std::filesystem::path& schema, const std::string& query, const std::string& peer,
         const std::string& engine, std::uint64_t seed) {
        RewriteOptions opts;
        opts.engine = parse_engine(engine);
        opts.seed = seed;
        std::vector<std::vector<std::string>> out;
        for (const auto& r : rewritings(parse_description(query, peer), PeerId::named(peer), read_schema(schema), opts)) {
          std::vector<std::string> names;
          for (Variable v : r) names.push_back(v.name());
          std::sort(names.begin(), names.end());
          out.push_back(std::move(names));
        }
        return out;
      },
      py::arg("schema"), py::arg("query"), py::arg("peer"), py::arg("engine") = "deca", py::arg("seed") = 0);
}
