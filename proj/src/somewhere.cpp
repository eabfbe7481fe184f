#include "p2pcf/somewhere.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "p2pcf/deca.hpp"
#include "p2pcf/error.hpp"
#include "p2pcf/recursive.hpp"

namespace p2pcf {

namespace {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    if (ch == '(' || ch == ')') {
      flush();
      out.emplace_back(1, ch);
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

Variable class_name(const std::string& token, std::string_view default_peer) {
  if (token.find(':') == std::string::npos && !default_peer.empty()) {
    return Variable::named(std::string(default_peer) + ":" + token);
  }
  return Variable::named(token);
}

ClassDescription parse_at(const std::vector<std::string>& toks, std::size_t& pos,
                          std::string_view default_peer) {
  if (pos >= toks.size()) throw InputError("class description ends early");
  const std::string& t = toks[pos++];
  if (t == ")") throw InputError("unexpected ')' in class description");
  if (t != "(") {
    if (t == "top") return ClassDescription::top();
    if (t == "bottom") return ClassDescription::bottom();
    return ClassDescription::named(class_name(t, default_peer));
  }
  if (pos >= toks.size()) throw InputError("class description ends early");
  const std::string op = toks[pos++];
  std::vector<ClassDescription> kids;
  while (pos < toks.size() && toks[pos] != ")") kids.push_back(parse_at(toks, pos, default_peer));
  if (pos >= toks.size()) throw InputError("missing ')' in class description");
  ++pos;
  if (op == "and") return ClassDescription::all_of(std::move(kids));
  if (op == "or") return ClassDescription::any_of(std::move(kids));
  if (op == "not") {
    if (kids.size() != 1) throw InputError("(not ...) takes exactly one description");
    return ClassDescription::complement(std::move(kids[0]));
  }
  throw InputError("unknown class constructor '" + op + "'");
}

// Negation normal form carried as (formula, polarity).
ClauseSet cnf(const Formula& f, bool positive) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::constant:
      return f.value == positive ? ClauseSet{} : ClauseSet{Clause{}};
    case K::variable:
      return {Clause::unit(Literal(f.var, positive))};
    case K::negation:
      return cnf(f.children.at(0), !positive);
    case K::implication:
      return cnf(Formula::either({Formula::negate(f.children.at(0)), f.children.at(1)}), positive);
    case K::equivalence: {
      const Formula& a = f.children.at(0);
      const Formula& b = f.children.at(1);
      return cnf(Formula::both({Formula::implies(a, b), Formula::implies(b, a)}), positive);
    }
    case K::conjunction:
    case K::disjunction: {
      // A conjunction under positive polarity (or a disjunction under
      // negative) is a union of CNFs; otherwise a distribution.
      const bool union_of = (f.kind == K::conjunction) == positive;
      if (union_of) {
        ClauseSet out;
        for (const Formula& c : f.children) {
          ClauseSet part = cnf(c, positive);
          out.insert(part.begin(), part.end());
        }
        return out;
      }
      std::vector<ClauseSet> parts;
      for (const Formula& c : f.children) parts.push_back(cnf(c, positive));
      ClauseSet out;
      for (const Clause& c : distribute(parts)) {
        if (!c.is_tautology()) out.insert(c);
      }
      return out;
    }
  }
  return {};
}

void check_peer_atoms(const ClassDescription& d, PeerId p, const std::string& what) {
  std::set<Variable> atoms;
  collect_atoms(d, atoms);
  for (Variable v : atoms) {
    if (v.qualifier() != p.name()) {
      throw InputError(what + " of peer " + p.name() + " uses foreign class " + v.name());
    }
  }
}

ScheduleConfig seeded(std::uint64_t seed) {
  ScheduleConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

ClassDescription parse_description(std::string_view text, std::string_view default_peer) {
  const auto toks = tokenize(text);
  std::size_t pos = 0;
  ClassDescription d = parse_at(toks, pos, default_peer);
  if (pos != toks.size()) throw InputError("trailing tokens after class description");
  return d;
}

std::string to_string(const ClassDescription& d) {
  using K = ClassDescription::Kind;
  switch (d.kind) {
    case K::top: return "top";
    case K::bottom: return "bottom";
    case K::atom: return d.atom.name();
    default: break;
  }
  std::string out = d.kind == K::conjunction ? "(and" : d.kind == K::disjunction ? "(or" : "(not";
  for (const auto& c : d.children) out += " " + to_string(c);
  return out + ")";
}

void collect_atoms(const ClassDescription& d, std::set<Variable>& out) {
  if (d.kind == ClassDescription::Kind::atom) out.insert(d.atom);
  for (const auto& c : d.children) collect_atoms(c, out);
}

std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  auto join = [&](const char* op) {
    std::string out = "(";
    for (std::size_t i = 0; i < f.children.size(); ++i) {
      if (i) out += op;
      out += to_string(f.children[i]);
    }
    return out + ")";
  };
  switch (f.kind) {
    case K::constant: return f.value ? "true" : "false";
    case K::variable: return f.var.name();
    case K::negation: return "-" + to_string(f.children.at(0));
    case K::conjunction: return join(" & ");
    case K::disjunction: return join(" | ");
    case K::implication: return join(" => ");
    case K::equivalence: return join(" <=> ");
  }
  return "?";
}

Formula prop_encode_description(const ClassDescription& d) {
  using K = ClassDescription::Kind;
  std::vector<Formula> kids;
  for (const auto& c : d.children) kids.push_back(prop_encode_description(c));
  switch (d.kind) {
    case K::top: return Formula::truth(true);
    case K::bottom: return Formula::truth(false);
    case K::atom: return Formula::of(d.atom);
    case K::conjunction: return Formula::both(std::move(kids));
    case K::disjunction: return Formula::either(std::move(kids));
    case K::negation: return Formula::negate(std::move(kids.at(0)));
  }
  return Formula::truth(true);
}

ClauseSet clausify(const Formula& f) { return minimize(cnf(f, true)); }

Formula prop_encode_axiom(const Axiom& a) {
  Formula l = prop_encode_description(a.left);
  Formula r = prop_encode_description(a.right);
  switch (a.kind) {
    case AxiomKind::complete:
    case AxiomKind::equivalence: return Formula::iff(std::move(l), std::move(r));
    case AxiomKind::partial:
    case AxiomKind::inclusion: return Formula::implies(std::move(l), std::move(r));
    case AxiomKind::disjointness:
      return Formula::either({Formula::negate(std::move(l)), Formula::negate(std::move(r))});
  }
  return Formula::truth(true);
}

const PeerSchema* NetworkSchema::find(PeerId p) const {
  for (const auto& ps : peers)
    if (ps.peer == p) return &ps;
  return nullptr;
}

NetworkSchema parse_schema(std::string_view text) {
  NetworkSchema out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw InputError("schema line " + std::to_string(line_no) + ": " + what);
    };
    try {
      const std::string& kw = toks[0];
      if (kw == "peer") {
        if (toks.size() != 2) fail("expected 'peer <id>'");
        const PeerId p = PeerId::named(toks[1]);
        if (out.find(p)) fail("duplicate peer " + toks[1]);
        out.peers.push_back(PeerSchema{p, {}, {}, {}, {}, {}});
        continue;
      }
      if (out.peers.empty()) fail("statement before any 'peer' line");
      PeerSchema& ps = out.peers.back();
      const std::string self = ps.peer.name();
      std::size_t pos = 1;
      auto desc = [&] { return parse_at(toks, pos, self); };
      auto done = [&] {
        if (pos != toks.size()) fail("trailing tokens");
      };
      if (kw == "class") {
        if (toks.size() < 2) fail("expected 'class <name> [complete|partial <desc>]'");
        const Variable a = class_name(toks[1], self);
        ps.classes.insert(a);
        pos = 2;
        if (pos < toks.size()) {
          const std::string how = toks[pos++];
          if (how != "complete" && how != "partial") fail("expected complete or partial");
          Axiom ax{how == "complete" ? AxiomKind::complete : AxiomKind::partial,
                   ClassDescription::named(a), desc()};
          done();
          ps.ontology.push_back(std::move(ax));
        }
      } else if (kw == "equiv" || kw == "incl" || kw == "disjoint") {
        const AxiomKind k = kw == "equiv" ? AxiomKind::equivalence
                            : kw == "incl" ? AxiomKind::inclusion
                                           : AxiomKind::disjointness;
        ClassDescription l = desc();
        ClassDescription r = desc();
        done();
        ps.ontology.push_back(Axiom{k, std::move(l), std::move(r)});
      } else if (kw == "view") {
        if (toks.size() < 3) fail("expected 'view <name> <desc>'");
        const Variable v = class_name(toks[1], self);
        pos = 2;
        ClassDescription bound = desc();
        done();
        ps.views.push_back(StorageDeclaration{v, std::move(bound)});
      } else if (kw == "map") {
        AxiomKind k = AxiomKind::inclusion;
        if (pos < toks.size() && (toks[pos] == "incl" || toks[pos] == "equiv" || toks[pos] == "disjoint")) {
          k = toks[pos] == "equiv" ? AxiomKind::equivalence
              : toks[pos] == "incl" ? AxiomKind::inclusion
                                    : AxiomKind::disjointness;
          ++pos;
        }
        ClassDescription l = desc();
        ClassDescription r = desc();
        done();
        ps.mappings.push_back(Axiom{k, std::move(l), std::move(r)});
      } else if (kw == "individual") {
        if (toks.size() != 3) fail("expected 'individual <name> <class>'");
        ps.individuals.emplace_back(toks[1], class_name(toks[2], self));
      } else {
        fail("unknown statement '" + kw + "'");
      }
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.rfind("schema line", 0) == 0) throw;
      fail(msg);
    }
  }
  for (const PeerSchema& ps : out.peers) {
    for (const Axiom& a : ps.ontology) {
      check_peer_atoms(a.left, ps.peer, "ontology axiom");
      check_peer_atoms(a.right, ps.peer, "ontology axiom");
    }
    for (const StorageDeclaration& v : ps.views) {
      if (v.view.qualifier() != ps.peer.name()) {
        throw InputError("view " + v.view.name() + " declared by peer " + ps.peer.name());
      }
      check_peer_atoms(v.bound, ps.peer, "view " + v.view.name());
    }
  }
  return out;
}

NetworkSchema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

AcquaintanceGraph prop_encode_schema(const NetworkSchema& s) {
  std::set<Variable> views;
  for (const auto& ps : s.peers)
    for (const auto& v : ps.views) views.insert(v.view);

  std::map<PeerId, Theory> theories;
  std::vector<Edge> edges;
  for (const auto& ps : s.peers) {
    Theory& t = theories[ps.peer];
    for (Variable v : ps.classes) t.add_variable(v);
    auto add = [&](const Formula& f) {
      for (const Clause& c : clausify(f)) t.add_clause(c);
    };
    for (const auto& a : ps.ontology) add(prop_encode_axiom(a));
    for (const auto& v : ps.views) {
      t.add_variable(v.view);
      add(Formula::implies(Formula::of(v.view), prop_encode_description(v.bound)));
    }
    for (const auto& m : ps.mappings) {
      add(prop_encode_axiom(m));
      std::set<Variable> atoms;
      collect_atoms(m.left, atoms);
      collect_atoms(m.right, atoms);
      std::set<PeerId> foreign;
      for (Variable a : atoms) {
        t.add_variable(a);
        if (a.qualifier() == ps.peer.name()) continue;
        const std::string owner(a.qualifier());
        if (owner.empty() || owner == "User" || !s.find(PeerId::named(owner))) {
          throw InputError("mapping of " + ps.peer.name() + " refers to " + a.name() +
                           " whose peer is not in the network");
        }
        foreign.insert(PeerId::named(owner));
      }
      for (PeerId other : foreign) {
        for (Variable a : atoms) edges.push_back(Edge{a, ps.peer, other});
      }
    }
  }
  for (const Edge& e : edges) theories[e.b].add_variable(e.label);

  AcquaintanceGraph g;
  for (const auto& ps : s.peers) {
    Theory& t = theories[ps.peer];
    std::set<Variable> targets;
    for (Variable v : t.vocabulary())
      if (views.contains(v)) targets.insert(v);
    g.add_peer(ps.peer, std::move(t), std::move(targets));
  }
  for (const Edge& e : edges) g.add_edge(e.label, e.a, e.b);
  return g;
}

RewriteEngine parse_engine(std::string_view name) {
  if (name == "deca") return RewriteEngine::deca;
  if (name == "recursive") return RewriteEngine::recursive;
  if (name == "oracle") return RewriteEngine::oracle;
  throw InputError("unknown engine '" + std::string(name) + "'");
}

std::vector<ConjunctiveRewriting> rewritings(const ClassDescription& q, PeerId peer,
                                             const NetworkSchema& s, const RewriteOptions& opts) {
  return rewritings(q, peer, prop_encode_schema(s), opts);
}

std::vector<ConjunctiveRewriting> rewritings(const ClassDescription& q, PeerId peer,
                                             const AcquaintanceGraph& g, const RewriteOptions& opts) {
  const PeerInfo& info = g.peer(peer);
  std::set<Variable> atoms;
  collect_atoms(q, atoms);
  for (Variable a : atoms) {
    if (!info.theory.has_variable(a)) {
      throw InputError("query class " + a.name() + " is unknown to peer " + peer.name());
    }
  }
  const std::set<Variable> extensional = g.all_targets();
  const ClauseSet all = g.union_clauses();
  const ClauseSet negated = clausify(Formula::negate(prop_encode_description(q)));

  ClauseSet answers;
  for (const Clause& c : negated) {
    ClauseSet part;
    if (c.empty()) {
      // The query holds everywhere.
      answers.insert(c);
      continue;
    }
    switch (opts.engine) {
      case RewriteEngine::deca: {
        const auto out = DecaNetwork(g, opts.limits).ask_clause(peer, c, seeded(opts.seed));
        part.insert(out.answers.begin(), out.answers.end());
        break;
      }
      case RewriteEngine::recursive:
        part = rcf_clause(c, peer, g, opts.limits);
        break;
      case RewriteEngine::oracle:
        part = proper_prime_implicates_oracle(c, all, opts.limits);
        break;
    }
    answers.insert(part.begin(), part.end());
  }

  ClauseSet kept;
  for (const Clause& c : answers) {
    const bool usable = std::all_of(c.literals().begin(), c.literals().end(), [&](Literal l) {
      return !l.positive() && extensional.contains(l.variable());
    });
    if (usable && !entails(all, c)) kept.insert(c);
  }
  if (opts.maximal_only) kept = minimize(kept);

  std::vector<ConjunctiveRewriting> out;
  for (const Clause& c : kept) {
    ConjunctiveRewriting r;
    for (Literal l : c.literals()) r.insert(l.variable());
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : to_string(a) < to_string(b);
  });
  return out;
}

std::string to_string(const ConjunctiveRewriting& r) {
  if (r.empty()) return "top";
  std::vector<std::string> names;
  for (Variable v : r) names.push_back(v.name());
  std::sort(names.begin(), names.end());
  if (names.size() == 1) return names[0];
  std::string out = "(and";
  for (const auto& n : names) out += " " + n;
  return out + ")";
}

SatisfiabilityReport check_schema_satisfiability(const NetworkSchema& s, const ResourceLimits& limits) {
  const AcquaintanceGraph full = prop_encode_schema(s);
  SatisfiabilityReport report;

  std::vector<PeerId> joined;
  for (const auto& ps : s.peers) {
    const PeerId newcomer = ps.peer;
    const PeerInfo& info = full.peer(newcomer);
    Theory growing;
    for (Variable v : info.theory.vocabulary()) growing.add_variable(v);
    for (const Clause& c : info.theory.clauses()) {
      AcquaintanceGraph g;
      for (PeerId p : joined) g.add_peer(p, full.peer(p).theory, full.peer(p).targets);
      g.add_peer(newcomer, growing, info.targets);
      for (const Edge& e : full.edges()) {
        if (g.has_peer(e.a) && g.has_peer(e.b)) g.add_edge(e.label, e.a, e.b);
      }
      const auto out = DecaNetwork(g, limits).ask_clause(newcomer, c, ScheduleConfig{});
      if (std::find(out.answers.begin(), out.answers.end(), Clause{}) != out.answers.end()) {
        report.satisfiable = false;
        report.failed_at = newcomer;
        report.found_by_consequence_finding = true;
        return report;
      }
      growing.add_clause(c);
    }
    joined.push_back(newcomer);
    ClauseSet prefix;
    for (PeerId p : joined) prefix.insert(full.peer(p).theory.clauses().begin(), full.peer(p).theory.clauses().end());
    if (!is_satisfiable(prefix)) {
      report.satisfiable = false;
      report.failed_at = newcomer;
      return report;
    }
  }
  return report;
}

}  // namespace p2pcf
