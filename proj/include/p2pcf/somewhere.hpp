#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "p2pcf/graph.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf {

// Class descriptions of the propositional OWL fragment.
struct ClassDescription {
  enum class Kind { top, bottom, atom, conjunction, disjunction, negation };
  Kind kind = Kind::top;
  Variable atom;                           // atom
  std::vector<ClassDescription> children;  // conjunction, disjunction, negation

  static ClassDescription top() { return {}; }
  static ClassDescription bottom() { return {Kind::bottom, {}, {}}; }
  static ClassDescription named(Variable v) { return {Kind::atom, v, {}}; }
  static ClassDescription all_of(std::vector<ClassDescription> ds) {
    return {Kind::conjunction, {}, std::move(ds)};
  }
  static ClassDescription any_of(std::vector<ClassDescription> ds) {
    return {Kind::disjunction, {}, std::move(ds)};
  }
  static ClassDescription complement(ClassDescription d) { return {Kind::negation, {}, {std::move(d)}}; }

  friend bool operator==(const ClassDescription&, const ClassDescription&) = default;
};

// `top`, `bottom`, a class name, or `(and d...)`, `(or d...)`, `(not d)`.
// Unqualified names get `default_peer:` prepended when it is given.
ClassDescription parse_description(std::string_view text, std::string_view default_peer = {});
std::string to_string(const ClassDescription& d);
void collect_atoms(const ClassDescription& d, std::set<Variable>& out);

// Propositional formulas.
struct Formula {
  enum class Kind { constant, variable, negation, conjunction, disjunction, implication, equivalence };
  Kind kind = Kind::constant;
  bool value = true;  // constant
  Variable var;       // variable
  std::vector<Formula> children;

  static Formula truth(bool v) { return {Kind::constant, v, {}, {}}; }
  static Formula of(Variable v) { return {Kind::variable, true, v, {}}; }
  static Formula negate(Formula f) { return {Kind::negation, true, {}, {std::move(f)}}; }
  static Formula both(std::vector<Formula> fs) { return {Kind::conjunction, true, {}, std::move(fs)}; }
  static Formula either(std::vector<Formula> fs) { return {Kind::disjunction, true, {}, std::move(fs)}; }
  static Formula implies(Formula a, Formula b) {
    return {Kind::implication, true, {}, {std::move(a), std::move(b)}};
  }
  static Formula iff(Formula a, Formula b) {
    return {Kind::equivalence, true, {}, {std::move(a), std::move(b)}};
  }
};

std::string to_string(const Formula& f);

Formula prop_encode_description(const ClassDescription& d);

// Equivalent CNF by distribution (no auxiliary variables), without
// tautologies and without clauses subsumed by others of the result.
ClauseSet clausify(const Formula& f);

enum class AxiomKind { complete, partial, equivalence, inclusion, disjointness };

struct Axiom {
  AxiomKind kind;
  ClassDescription left, right;
};

Formula prop_encode_axiom(const Axiom& a);

struct StorageDeclaration {
  Variable view;
  ClassDescription bound;
};

struct PeerSchema {
  PeerId peer;
  std::set<Variable> classes;  // declared with a bare `class` line or defined
  std::vector<Axiom> ontology;
  std::vector<StorageDeclaration> views;
  std::vector<Axiom> mappings;
  std::vector<std::pair<std::string, Variable>> individuals;  // stored, unused
};

struct NetworkSchema {
  std::vector<PeerSchema> peers;

  const PeerSchema* find(PeerId p) const;
};

// Line-oriented schema text:
//   peer <id>
//   class <P:A> [complete|partial <desc>]
//   equiv|incl|disjoint <desc> <desc>
//   view <P:ViewA> <desc>
//   map [incl|equiv|disjoint] <desc> <desc>     (incl by default)
//   individual <name> <P:A>
// `#` starts a comment.
NetworkSchema parse_schema(std::string_view text);
NetworkSchema read_schema(const std::filesystem::path& path);

// The acquaintance graph of the encoded network. Throws InputError for a
// mapping that names a peer missing from the schema, or a view bounded by
// another peer's classes.
AcquaintanceGraph prop_encode_schema(const NetworkSchema& s);

enum class RewriteEngine { deca, recursive, oracle };
RewriteEngine parse_engine(std::string_view name);

// A conjunction of extensional classes; empty means every individual
// qualifies (the query is entailed by the schema).
using ConjunctiveRewriting = std::set<Variable>;

struct RewriteOptions {
  RewriteEngine engine = RewriteEngine::deca;
  bool maximal_only = true;
  std::uint64_t seed = 0;
  ResourceLimits limits;
};

// Maximal proper conjunctive rewritings of q posed at `peer`.
std::vector<ConjunctiveRewriting> rewritings(const ClassDescription& q, PeerId peer,
                                             const NetworkSchema& s, const RewriteOptions& opts = {});
// Same with an already encoded graph.
std::vector<ConjunctiveRewriting> rewritings(const ClassDescription& q, PeerId peer,
                                             const AcquaintanceGraph& encoded,
                                             const RewriteOptions& opts = {});
std::string to_string(const ConjunctiveRewriting& r);

struct SatisfiabilityReport {
  bool satisfiable = true;
  // Peer whose join first made the network unsatisfiable.
  std::optional<PeerId> failed_at;
  // Whether distributed consequence finding saw the contradiction. It can
  // miss one when a partially joined network lacks the path property; the
  // backtracking check decides then.
  bool found_by_consequence_finding = false;
};

SatisfiabilityReport check_schema_satisfiability(const NetworkSchema& s,
                                                 const ResourceLimits& limits = {});

}  // namespace p2pcf
