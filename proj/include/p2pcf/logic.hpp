#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace p2pcf {

// A propositional variable. Names are interned in a process-wide symbol
// table, so a Variable is a 32-bit handle that compares and hashes cheaply.
// A name may carry a peer qualifier ("Ann:G"); unqualified names ("x12") are
// used by generated benchmarks.
class Variable {
 public:
  Variable() = default;

  static Variable named(std::string_view token);
  static Variable from_id(std::uint32_t id) { return Variable(id); }

  std::uint32_t id() const { return id_; }
  const std::string& name() const;
  // Text before the first ':' of the name, empty when unqualified.
  std::string_view qualifier() const;
  std::string_view local_name() const;

  friend auto operator<=>(Variable, Variable) = default;

 private:
  explicit Variable(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

class Literal {
 public:
  Literal() = default;
  Literal(Variable v, bool positive) : code_((v.id() << 1) | (positive ? 0u : 1u)) {}

  static Literal pos(Variable v) { return {v, true}; }
  static Literal neg(Variable v) { return {v, false}; }
  static Literal from_code(std::uint32_t code) {
    Literal l;
    l.code_ = code;
    return l;
  }

  Variable variable() const { return Variable::from_id(code_ >> 1); }
  bool positive() const { return (code_ & 1u) == 0; }
  Literal complement() const { return from_code(code_ ^ 1u); }
  std::uint32_t code() const { return code_; }

  friend auto operator<=>(Literal, Literal) = default;

 private:
  std::uint32_t code_ = 0;
};

// A disjunction of literals, kept as a sorted duplicate-free sequence. The
// empty clause is the contradiction. Tautologies can be represented; callers
// that must not produce them check is_tautology().
class Clause {
 public:
  Clause() = default;
  Clause(std::initializer_list<Literal> lits);
  explicit Clause(std::vector<Literal> lits);

  static Clause unit(Literal l) { return Clause({l}); }

  std::span<const Literal> literals() const { return lits_; }
  std::size_t size() const { return lits_.size(); }
  bool empty() const { return lits_.empty(); }
  bool contains(Literal l) const;
  bool mentions(Variable v) const;
  bool is_tautology() const;
  bool is_unit() const { return lits_.size() == 1; }

  // Bloom-style literal signature: if signature(a) has a bit that
  // signature(b) lacks, a cannot be a subset of b.
  std::uint64_t signature() const { return signature_; }

  Clause without(Literal l) const;

  // Disjunction of two clauses (literal-set union).
  friend Clause operator|(const Clause& a, const Clause& b);

  friend bool operator==(const Clause& a, const Clause& b) { return a.lits_ == b.lits_; }
  // Canonical order: shorter clauses first, then lexicographic on literals.
  friend std::strong_ordering operator<=>(const Clause& a, const Clause& b);

 private:
  void normalize();

  std::vector<Literal> lits_;
  std::uint64_t signature_ = 0;
};

using ClauseSet = std::set<Clause>;

// A clausal theory over a vocabulary. Every variable occurring in a clause is
// in the vocabulary; the vocabulary may be strictly larger.
class Theory {
 public:
  Theory() = default;
  explicit Theory(ClauseSet clauses, std::set<Variable> vocabulary = {});

  void add_clause(Clause c);
  void add_variable(Variable v) { vocabulary_.insert(v); }

  const ClauseSet& clauses() const { return clauses_; }
  const std::set<Variable>& vocabulary() const { return vocabulary_; }
  bool has_variable(Variable v) const { return vocabulary_.contains(v); }
  bool contains(const Clause& c) const { return clauses_.contains(c); }

  friend bool operator==(const Theory&, const Theory&) = default;

 private:
  ClauseSet clauses_;
  std::set<Variable> vocabulary_;
};

struct ResourceLimits {
  std::size_t max_clauses = 1'000'000;
  std::optional<std::chrono::milliseconds> time_budget;
};

// Resolvent of c1 and c2 upon v, or nullopt when v does not occur with
// opposite signs in the two clauses.
std::optional<Clause> resolve(const Clause& c1, const Clause& c2, Variable v);

// True iff c1's literals are a subset of c2's.
bool subsumes(const Clause& c1, const Clause& c2);

// {c1 | ... | cn : ci in sets[i]}. An empty list yields {[]}.
ClauseSet distribute(std::span<const ClauseSet> sets);

// The subsumption-minimal members of `clauses`.
ClauseSet minimize(const ClauseSet& clauses);

// Clauses derived by resolution from theory + {q} with q in their ancestry
// and not entailed by the theory alone, minimal under subsumption among
// themselves. q itself is not reported. Contains every prime proper
// resolvent of q.
ClauseSet resolvent_set(Literal q, const ClauseSet& theory,
                        const ResourceLimits& limits = {});
// Same, checking that q's variable belongs to the theory's vocabulary.
ClauseSet resolvent_set(Literal q, const Theory& theory,
                        const ResourceLimits& limits = {});

// Every non-tautological prime implicate of `clauses` (Tison's consensus
// saturation with forward and backward subsumption). Throws
// ResourceLimitError when the derived-clause budget or time budget runs out.
ClauseSet prime_implicates(const ClauseSet& clauses, const ResourceLimits& limits = {});

// Prime implicates of theory + {q} not entailed by theory alone.
ClauseSet proper_prime_implicates_oracle(const Clause& q, const ClauseSet& theory,
                                         const ResourceLimits& limits = {});
// Variant reusing an already computed prime_implicates(theory).
ClauseSet proper_prime_implicates_from(const Clause& q, const ClauseSet& theory_primes,
                                       const ResourceLimits& limits = {});

// Complete satisfiability check (CDCL).
bool is_satisfiable(const ClauseSet& clauses, std::span<const Literal> assumptions = {});
// clauses |= c, decided by refutation.
bool entails(const ClauseSet& clauses, const Clause& c);

std::set<Variable> variables_of(const ClauseSet& clauses);
std::size_t total_literals(const ClauseSet& clauses);

std::string to_string(Literal l);
// "a | -b", "[]" for the empty clause. Literals sorted by variable name, so
// the text does not depend on interning order.
std::vector<Literal> literals_by_name(const Clause& c);
std::string to_string(const Clause& c);

}  // namespace p2pcf

template <>
struct std::hash<p2pcf::Variable> {
  std::size_t operator()(p2pcf::Variable v) const noexcept { return v.id(); }
};

template <>
struct std::hash<p2pcf::Literal> {
  std::size_t operator()(p2pcf::Literal l) const noexcept { return l.code(); }
};

template <>
struct std::hash<p2pcf::Clause> {
  std::size_t operator()(const p2pcf::Clause& c) const noexcept;
};
