#include "p2pcf/logic.hpp"

#include <algorithm>
#include <queue>
#include <deque>
#include <unordered_map>

#include "p2pcf/error.hpp"
#include "saturation.hpp"
#include "symbols.hpp"

namespace p2pcf {

namespace {

struct VariableTag {};
using VariableSymbols = detail::SymbolTable<VariableTag>;

std::uint64_t literal_bit(Literal l) {
  return std::uint64_t{1} << ((l.code() * 0x9E3779B97F4A7C15ull) >> 58);
}

}  // namespace

// ---------------------------------------------------------------------------
// Variable / Literal / Clause

Variable Variable::named(std::string_view token) {
  if (token.empty()) throw InputError("empty variable name");
  return Variable(VariableSymbols::instance().intern(token));
}

const std::string& Variable::name() const { return VariableSymbols::instance().name(id_); }

std::string_view Variable::qualifier() const {
  std::string_view n = name();
  const auto colon = n.find(':');
  return colon == std::string_view::npos ? std::string_view{} : n.substr(0, colon);
}

std::string_view Variable::local_name() const {
  std::string_view n = name();
  const auto colon = n.find(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

Clause::Clause(std::initializer_list<Literal> lits) : lits_(lits) { normalize(); }

Clause::Clause(std::vector<Literal> lits) : lits_(std::move(lits)) { normalize(); }

void Clause::normalize() {
  std::sort(lits_.begin(), lits_.end());
  lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
  signature_ = 0;
  for (Literal l : lits_) signature_ |= literal_bit(l);
}

bool Clause::contains(Literal l) const {
  if ((signature_ & literal_bit(l)) == 0) return false;
  return std::binary_search(lits_.begin(), lits_.end(), l);
}

bool Clause::mentions(Variable v) const {
  return contains(Literal::pos(v)) || contains(Literal::neg(v));
}

bool Clause::is_tautology() const {
  // Complementary literals have adjacent codes.
  for (std::size_t i = 1; i < lits_.size(); ++i) {
    if (lits_[i].code() == (lits_[i - 1].code() ^ 1u)) return true;
  }
  return false;
}

Clause Clause::without(Literal l) const {
  Clause out;
  out.lits_.reserve(lits_.size());
  for (Literal x : lits_) {
    if (x != l) {
      out.lits_.push_back(x);
      out.signature_ |= literal_bit(x);
    }
  }
  return out;
}

Clause operator|(const Clause& a, const Clause& b) {
  Clause out;
  out.lits_.reserve(a.size() + b.size());
  std::set_union(a.lits_.begin(), a.lits_.end(), b.lits_.begin(), b.lits_.end(),
                 std::back_inserter(out.lits_));
  out.signature_ = a.signature_ | b.signature_;
  return out;
}

std::strong_ordering operator<=>(const Clause& a, const Clause& b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.lits_.begin(), a.lits_.end(),
                                                b.lits_.begin(), b.lits_.end());
}

Theory::Theory(ClauseSet clauses, std::set<Variable> vocabulary)
    : vocabulary_(std::move(vocabulary)) {
  for (const Clause& c : clauses) add_clause(c);
}

void Theory::add_clause(Clause c) {
  for (Literal l : c.literals()) vocabulary_.insert(l.variable());
  clauses_.insert(std::move(c));
}

// ---------------------------------------------------------------------------
// Basic operations

std::optional<Clause> resolve(const Clause& c1, const Clause& c2, Variable v) {
  const Literal p = Literal::pos(v);
  const Literal n = Literal::neg(v);
  if (c1.contains(p) && c2.contains(n)) return c1.without(p) | c2.without(n);
  if (c1.contains(n) && c2.contains(p)) return c1.without(n) | c2.without(p);
  return std::nullopt;
}

bool subsumes(const Clause& c1, const Clause& c2) {
  if (c1.size() > c2.size()) return false;
  if ((c1.signature() & ~c2.signature()) != 0) return false;
  return std::includes(c2.literals().begin(), c2.literals().end(), c1.literals().begin(),
                       c1.literals().end());
}

ClauseSet distribute(std::span<const ClauseSet> sets) {
  ClauseSet acc{Clause{}};
  for (const ClauseSet& factor : sets) {
    ClauseSet next;
    for (const Clause& partial : acc) {
      for (const Clause& c : factor) next.insert(partial | c);
    }
    acc = std::move(next);
    if (acc.empty()) break;
  }
  return acc;
}

ClauseSet minimize(const ClauseSet& clauses) {
  // Canonical order is by size, so a subsumer is always seen first.
  detail::ClauseStore store;
  for (const Clause& c : clauses) {
    if (!store.forward_subsumed(c)) store.add(c);
  }
  ClauseSet out;
  for (const Clause& c : store.alive_clauses()) out.insert(c);
  return out;
}

std::set<Variable> variables_of(const ClauseSet& clauses) {
  std::set<Variable> vars;
  for (const Clause& c : clauses) {
    for (Literal l : c.literals()) vars.insert(l.variable());
  }
  return vars;
}

std::size_t total_literals(const ClauseSet& clauses) {
  std::size_t n = 0;
  for (const Clause& c : clauses) n += c.size();
  return n;
}

std::string to_string(Literal l) {
  return l.positive() ? l.variable().name() : "-" + l.variable().name();
}

std::vector<Literal> literals_by_name(const Clause& c) {
  std::vector<Literal> lits(c.literals().begin(), c.literals().end());
  std::sort(lits.begin(), lits.end(), [](Literal a, Literal b) {
    const auto& na = a.variable().name();
    const auto& nb = b.variable().name();
    return na != nb ? na < nb : a.positive() > b.positive();
  });
  return lits;
}

std::string to_string(const Clause& c) {
  if (c.empty()) return "[]";
  std::string out;
  for (Literal l : literals_by_name(c)) {
    if (!out.empty()) out += " | ";
    out += to_string(l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Set-of-support resolution rooted at q

ClauseSet resolvent_set(Literal q, const Theory& theory, const ResourceLimits& limits) {
  if (!theory.has_variable(q.variable())) {
    throw InputError("variable " + q.variable().name() + " is not in the theory vocabulary");
  }
  return resolvent_set(q, theory.clauses(), limits);
}

ClauseSet resolvent_set(Literal q, const ClauseSet& theory, const ResourceLimits& limits) {
  detail::Budget budget(limits);

  std::unordered_map<std::uint32_t, std::vector<const Clause*>> side_occ;
  for (const Clause& c : theory) {
    if (c.is_tautology()) continue;
    for (Literal l : c.literals()) side_occ[l.code()].push_back(&c);
  }

  detail::ClauseStore support;
  std::vector<char> processed;
  std::deque<std::uint32_t> queue;
  const Clause root = Clause::unit(q);
  queue.push_back(static_cast<std::uint32_t>(support.add(root)));
  processed.push_back(0);

  bool refuted = false;
  auto consider = [&](Clause r) {
    if (r.is_tautology() || support.forward_subsumed(r)) return;
    if (r.empty()) refuted = true;
    support.remove_subsumed_by(r);
    queue.push_back(static_cast<std::uint32_t>(support.add(std::move(r))));
    processed.push_back(0);
    budget.charge(support.alive_count());
  };

  while (!queue.empty() && !refuted) {
    const std::uint32_t given = queue.front();
    queue.pop_front();
    if (!support.alive(given)) continue;
    processed[given] = 1;
    const Clause g = support.clause(given);
    for (Literal l : g.literals()) {
      const Literal opp = l.complement();
      if (auto it = side_occ.find(opp.code()); it != side_occ.end()) {
        for (const Clause* side : it->second) {
          consider(g.without(l) | side->without(opp));
          if (refuted) break;
        }
      }
      if (refuted) break;
      for (std::uint32_t idx : support.occurrences(opp)) {
        if (!processed[idx] || !support.alive(idx)) continue;
        consider(g.without(l) | support.clause(idx).without(opp));
        if (refuted) break;
      }
      if (refuted) break;
      if (!support.alive(given)) break;
    }
  }

  // Derivations through q can still land on clauses the theory entails by
  // itself; those are not proper and are dropped.
  ClauseSet out;
  if (refuted) {
    if (is_satisfiable(theory)) out.insert(Clause{});
    return out;
  }
  for (const Clause& c : support.alive_clauses()) {
    if (c != root && !entails(theory, c)) out.insert(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prime implicates

namespace {

// Tison's consensus method: resolve once upon every variable in turn, keeping
// the working set free of tautologies and subsumed clauses. When `fresh_from`
// is set, clauses below that index form a set already closed under
// consensus, so pairs made only of such clauses are skipped.
ClauseSet tison(std::vector<Clause> input, std::size_t fresh_from, const ResourceLimits& limits) {
  detail::Budget budget(limits);
  detail::ClauseStore store;
  std::vector<char> fresh;

  // Insert smaller clauses first so forward subsumption catches most cases.
  std::vector<std::size_t> order(input.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return input[a].size() < input[b].size(); });
  for (std::size_t i : order) {
    Clause& c = input[i];
    if (c.is_tautology() || store.forward_subsumed(c)) continue;
    if (c.empty()) return ClauseSet{Clause{}};
    store.remove_subsumed_by(c);
    store.add(std::move(c));
    fresh.push_back(i >= fresh_from ? 1 : 0);
  }

  std::set<Variable> vars;
  for (const Clause& c : store.alive_clauses()) {
    for (Literal l : c.literals()) vars.insert(l.variable());
  }

  for (Variable v : vars) {
    const Literal p = Literal::pos(v);
    const Literal n = Literal::neg(v);
    const std::vector<std::uint32_t> pos = store.occurrences(p);
    const std::vector<std::uint32_t> neg = store.occurrences(n);
    for (std::uint32_t a : pos) {
      for (std::uint32_t b : neg) {
        if (!store.alive(a)) break;
        if (!store.alive(b)) continue;
        if (!fresh[a] && !fresh[b]) continue;
        const Clause& ca = store.clause(a);
        const Clause& cb = store.clause(b);
        Clause r = ca.without(p) | cb.without(n);
        if (r.is_tautology() || store.forward_subsumed(r)) continue;
        if (r.empty()) return ClauseSet{Clause{}};
        store.remove_subsumed_by(r);
        store.add(std::move(r));
        fresh.push_back(1);
        budget.charge(store.alive_count());
      }
    }
  }

  ClauseSet out;
  for (const Clause& c : store.alive_clauses()) out.insert(c);
  return out;
}

}  // namespace

ClauseSet prime_implicates(const ClauseSet& clauses, const ResourceLimits& limits) {
  return tison(std::vector<Clause>(clauses.begin(), clauses.end()), 0, limits);
}

ClauseSet proper_prime_implicates_from(const Clause& q, const ClauseSet& theory_primes,
                                       const ResourceLimits& limits) {
  std::vector<Clause> input(theory_primes.begin(), theory_primes.end());
  const std::size_t fresh_from = input.size();
  input.push_back(q);
  const ClauseSet with_q = tison(std::move(input), fresh_from, limits);

  detail::ClauseStore base;
  for (const Clause& c : theory_primes) base.add(c);
  ClauseSet out;
  for (const Clause& c : with_q) {
    if (!base.forward_subsumed(c)) out.insert(c);
  }
  return out;
}

ClauseSet proper_prime_implicates_oracle(const Clause& q, const ClauseSet& theory,
                                         const ResourceLimits& limits) {
  return proper_prime_implicates_from(q, prime_implicates(theory, limits), limits);
}

// ---------------------------------------------------------------------------
// Satisfiability

namespace {

// Conflict-driven clause learning: two watched literals, first-UIP learnt
// clauses with backjumping, activity-ordered decisions and phase saving.
class Cdcl {
 public:
  Cdcl(const ClauseSet& clauses, std::span<const Literal> assumptions) {
    for (const Clause& c : clauses) {
      if (c.is_tautology()) continue;
      std::vector<int> lits;
      for (Literal l : c.literals()) lits.push_back(encode(l));
      add_input(std::move(lits));
    }
    for (Literal l : assumptions) add_input({encode(l)});
  }

  bool solve() {
    if (inconsistent_) return false;
    for (int lit : units_) {
      if (value(lit) == 0) return false;
      if (value(lit) < 0) assign(lit, -1);
    }
    for (int v = 0; v < static_cast<int>(value_.size()); ++v) order_.push({0.0, v});
    std::size_t conflicts = 0;
    while (true) {
      const int conflict = propagate();
      if (conflict >= 0) {
        ++conflicts;
        if (level() == 0) return false;
        auto [learnt, back] = analyze(conflict);
        backtrack(back);
        if (learnt.size() == 1) {
          assign(learnt[0], -1);
        } else {
          const int idx = static_cast<int>(clauses_.size());
          clauses_.push_back(std::move(learnt));
          watch(idx);
          assign(clauses_[idx][0], idx);
        }
        decay_ *= 1.05;
        continue;
      }
      if (conflicts >= next_restart_) {
        next_restart_ += 100 * luby(++restarts_);
        backtrack(0);
      }
      const int v = pick();
      if (v < 0) return true;
      limits_.push_back(trail_.size());
      assign(2 * v + (phase_[v] ? 0 : 1), -1);
    }
  }

 private:
  int encode(Literal l) {
    auto [it, inserted] = index_.try_emplace(l.variable().id(), static_cast<int>(value_.size()));
    if (inserted) {
      value_.push_back(-1);
      level_.push_back(0);
      reason_.push_back(-1);
      activity_.push_back(0);
      phase_.push_back(0);
      seen_.push_back(0);
      watches_.resize(2 * value_.size());
    }
    return 2 * it->second + (l.positive() ? 0 : 1);
  }

  void add_input(std::vector<int> lits) {
    if (lits.empty()) {
      inconsistent_ = true;
    } else if (lits.size() == 1) {
      units_.push_back(lits[0]);
    } else {
      const int idx = static_cast<int>(clauses_.size());
      clauses_.push_back(std::move(lits));
      watch(idx);
    }
  }

  void watch(int idx) {
    watches_[clauses_[idx][0]].push_back(idx);
    watches_[clauses_[idx][1]].push_back(idx);
  }

  // 1 true, 0 false, -1 unassigned
  int value(int lit) const {
    const int v = value_[lit >> 1];
    return v < 0 ? -1 : ((lit & 1) ? 1 - v : v);
  }
  int level() const { return static_cast<int>(limits_.size()); }

  void assign(int lit, int reason) {
    const int v = lit >> 1;
    value_[v] = (lit & 1) ? 0 : 1;
    level_[v] = level();
    reason_[v] = reason;
    trail_.push_back(lit);
  }

  // Index of a falsified clause, or -1.
  int propagate() {
    while (head_ < trail_.size()) {
      const int falsified = trail_[head_++] ^ 1;
      auto& ws = watches_[falsified];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const int idx = ws[i];
        auto& c = clauses_[idx];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (value(c[0]) == 1) {
          ws[keep++] = idx;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches_[c[1]].push_back(idx);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = idx;
        if (value(c[0]) == 0) {
          for (std::size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
          ws.resize(keep);
          return idx;
        }
        assign(c[0], idx);
      }
      ws.resize(keep);
    }
    return -1;
  }

  void bump(int v) {
    activity_[v] += decay_;
    if (activity_[v] > 1e100) {
      for (double& a : activity_) a *= 1e-100;
      decay_ *= 1e-100;
      order_ = {};
      for (int u = 0; u < static_cast<int>(value_.size()); ++u) order_.push({activity_[u], u});
    } else {
      order_.push({activity_[v], v});
    }
  }

  std::pair<std::vector<int>, int> analyze(int conflict) {
    std::vector<int> learnt{0};
    int pending = 0;
    int lit = -1;
    std::size_t i = trail_.size();
    int idx = conflict;
    do {
      for (int q : clauses_[idx]) {
        if (q == lit) continue;
        const int v = q >> 1;
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = 1;
        bump(v);
        if (level_[v] == level()) {
          ++pending;
        } else {
          learnt.push_back(q);
        }
      }
      while (!seen_[trail_[--i] >> 1]) {
      }
      lit = trail_[i];
      seen_[lit >> 1] = 0;
      idx = reason_[lit >> 1];
      --pending;
    } while (pending > 0);
    learnt[0] = lit ^ 1;
    int back = 0;
    std::size_t second = 0;
    for (std::size_t k = 1; k < learnt.size(); ++k) {
      seen_[learnt[k] >> 1] = 0;
      if (level_[learnt[k] >> 1] > back) {
        back = level_[learnt[k] >> 1];
        second = k;
      }
    }
    if (second) std::swap(learnt[1], learnt[second]);
    return {std::move(learnt), back};
  }

  void backtrack(int to) {
    if (level() <= to) return;
    const std::size_t stop = limits_[to];
    for (std::size_t i = trail_.size(); i-- > stop;) {
      const int v = trail_[i] >> 1;
      phase_[v] = static_cast<char>(value_[v]);
      value_[v] = -1;
      reason_[v] = -1;
      order_.push({activity_[v], v});
    }
    trail_.resize(stop);
    limits_.resize(to);
    head_ = stop;
  }

  int pick() {
    while (!order_.empty()) {
      const auto [a, v] = order_.top();
      order_.pop();
      if (value_[v] < 0) return v;
    }
    return -1;
  }

  static std::size_t luby(std::size_t i) {
    std::size_t size = 1, seq = 0;
    while (size < i + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != i) {
      size = (size - 1) >> 1;
      --seq;
      i = i % size;
    }
    return std::size_t{1} << seq;
  }

  std::unordered_map<std::uint32_t, int> index_;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int> units_;
  bool inconsistent_ = false;

  std::vector<int> value_, level_, reason_;
  std::vector<double> activity_;
  std::vector<char> phase_, seen_;
  std::vector<int> trail_;
  std::vector<std::size_t> limits_;
  std::size_t head_ = 0;
  double decay_ = 1.0;
  std::size_t restarts_ = 0, next_restart_ = 100;
  std::priority_queue<std::pair<double, int>> order_;
};

}  // namespace

bool is_satisfiable(const ClauseSet& clauses, std::span<const Literal> assumptions) {
  return Cdcl(clauses, assumptions).solve();
}

bool entails(const ClauseSet& clauses, const Clause& c) {
  if (c.is_tautology()) return true;
  std::vector<Literal> negated;
  for (Literal l : c.literals()) negated.push_back(l.complement());
  return !is_satisfiable(clauses, negated);
}

}  // namespace p2pcf

std::size_t std::hash<p2pcf::Clause>::operator()(const p2pcf::Clause& c) const noexcept {
  std::size_t h = 0xcbf29ce484222325ull;
  for (p2pcf::Literal l : c.literals()) {
    h ^= l.code();
    h *= 0x100000001b3ull;
  }
  return h;
}
