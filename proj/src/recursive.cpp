#include "p2pcf/recursive.hpp"

#include <algorithm>

#include "p2pcf/error.hpp"

namespace p2pcf {

ClauseSet local_theory(PeerId p, const History& hist, const AcquaintanceGraph& g) {
  const PeerInfo& info = g.peer(p);
  ClauseSet out = info.theory.clauses();
  for (const auto& e : hist) {
    if (!e.clause || *e.clause == Clause::unit(e.literal)) continue;
    if (e.peer == p) out.erase(Clause::unit(e.literal.complement()) | *e.clause);
    if (info.theory.has_variable(e.literal.variable())) out.insert(Clause::unit(e.literal));
  }
  return out;
}

ClauseSet local_consequences(Literal q, PeerId p, const History& hist,
                             const AcquaintanceGraph& g, const ResourceLimits& limits) {
  if (!g.peer(p).theory.has_variable(q.variable())) {
    throw InputError("variable " + q.variable().name() + " is not in the vocabulary of " +
                     p.name());
  }
  ClauseSet out = resolvent_set(q, local_theory(p, hist, g), limits);
  if (!out.contains(Clause{})) out.insert(Clause::unit(q));
  return out;
}

ClauseSet rcf(Literal q, PeerId p, const AcquaintanceGraph& g, const ResourceLimits& limits) {
  if (!g.target_consistent()) {
    throw InputError("graph edges disagree on target status; run `check` for details");
  }
  if (!g.peer(p).theory.has_variable(q.variable())) {
    throw InputError("variable " + q.variable().name() + " is not in the vocabulary of " +
                     p.name());
  }
  return rcfh(q, {p}, History{}, g, limits);
}

ClauseSet rcfh(Literal q, const std::vector<PeerId>& sp, const History& hist,
               const AcquaintanceGraph& g, const ResourceLimits& limits) {
  // (1)
  bool all_seen = true;
  for (PeerId p : sp) {
    if (local_theory(p, hist, g).contains(Clause::unit(q))) return {};
    all_seen = all_seen && hist.contains(q, p);
  }
  if (all_seen) return {};
  // (2)
  if (hist.contains_literal(q.complement())) return {Clause{}};

  // (3)-(5)
  struct Local {
    PeerId peer;
    Clause c, shared, rest;
  };
  std::vector<Local> locals;
  for (PeerId p : sp) {
    // A peer that already handled q on this branch contributes nothing, as
    // in the message-passing version; otherwise a cycle through it can
    // repeat forever while another member of SP stays unvisited.
    if (hist.contains(q, p)) continue;
    const ClauseSet cons = local_consequences(q, p, hist, g, limits);
    if (cons.contains(Clause{})) return {Clause{}};
    for (const Clause& c : cons) {
      auto [s, l] = split_shared(c, p, g);
      if (g.in_target_language(p, l)) locals.push_back({p, c, std::move(s), std::move(l)});
    }
  }

  // (6)-(8)
  ClauseSet result;
  for (const Local& x : locals) {
    if (g.in_target_language(x.peer, x.shared)) result.insert(x.c);
  }
  // (9)-(14)
  for (const Local& x : locals) {
    if (x.shared.empty()) continue;
    const History next = hist.push({q, x.peer, x.c});
    std::vector<ClauseSet> answers;
    bool dead = false;
    for (Literal l : x.shared.literals()) {
      answers.push_back(rcfh(l, acq(l, x.peer, g), next, g, limits));
      if (answers.back().empty()) {
        dead = true;
        break;
      }
    }
    if (dead) continue;
    answers.push_back({x.rest});
    for (const Clause& r : distribute(answers)) {
      if (!r.is_tautology()) result.insert(r);
    }
  }
  return result;
}

ClauseSet rcf_clause(const Clause& c, PeerId p, const AcquaintanceGraph& g,
                     const ResourceLimits& limits) {
  std::vector<ClauseSet> parts;
  for (Literal l : c.literals()) parts.push_back(rcf(l, p, g, limits));
  ClauseSet out;
  for (const Clause& r : distribute(parts)) {
    if (!r.is_tautology()) out.insert(r);
  }
  return out;
}

ClauseSet target_consequences(const Clause& c, const AcquaintanceGraph& g,
                              const ResourceLimits& limits) {
  const auto targets = g.all_targets();
  ClauseSet out;
  for (const Clause& r : proper_prime_implicates_oracle(c, g.union_clauses(), limits)) {
    if (std::all_of(r.literals().begin(), r.literals().end(),
                    [&](Literal l) { return targets.contains(l.variable()); })) {
      out.insert(r);
    }
  }
  return out;
}

}  // namespace p2pcf
