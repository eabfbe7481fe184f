#pragma once

#include <vector>

#include "p2pcf/graph.hpp"
#include "p2pcf/history.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf {

// The clauses peer p reasons with inside the branch `hist`: p's theory
// without the clauses ~l | c that p already branched on in this history, plus
// the branch assumptions l (for entries whose clause differs from l and
// whose variable p knows).
ClauseSet local_theory(PeerId p, const History& hist, const AcquaintanceGraph& g);

// {q} together with the proper resolvents of q w.r.t. local_theory(p, hist).
ClauseSet local_consequences(Literal q, PeerId p, const History& hist,
                             const AcquaintanceGraph& g, const ResourceLimits& limits = {});

// Single-process consequence finding: RCFH(q, {p}, empty history).
// Throws InputError for an unknown peer, a variable outside p's vocabulary,
// or a graph whose edges disagree on target status.
ClauseSet rcf(Literal q, PeerId p, const AcquaintanceGraph& g, const ResourceLimits& limits = {});

// Consequences of q computed by the peers `sp` along the branch `hist`.
// Results are deduplicated but not minimized.
ClauseSet rcfh(Literal q, const std::vector<PeerId>& sp, const History& hist,
               const AcquaintanceGraph& g, const ResourceLimits& limits = {});

// Clause input: per-literal rcf answers combined with distribute, dropping
// tautologies.
ClauseSet rcf_clause(const Clause& c, PeerId p, const AcquaintanceGraph& g,
                     const ResourceLimits& limits = {});

// Centralized reference: the proper prime implicates of c with respect to the
// union of all theories, restricted to the union of the target languages.
ClauseSet target_consequences(const Clause& c, const AcquaintanceGraph& g,
                              const ResourceLimits& limits = {});

}  // namespace p2pcf
