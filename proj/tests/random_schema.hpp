#pragma once

// Small random schemas over at most 20 classes, so that truth-table checks
// stay cheap.

#include <random>
#include <string>
#include <vector>

#include "p2pcf/somewhere.hpp"

namespace p2pcf::testing {

struct RandomSchema {
  NetworkSchema schema;
  PeerId query_peer;
  ClassDescription query;
};

inline RandomSchema random_schema(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const std::string tag = "rs" + std::to_string(seed) + "p";

  const int n = pick(2, 4);
  std::vector<std::vector<Variable>> cls(n);
  RandomSchema out;
  for (int i = 0; i < n; ++i) {
    PeerSchema ps{PeerId::named(tag + std::to_string(i)), {}, {}, {}, {}, {}};
    const std::string self = ps.peer.name();
    const int k = pick(2, 3);
    for (int j = 0; j < k; ++j) {
      cls[i].push_back(Variable::named(self + ":C" + std::to_string(j)));
      ps.classes.insert(cls[i].back());
    }
    out.schema.peers.push_back(std::move(ps));
  }
  auto atom = [&](int peer) {
    return ClassDescription::named(cls[peer][pick(0, static_cast<int>(cls[peer].size()) - 1)]);
  };
  // An atom, or a small conjunction, disjunction or negation over `peers`.
  auto desc = [&](std::vector<int> peers) {
    auto a = [&] { return atom(peers[pick(0, static_cast<int>(peers.size()) - 1)]); };
    switch (pick(0, 5)) {
      case 0: return ClassDescription::all_of({a(), a()});
      case 1: return ClassDescription::any_of({a(), a()});
      case 2: return ClassDescription::complement(a());
      default: return a();
    }
  };

  for (int i = 0; i < n; ++i) {
    PeerSchema& ps = out.schema.peers[i];
    const int axioms = pick(1, 3);
    for (int j = 0; j < axioms; ++j) {
      const int kind = pick(0, 5);
      if (kind == 0) {
        ps.ontology.push_back({AxiomKind::disjointness, atom(i), atom(i)});
      } else if (kind == 1) {
        ps.ontology.push_back({AxiomKind::equivalence, atom(i), desc({i})});
      } else {
        ps.ontology.push_back({AxiomKind::inclusion, atom(i), desc({i})});
      }
    }
    const int views = pick(1, 2);
    for (int j = 0; j < views; ++j) {
      const Variable v = Variable::named(ps.peer.name() + ":View" + std::to_string(j));
      ps.views.push_back({v, chance(0.7) ? atom(i) : desc({i})});
    }
  }
  // A spanning tree of mappings plus an occasional extra one.
  auto add_mapping = [&](int at, int other) {
    PeerSchema& ps = out.schema.peers[at];
    const int kind = pick(0, 4);
    if (kind == 0) {
      ps.mappings.push_back({AxiomKind::equivalence, atom(at), atom(other)});
    } else if (kind == 1) {
      ps.mappings.push_back({AxiomKind::inclusion, desc({at, other}), atom(at)});
    } else if (kind == 2) {
      ps.mappings.push_back({AxiomKind::disjointness, atom(at), atom(other)});
    } else {
      ps.mappings.push_back({AxiomKind::inclusion, atom(other), desc({at, other})});
    }
  };
  for (int i = 1; i < n; ++i) {
    const int j = pick(0, i - 1);
    chance(0.5) ? add_mapping(i, j) : add_mapping(j, i);
  }
  if (n > 2 && chance(0.5)) add_mapping(pick(0, n - 1), pick(0, n - 1));

  const int qp = pick(0, n - 1);
  out.query_peer = out.schema.peers[qp].peer;
  out.query = chance(0.6) ? atom(qp) : desc({qp});
  return out;
}

}  // namespace p2pcf::testing
