#pragma once

// Seeded small networks for differential testing. Every shared variable is
// held by a chain of peers joined by edges labelled with it, so the path
// property holds by construction.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "p2pcf/graph.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf::testing {

struct SmallNetwork {
  AcquaintanceGraph graph;
  PeerId query_peer;
  Literal query;
};

struct SmallNetworkParams {
  int min_peers = 4, max_peers = 8;
  int min_private = 2, max_private = 4;
  int min_clauses = 4, max_clauses = 8;
  int max_vocabulary = 12;
};

inline SmallNetwork random_network(std::uint64_t seed, const SmallNetworkParams& p = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double pr) { return std::bernoulli_distribution(pr)(rng); };
  const std::string tag = "n" + std::to_string(seed) + "_";

  const int np = uniform(p.min_peers, p.max_peers);
  std::vector<PeerId> peers;
  std::vector<std::vector<Variable>> vocab(np);
  std::vector<std::set<Variable>> targets(np);
  for (int i = 0; i < np; ++i) {
    peers.push_back(PeerId::named(tag + "P" + std::to_string(i)));
    const int priv = uniform(p.min_private, p.max_private);
    for (int j = 0; j < priv; ++j) {
      Variable v = Variable::named(tag + "p" + std::to_string(i) + "_" + std::to_string(j));
      vocab[i].push_back(v);
      if (coin(0.6)) targets[i].insert(v);
    }
  }
  const std::vector<std::size_t> private_count = [&] {
    std::vector<std::size_t> n;
    for (const auto& v : vocab) n.push_back(v.size());
    return n;
  }();

  // Spanning tree plus a few chords.
  std::vector<std::pair<int, int>> links;
  for (int i = 1; i < np; ++i) links.emplace_back(uniform(0, i - 1), i);
  for (int extra = uniform(0, 2); extra > 0; --extra) {
    int a = uniform(0, np - 1), b = uniform(0, np - 1);
    if (a != b) links.emplace_back(std::min(a, b), std::max(a, b));
  }

  std::vector<std::tuple<Variable, int, int>> edges;
  int shared = 0;
  auto room = [&](int i) { return static_cast<int>(vocab[i].size()) < p.max_vocabulary; };
  for (auto [a, b] : links) {
    for (int k = uniform(1, 2); k > 0; --k) {
      if (!room(a) || !room(b)) break;
      Variable v = Variable::named(tag + "s" + std::to_string(shared++));
      const bool target = coin(0.5);
      std::vector<int> holders{a, b};
      // Sometimes extend the variable one more hop along another link.
      if (coin(0.3)) {
        for (auto [c, d] : links) {
          int next = c == b && d != a ? d : (d == b && c != a ? c : -1);
          if (next >= 0 && room(next)) {
            holders.push_back(next);
            break;
          }
        }
      }
      for (std::size_t h = 0; h < holders.size(); ++h) {
        vocab[holders[h]].push_back(v);
        if (target) targets[holders[h]].insert(v);
        if (h > 0) edges.emplace_back(v, holders[h - 1], holders[h]);
      }
    }
  }

  // Clauses are kept only if a hidden assignment satisfies them, so the
  // union is satisfiable.
  std::map<Variable, bool> model;
  for (const auto& vs : vocab)
    for (Variable v : vs) model.try_emplace(v, coin(0.5));
  auto satisfied = [&](const Clause& c) {
    for (Literal l : c.literals())
      if (model[l.variable()] == l.positive()) return true;
    return false;
  };

  SmallNetwork net;
  for (int i = 0; i < np; ++i) {
    Theory t;
    for (Variable v : vocab[i]) t.add_variable(v);
    const int m = uniform(p.min_clauses, p.max_clauses);
    for (int tries = 0; static_cast<int>(t.clauses().size()) < m && tries < 100; ++tries) {
      const int len = coin(0.05) ? 1 : (coin(0.7) ? 2 : 3);
      // Favour clauses that touch a shared variable so reasoning crosses peers.
      std::vector<Literal> lits;
      const int size = static_cast<int>(vocab[i].size());
      const int first_shared = static_cast<int>(private_count[i]);
      for (int k = 0; k < len; ++k) {
        const bool pick_shared = k == 0 && first_shared < size && coin(0.6);
        const int idx = pick_shared ? uniform(first_shared, size - 1) : uniform(0, size - 1);
        lits.emplace_back(vocab[i][idx], coin(0.5));
      }
      Clause c(std::move(lits));
      if (!c.is_tautology() && static_cast<int>(c.size()) == len && satisfied(c)) t.add_clause(c);
    }
    net.graph.add_peer(peers[i], std::move(t), targets[i]);
  }
  for (auto [v, a, b] : edges) net.graph.add_edge(v, peers[a], peers[b]);

  const int qp = uniform(0, np - 1);
  net.query_peer = peers[qp];
  net.query = Literal(vocab[qp][uniform(0, static_cast<int>(vocab[qp].size()) - 1)], coin(0.5));
  return net;
}

// A chain q -> a1 -> ... -> ~q spread over 2-4 peers, with q's variable
// shared between the first and last peer, plus random satisfiable noise.
// union + {q} is unsatisfiable while the union itself is not.
inline SmallNetwork planted_unsat_network(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::string tag = "u" + std::to_string(seed) + "_";
  while (true) {
    const int np = uniform(2, 4);
    std::vector<PeerId> peers;
    std::vector<Theory> theories(np);
    std::vector<std::set<Variable>> targets(np);
    for (int i = 0; i < np; ++i) peers.push_back(PeerId::named(tag + "P" + std::to_string(i)));
    const Variable q = Variable::named(tag + "q");
    std::vector<Variable> link;  // link[i] joins peer i and i+1
    for (int i = 0; i + 1 < np; ++i) link.push_back(Variable::named(tag + "a" + std::to_string(i)));
    std::vector<std::tuple<Variable, int, int>> edges;
    // Peer 0: ~q | a0 ; peer i: ~a{i-1} | a{i} ; last: ~a{np-2} | ~q
    theories[0].add_clause(Clause{Literal::neg(q), Literal::pos(link[0])});
    for (int i = 1; i + 1 < np; ++i) {
      theories[i].add_clause(Clause{Literal::neg(link[i - 1]), Literal::pos(link[i])});
    }
    theories[np - 1].add_clause(Clause{Literal::neg(link[np - 2]), Literal::neg(q)});
    for (int i = 0; i + 1 < np; ++i) edges.emplace_back(link[i], i, i + 1);
    edges.emplace_back(q, 0, np - 1);
    for (int i = 0; i < np; ++i) {
      std::vector<Variable> vars;
      for (int j = 0; j < 4; ++j) {
        vars.push_back(Variable::named(tag + "p" + std::to_string(i) + "_" + std::to_string(j)));
        theories[i].add_variable(vars.back());
        if (j % 2 == 0) targets[i].insert(vars.back());
      }
      for (Variable v : theories[i].vocabulary()) {
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
      }
      for (int k = 0; k < 3; ++k) {
        Clause c{Literal(vars[uniform(0, 3)], uniform(0, 1) == 1),
                 Literal(vars[uniform(0, static_cast<int>(vars.size()) - 1)], uniform(0, 1) == 1)};
        if (!c.is_tautology()) theories[i].add_clause(c);
      }
    }
    theories[0].add_variable(q);
    theories[np - 1].add_variable(q);
    SmallNetwork net;
    for (int i = 0; i < np; ++i) net.graph.add_peer(peers[i], theories[i], targets[i]);
    for (auto [v, a, b] : edges) net.graph.add_edge(v, peers[a], peers[b]);
    if (!is_satisfiable(net.graph.union_clauses())) continue;
    net.query_peer = peers[0];
    net.query = Literal::pos(q);
    return net;
  }
}

}  // namespace p2pcf::testing
