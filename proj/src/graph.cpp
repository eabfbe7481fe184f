#include "p2pcf/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "p2pcf/error.hpp"
#include "p2pcf/theory_io.hpp"
#include "symbols.hpp"

namespace p2pcf {

namespace {

struct PeerTag {};
using PeerSymbols = detail::SymbolTable<PeerTag>;

std::uint64_t acq_key(PeerId p, Variable v) {
  return (static_cast<std::uint64_t>(p.id()) << 32) | v.id();
}

bool by_name(PeerId a, PeerId b) { return a.name() < b.name(); }

const std::vector<PeerId> kNoPeers;

}  // namespace

PeerId PeerId::named(std::string_view name) {
  if (name.empty() || name == "User") throw InputError("invalid peer id '" + std::string(name) + "'");
  return PeerId(PeerSymbols::instance().intern(name));
}

const std::string& PeerId::name() const {
  static const std::string user = "User";
  return id_ == 0 ? user : PeerSymbols::instance().name(id_);
}

void AcquaintanceGraph::add_peer(PeerId p, Theory theory, std::set<Variable> targets) {
  if (p.is_user()) throw InputError("the User endpoint cannot be a peer");
  if (peers_.contains(p)) throw InputError("duplicate peer " + p.name());
  for (Variable v : targets) {
    if (!theory.has_variable(v)) {
      throw InputError("target " + v.name() + " is not in the vocabulary of " + p.name());
    }
  }
  peers_.emplace(p, PeerInfo{std::move(theory), std::move(targets)});
}

void AcquaintanceGraph::add_edge(Variable v, PeerId a, PeerId b) {
  if (a == b) throw InputError("edge " + v.name() + " joins " + a.name() + " to itself");
  const PeerInfo& pa = peer(a);
  const PeerInfo& pb = peer(b);
  if (!pa.theory.has_variable(v) || !pb.theory.has_variable(v)) {
    throw InputError("edge variable " + v.name() + " must belong to both " + a.name() + " and " +
                     b.name());
  }
  if (b < a) std::swap(a, b);
  if (!edges_.insert(Edge{v, a, b}).second) return;
  for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
    auto& list = acq_[acq_key(from, v)];
    list.insert(std::upper_bound(list.begin(), list.end(), to, by_name), to);
  }
  if (pa.targets.contains(v) != pb.targets.contains(v)) ++inconsistent_edges_;
}

const PeerInfo& AcquaintanceGraph::peer(PeerId p) const {
  auto it = peers_.find(p);
  if (it == peers_.end()) throw InputError("unknown peer " + p.name());
  return it->second;
}

std::vector<PeerId> AcquaintanceGraph::peers() const {
  std::vector<PeerId> out;
  for (const auto& [id, info] : peers_) out.push_back(id);
  std::sort(out.begin(), out.end(), by_name);
  return out;
}

const std::vector<PeerId>& AcquaintanceGraph::acquaintances(PeerId p, Variable v) const {
  if (!peers_.contains(p)) throw InputError("unknown peer " + p.name());
  auto it = acq_.find(acq_key(p, v));
  return it == acq_.end() ? kNoPeers : it->second;
}

std::vector<PeerId> AcquaintanceGraph::neighbors(PeerId p) const {
  std::set<PeerId> seen;
  for (const Edge& e : edges_) {
    if (e.a == p) seen.insert(e.b);
    if (e.b == p) seen.insert(e.a);
  }
  std::vector<PeerId> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end(), by_name);
  return out;
}

bool AcquaintanceGraph::in_target_language(PeerId p, const Clause& c) const {
  const auto& targets = peer(p).targets;
  return std::all_of(c.literals().begin(), c.literals().end(),
                     [&](Literal l) { return targets.contains(l.variable()); });
}

std::vector<Edge> AcquaintanceGraph::target_inconsistencies() const {
  std::vector<Edge> out;
  for (const Edge& e : edges_) {
    if (is_target(e.a, e.label) != is_target(e.b, e.label)) out.push_back(e);
  }
  return out;
}

ClauseSet AcquaintanceGraph::union_clauses() const {
  ClauseSet out;
  for (const auto& [id, info] : peers_) out.insert(info.theory.clauses().begin(), info.theory.clauses().end());
  return out;
}

std::set<Variable> AcquaintanceGraph::all_targets() const {
  std::set<Variable> out;
  for (const auto& [id, info] : peers_) out.insert(info.targets.begin(), info.targets.end());
  return out;
}

std::vector<PeerId> acq(Literal l, PeerId p, const AcquaintanceGraph& g) {
  return g.acquaintances(p, l.variable());
}

std::pair<Clause, Clause> split_shared(const Clause& c, PeerId p, const AcquaintanceGraph& g) {
  const PeerInfo& info = g.peer(p);
  std::vector<Literal> shared, local;
  for (Literal l : c.literals()) {
    if (!info.theory.has_variable(l.variable())) {
      throw InputError("variable " + l.variable().name() + " is foreign to " + p.name());
    }
    (g.is_shared(p, l.variable()) ? shared : local).push_back(l);
  }
  return {Clause(std::move(shared)), Clause(std::move(local))};
}

PathPropertyReport check_path_property(const AcquaintanceGraph& g) {
  const auto peers = g.peers();
  std::map<Variable, std::vector<std::size_t>> holders;
  std::map<PeerId, std::size_t> index;
  for (std::size_t i = 0; i < peers.size(); ++i) {
    index[peers[i]] = i;
    for (Variable v : g.peer(peers[i]).theory.vocabulary()) holders[v].push_back(i);
  }
  std::map<Variable, std::vector<const Edge*>> by_label;
  for (const Edge& e : g.edges()) by_label[e.label].push_back(&e);

  PathPropertyReport report;
  std::vector<std::size_t> parent(peers.size());
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [v, who] : holders) {
    if (who.size() < 2) continue;
    for (std::size_t i : who) parent[i] = i;
    if (auto it = by_label.find(v); it != by_label.end()) {
      for (const Edge* e : it->second) parent[find(index[e->a])] = find(index[e->b]);
    }
    for (std::size_t x = 0; x < who.size(); ++x) {
      for (std::size_t y = x + 1; y < who.size(); ++y) {
        if (find(who[x]) != find(who[y])) {
          report.holds = false;
          report.witnesses.push_back(Edge{v, peers[who[x]], peers[who[y]]});
        }
      }
    }
  }
  return report;
}

std::string serialize_manifest(const AcquaintanceGraph& g) {
  std::string out;
  for (PeerId p : g.peers()) out += "peer " + p.name() + " " + p.name() + ".theory\n";
  std::vector<std::string> edges;
  for (const Edge& e : g.edges()) {
    auto [a, b] = std::minmax(e.a.name(), e.b.name());
    edges.push_back("edge " + e.label.name() + " " + a + " " + b);
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) out += e + "\n";
  return out;
}

std::filesystem::path write_manifest(const AcquaintanceGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (PeerId p : g.peers()) {
    const PeerInfo& info = g.peer(p);
    std::ofstream out(dir / (p.name() + ".theory"));
    out << serialize_theory(TheoryFile{p, info.theory, info.targets});
    if (!out) throw InputError("cannot write theory for " + p.name());
  }
  const auto manifest = dir / "manifest.txt";
  std::ofstream out(manifest);
  out << serialize_manifest(g);
  if (!out) throw InputError("cannot write " + manifest.string());
  return manifest;
}

AcquaintanceGraph load_manifest(const std::filesystem::path& manifest) {
  auto path = manifest;
  if (std::filesystem::is_directory(path)) path /= "manifest.txt";
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest " + path.string());
  const auto base = path.parent_path();

  AcquaintanceGraph g;
  std::vector<std::array<std::string, 3>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string kind;
    if (!(words >> kind)) continue;
    std::string x, y, z;
    auto fail = [&](const std::string& what) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (kind == "peer") {
      if (!(words >> x >> y) || (words >> z)) fail("expected 'peer <id> <theory-file>'");
      TheoryFile file = read_theory(base / y);
      if (file.peer != PeerId::named(x)) {
        fail("theory file " + y + " declares peer " + file.peer.name() + ", not " + x);
      }
      g.add_peer(file.peer, std::move(file.theory), std::move(file.targets));
    } else if (kind == "edge") {
      if (!(words >> x >> y >> z)) fail("expected 'edge <var> <peer> <peer>'");
      edges.push_back({x, y, z});
    } else {
      fail("unknown directive '" + kind + "'");
    }
  }
  for (const auto& [v, a, b] : edges) {
    g.add_edge(parse_literal(v).variable(), PeerId::named(a), PeerId::named(b));
  }
  return g;
}

}  // namespace p2pcf
