#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "p2pcf/logic.hpp"

namespace p2pcf {

// Interned peer name. The default value is the User endpoint, which is not
// a peer of any graph.
class PeerId {
 public:
  PeerId() = default;
  static PeerId named(std::string_view name);
  static PeerId user() { return PeerId(); }

  bool is_user() const { return id_ == 0; }
  std::uint32_t id() const { return id_; }
  // "User" for the User endpoint.
  const std::string& name() const;

  friend auto operator<=>(PeerId, PeerId) = default;

 private:
  explicit PeerId(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

struct Edge {
  Variable label;
  PeerId a, b;  // a < b

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct PeerInfo {
  Theory theory;
  std::set<Variable> targets;
};

class AcquaintanceGraph {
 public:
  // Throws InputError on a duplicate peer, a target outside the vocabulary,
  // or the User id.
  void add_peer(PeerId p, Theory theory, std::set<Variable> targets = {});
  // Throws InputError unless both peers exist, differ, and have v in their
  // vocabularies. Duplicate edges are ignored.
  void add_edge(Variable v, PeerId a, PeerId b);

  bool has_peer(PeerId p) const { return peers_.contains(p); }
  const PeerInfo& peer(PeerId p) const;
  // Sorted by name.
  std::vector<PeerId> peers() const;
  std::size_t peer_count() const { return peers_.size(); }
  const std::set<Edge>& edges() const { return edges_; }

  // Peers sharing v with p through a declared edge, sorted by name.
  const std::vector<PeerId>& acquaintances(PeerId p, Variable v) const;
  std::vector<PeerId> neighbors(PeerId p) const;
  bool is_shared(PeerId p, Variable v) const { return !acquaintances(p, v).empty(); }
  bool is_target(PeerId p, Variable v) const { return peer(p).targets.contains(v); }
  bool in_target_language(PeerId p, const Clause& c) const;

  // Edges whose label is target at one endpoint only.
  std::vector<Edge> target_inconsistencies() const;
  bool target_consistent() const { return inconsistent_edges_ == 0; }

  ClauseSet union_clauses() const;
  std::set<Variable> all_targets() const;

 private:
  std::map<PeerId, PeerInfo> peers_;
  std::set<Edge> edges_;
  std::unordered_map<std::uint64_t, std::vector<PeerId>> acq_;  // (peer, var) key
  std::size_t inconsistent_edges_ = 0;
};

// The set of peers sharing l's variable with p. Throws InputError for an
// unknown peer.
std::vector<PeerId> acq(Literal l, PeerId p, const AcquaintanceGraph& g);

// (S(c), L(c)): the literals of c that are shared by p with some
// acquaintance, and the rest. Throws InputError for an unknown peer or a
// variable outside p's vocabulary.
std::pair<Clause, Clause> split_shared(const Clause& c, PeerId p, const AcquaintanceGraph& g);

struct PathPropertyReport {
  bool holds = true;
  std::vector<Edge> witnesses;  // (v, A, B) with no v-labelled path from A to B
};

// Every two peers sharing a vocabulary variable v must be connected by a
// path of v-labelled edges.
PathPropertyReport check_path_property(const AcquaintanceGraph& g);

// Manifest: `peer <id> <theory-file>` and `edge <var> <peer> <peer>` lines,
// theory-file paths relative to the manifest's directory.
AcquaintanceGraph load_manifest(const std::filesystem::path& manifest);
// Writes manifest.txt plus one <peer>.theory file per peer into `dir`.
// Returns the manifest path.
std::filesystem::path write_manifest(const AcquaintanceGraph& g, const std::filesystem::path& dir);
std::string serialize_manifest(const AcquaintanceGraph& g);

}  // namespace p2pcf

template <>
struct std::hash<p2pcf::PeerId> {
  std::size_t operator()(p2pcf::PeerId p) const noexcept { return p.id(); }
};
