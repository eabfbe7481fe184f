#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "p2pcf/error.hpp"
#include "p2pcf/graph.hpp"
#include "p2pcf/theory_io.hpp"
#include "fixtures.hpp"
#include "random_network.hpp"

using namespace p2pcf;
using namespace p2pcf::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("p2pcf_io_" + name);
  fs::remove_all(dir);
  return dir;
}

const PeerId P1 = PeerId::named("P1"), P2 = PeerId::named("P2"), P3 = PeerId::named("P3"),
             P4 = PeerId::named("P4");

TEST(TheoryFile, ParsesDeclarationsClausesAndComments) {
  const auto t = parse_theory(
      "# header\n"
      "p tf1\n"
      "v ta target\n"
      "v tb   # trailing comment\n"
      "c ta -tb\n"
      "c tc\n"
      "c\n");
  EXPECT_EQ(t.peer, PeerId::named("tf1"));
  EXPECT_EQ(t.targets, std::set<Variable>{Variable::named("ta")});
  EXPECT_TRUE(t.theory.has_variable(Variable::named("tc")));
  EXPECT_EQ(t.theory.clauses(), (ClauseSet{cl({"ta", "-tb"}), cl({"tc"}), Clause{}}));
}

TEST(TheoryFile, RejectsMalformedLines) {
  EXPECT_THROW(parse_theory("v a\n"), InputError);
  EXPECT_THROW(parse_theory("p a\np b\n"), InputError);
  EXPECT_THROW(parse_theory("p a\nv x maybe\n"), InputError);
  EXPECT_THROW(parse_theory("p a\nz x\n"), InputError);
  EXPECT_THROW(parse_theory("p a\nc --x\n"), InputError);
  EXPECT_THROW(parse_literal("-"), InputError);
}

TEST(TheoryFile, TourFilesAreInCanonicalForm) {
  for (const char* peer : {"P1", "P2", "P3", "P4"}) {
    const auto path = data_path(std::string("tour/") + peer + ".theory");
    EXPECT_EQ(serialize_theory(read_theory(path)), slurp(path)) << peer;
  }
}

TEST(TheoryFile, RoundTripIsStable) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto net = random_network(seed);
    for (PeerId p : net.graph.peers()) {
      const TheoryFile f{p, net.graph.peer(p).theory, net.graph.peer(p).targets};
      const std::string text = serialize_theory(f);
      const TheoryFile back = parse_theory(text);
      EXPECT_EQ(back, f);
      EXPECT_EQ(serialize_theory(back), text);
    }
  }
}

TEST(Manifest, TourLoads) {
  const auto& g = tour_graph();
  EXPECT_EQ(g.peer_count(), 4u);
  EXPECT_EQ(g.edges().size(), 6u);
  EXPECT_TRUE(g.target_consistent());
}

TEST(Manifest, WriteThenLoadRoundTrips) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto net = random_network(seed);
    const auto dir = scratch("rt" + std::to_string(seed));
    const auto manifest = write_manifest(net.graph, dir);
    const auto back = load_manifest(manifest);
    EXPECT_EQ(serialize_manifest(back), serialize_manifest(net.graph));
    EXPECT_EQ(back.union_clauses(), net.graph.union_clauses());
    EXPECT_EQ(back.all_targets(), net.graph.all_targets());
    // A directory works as well.
    EXPECT_EQ(serialize_manifest(load_manifest(dir)), serialize_manifest(net.graph));
    fs::remove_all(dir);
  }
}

TEST(Manifest, RejectsBadInput) {
  const auto dir = scratch("bad");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  write("a.theory", "p ma\nv mx\n");
  write("b.theory", "p mb\nv my\n");
  EXPECT_THROW(load_manifest(write("m1.txt", "peer ma missing.theory\n")), InputError);
  EXPECT_THROW(load_manifest(write("m2.txt", "peer ma a.theory\nedge mx ma mb\n")), InputError);
  EXPECT_THROW(load_manifest(write("m3.txt", "peer ma a.theory\npeer mb b.theory\nedge mx ma mb\n")),
               InputError);
  EXPECT_THROW(load_manifest(write("m4.txt", "peer mb a.theory\n")), InputError);
  EXPECT_THROW(load_manifest(write("m5.txt", "frobnicate\n")), InputError);
  EXPECT_THROW(load_manifest(dir / "nope.txt"), InputError);
  fs::remove_all(dir);
}

TEST(Graph, Acquaintances) {
  const auto& g = tour_graph();
  EXPECT_EQ(acq(lit("Int"), P1, g), std::vector<PeerId>{P2});
  EXPECT_EQ(acq(lit("Kenya"), P1, g), (std::vector<PeerId>{P3, P4}));
  EXPECT_EQ(acq(lit("-Kenya"), P3, g), std::vector<PeerId>{P1});
  EXPECT_THROW(acq(lit("Int"), PeerId::named("P9"), g), InputError);

  AcquaintanceGraph lone;
  lone.add_peer(PeerId::named("g1"), Theory({cl({"gx"})}));
  EXPECT_TRUE(acq(lit("gx"), PeerId::named("g1"), lone).empty());
}

TEST(Graph, SplitShared) {
  const auto& g = tour_graph();
  EXPECT_EQ(split_shared(cl({"Chile", "Kenya"}), P1, g), std::pair(cl({"Chile", "Kenya"}), Clause{}));
  EXPECT_EQ(split_shared(cl({"-Lodge", "Palu"}), P3, g), std::pair(cl({"-Lodge", "Palu"}), Clause{}));
  EXPECT_EQ(split_shared(cl({"Exp", "Int"}), P1, g), std::pair(cl({"Int"}), cl({"Exp"})));
  EXPECT_THROW(split_shared(cl({"Hotel"}), P1, g), InputError);

  AcquaintanceGraph lone;
  lone.add_peer(PeerId::named("g2"), Theory({cl({"gy", "gz"})}));
  EXPECT_EQ(split_shared(cl({"gy", "gz"}), PeerId::named("g2"), lone), std::pair(Clause{}, cl({"gy", "gz"})));
}

TEST(Graph, EdgeAndPeerValidation) {
  AcquaintanceGraph g;
  const auto a = PeerId::named("ev1"), b = PeerId::named("ev2");
  g.add_peer(a, Theory({cl({"eva", "evs"})}));
  g.add_peer(b, Theory({cl({"evs"})}));
  EXPECT_THROW(g.add_peer(a, Theory{}), InputError);
  EXPECT_THROW(g.add_peer(PeerId::named("ev3"), Theory{}, {Variable::named("eva")}), InputError);
  EXPECT_THROW(g.add_edge(Variable::named("evs"), a, a), InputError);
  EXPECT_THROW(g.add_edge(Variable::named("eva"), a, b), InputError);
  EXPECT_THROW(g.add_edge(Variable::named("evs"), a, PeerId::named("ev9")), InputError);
  g.add_edge(Variable::named("evs"), a, b);
  g.add_edge(Variable::named("evs"), b, a);
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST(Graph, TargetConsistency) {
  AcquaintanceGraph g;
  const auto a = PeerId::named("tc1"), b = PeerId::named("tc2");
  g.add_peer(a, Theory({cl({"tcs"})}), {Variable::named("tcs")});
  g.add_peer(b, Theory({cl({"tcs"})}));
  g.add_edge(Variable::named("tcs"), a, b);
  EXPECT_FALSE(g.target_consistent());
  ASSERT_EQ(g.target_inconsistencies().size(), 1u);
  EXPECT_EQ(g.target_inconsistencies()[0].label, Variable::named("tcs"));
}

TEST(PathProperty, TourHolds) { EXPECT_TRUE(check_path_property(tour_graph()).holds); }

TEST(PathProperty, DisconnectedSharersFail) {
  AcquaintanceGraph g;
  const auto a = PeerId::named("pp1"), b = PeerId::named("pp2");
  g.add_peer(a, Theory({cl({"ppx"})}));
  g.add_peer(b, Theory({cl({"-ppx"})}));
  const auto r = check_path_property(g);
  EXPECT_FALSE(r.holds);
  ASSERT_EQ(r.witnesses.size(), 1u);
  EXPECT_EQ(r.witnesses[0].label, Variable::named("ppx"));
}

// Reference: two sharers of v are connected iff a breadth-first search over
// v-labelled edges reaches one from the other.
bool reference_path_property(const AcquaintanceGraph& g) {
  std::map<Variable, std::vector<PeerId>> holders;
  for (PeerId p : g.peers())
    for (Variable v : g.peer(p).theory.vocabulary()) holders[v].push_back(p);
  for (const auto& [v, ps] : holders) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::set<PeerId> seen{ps[i]};
      std::vector<PeerId> todo{ps[i]};
      while (!todo.empty()) {
        const PeerId x = todo.back();
        todo.pop_back();
        for (const Edge& e : g.edges()) {
          if (e.label != v) continue;
          for (auto [from, to] : {std::pair(e.a, e.b), std::pair(e.b, e.a)}) {
            if (from == x && seen.insert(to).second) todo.push_back(to);
          }
        }
      }
      for (PeerId q : ps)
        if (!seen.contains(q)) return false;
    }
  }
  return true;
}

TEST(PathProperty, AgreesWithSearchWhenEdgesAreRemoved) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto net = random_network(seed);
    AcquaintanceGraph g;
    for (PeerId p : net.graph.peers()) g.add_peer(p, net.graph.peer(p).theory, net.graph.peer(p).targets);
    std::size_t i = 0;
    for (const Edge& e : net.graph.edges()) {
      if (i++ % 3 != seed % 3) g.add_edge(e.label, e.a, e.b);
    }
    EXPECT_EQ(check_path_property(g).holds, reference_path_property(g)) << "seed " << seed;
    EXPECT_TRUE(check_path_property(net.graph).holds);
  }
}

}  // namespace
