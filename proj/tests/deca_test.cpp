#include <gtest/gtest.h>

#include <algorithm>

#include "p2pcf/deca.hpp"
#include "p2pcf/error.hpp"
#include "p2pcf/recursive.hpp"
#include "fixtures.hpp"
#include "random_network.hpp"

using namespace p2pcf;
using namespace p2pcf::testing;

namespace {

const PeerId P1 = PeerId::named("P1"), P2 = PeerId::named("P2"), P3 = PeerId::named("P3"),
             P4 = PeerId::named("P4"), User = PeerId::user();

bool has(const std::vector<Message>& out, MessageKind kind, PeerId to, const std::string& payload) {
  return std::any_of(out.begin(), out.end(), [&](const Message& m) {
    return m.kind == kind && m.receiver == to && payload_string(m) == payload;
  });
}

std::size_t count(const std::vector<Message>& out, MessageKind kind) {
  return static_cast<std::size_t>(
      std::count_if(out.begin(), out.end(), [&](const Message& m) { return m.kind == kind; }));
}

History split_of(const Clause& c) { return History{}.push({lit("Far"), P1, c}); }

TEST(HandleForth, TourFirstStep) {
  PeerRuntime p1(P1, tour_graph());
  const auto out = p1.handle(Message::forth(User, P1, {}, lit("Far")));
  EXPECT_TRUE(has(out, MessageKind::forth, P2, "Int"));
  EXPECT_TRUE(has(out, MessageKind::forth, P4, "Chile"));
  EXPECT_TRUE(has(out, MessageKind::forth, P3, "Kenya"));
  EXPECT_TRUE(has(out, MessageKind::forth, P4, "Kenya"));
  EXPECT_TRUE(has(out, MessageKind::back, User, "Exp"));
  for (const Message& m : out) {
    if (m.kind == MessageKind::forth && m.literal == lit("Int")) EXPECT_EQ(m.hist, split_of(cl({"Int"})));
  }
  EXPECT_EQ(count(out, MessageKind::final), 0u);
  EXPECT_EQ(p1.open_activations(), 1u);
  EXPECT_EQ(p1.open_split_points(), 2u);
  EXPECT_EQ(p1.pending_finals(), 4u);
}

TEST(HandleForth, ComplementInHistoryClosesBranch) {
  PeerRuntime p1(P1, tour_graph());
  const History h = History{}.push({lit("-Kenya"), P4, cl({"-Kenya"})});
  const auto out = p1.handle(Message::forth(P4, P1, h, lit("Kenya")));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(has(out, MessageKind::back, P4, "[]"));
  EXPECT_EQ(count(out, MessageKind::final), 1u);
  EXPECT_EQ(p1.open_activations(), 0u);
}

TEST(HandleForth, LiteralAlreadyInTheoryGivesOnlyFinal) {
  AcquaintanceGraph g;
  g.add_peer(PeerId::named("solo"), Theory({cl({"sq"}), cl({"-sq", "sr"})}), {Variable::named("sr")});
  PeerRuntime solo(PeerId::named("solo"), g);
  const auto out = solo.handle(Message::forth(User, PeerId::named("solo"), {}, lit("sq")));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].kind, MessageKind::final);
  EXPECT_EQ(out[0].back_count, 0u);
}

TEST(HandleForth, UnknownVariableIsRejected) {
  PeerRuntime p1(P1, tour_graph());
  EXPECT_THROW(p1.handle(Message::forth(User, P1, {}, lit("Hotel"))), InputError);
}

TEST(HandleBack, RecombinesWithSiblingConsequences) {
  PeerRuntime p1(P1, tour_graph());
  p1.handle(Message::forth(User, P1, {}, lit("Far")));
  const History split = split_of(cl({"Chile", "Kenya"}));
  ASSERT_NE(p1.cons(lit("Chile"), split), nullptr);

  // Chile's answer arrives first; Kenya has nothing yet so nothing is sent.
  auto out = p1.handle(Message::back(P4, P1, split.push({lit("Chile"), P4, cl({"Hotel"})}), cl({"Hotel"})));
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(*p1.cons(lit("Chile"), split), ClauseSet{cl({"Hotel"})});

  out = p1.handle(Message::back(P3, P1, split.push({lit("Kenya"), P3, cl({"YellowFev"})}), cl({"YellowFev"})));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].kind, MessageKind::back);
  EXPECT_EQ(out[0].receiver, User);
  EXPECT_EQ(out[0].clause, cl({"Hotel", "YellowFev"}));
  EXPECT_EQ(out[0].hist, split);
}

TEST(HandleBack, EmptyClauseCombinesToTheSiblingAnswer) {
  // P3 branching on -Lodge | Palu after Kenya: Lodge's branch closes with
  // [] and Palu is seeded, so the combination is Palu.
  PeerRuntime p3(P3, tour_graph());
  const History up = split_of(cl({"Chile", "Kenya"}));
  const auto first = p3.handle(Message::forth(P1, P3, up, lit("Kenya")));
  const History split = up.push({lit("Kenya"), P3, cl({"-Lodge", "Palu"})});
  ASSERT_NE(p3.cons(lit("-Lodge"), split), nullptr);
  EXPECT_TRUE(has(first, MessageKind::forth, P4, "-Lodge"));
  const auto out = p3.handle(Message::back(P4, P3, split.push({lit("-Lodge"), P4, Clause{}}), Clause{}));
  EXPECT_TRUE(has(out, MessageKind::back, P1, "Palu"));
}

TEST(HandleFinal, LastFinalClosesActivation) {
  PeerRuntime p3(P3, tour_graph());
  const History up = split_of(cl({"Chile", "Kenya"}));
  p3.handle(Message::forth(P1, P3, up, lit("Kenya")));
  const History split = up.push({lit("Kenya"), P3, cl({"-Lodge", "Palu"})});
  // -Lodge and Palu each wait on P4, and the unit Kenya on P1.
  EXPECT_EQ(p3.pending_finals(), 3u);
  const History kenya = up.push({lit("Kenya"), P3, cl({"Kenya"})});
  auto out = p3.handle(Message::final(P1, P3, kenya.push({lit("Kenya"), P1, std::nullopt}), 0));
  EXPECT_TRUE(out.empty());
  out = p3.handle(Message::final(P4, P3, split.push({lit("-Lodge"), P4, std::nullopt}), 0));
  EXPECT_TRUE(out.empty());
  out = p3.handle(Message::final(P4, P3, split.push({lit("Palu"), P4, std::nullopt}), 0));
  ASSERT_EQ(count(out, MessageKind::final), 1u);
  EXPECT_EQ(out.back().receiver, P1);
  EXPECT_EQ(p3.open_split_points(), 0u);
  EXPECT_EQ(p3.open_activations(), 0u);
  EXPECT_EQ(p3.cons(lit("Palu"), split), nullptr);
}

TEST(HandleFinal, RejectsUnknownSplitPointAndRepeatedFinal) {
  PeerRuntime p3(P3, tour_graph());
  const History up = split_of(cl({"Chile", "Kenya"}));
  const History split = up.push({lit("Kenya"), P3, cl({"-Lodge", "Palu"})});
  EXPECT_THROW(p3.handle(Message::final(P4, P3, split.push({lit("Palu"), P4, std::nullopt}), 0)), ProtocolError);
  p3.handle(Message::forth(P1, P3, up, lit("Kenya")));
  const Message fin = Message::final(P4, P3, split.push({lit("Palu"), P4, std::nullopt}), 1);
  p3.handle(fin);
  EXPECT_THROW(p3.handle(fin), ProtocolError);
  EXPECT_THROW(p3.handle(Message::back(P2, P3, split.push({lit("Palu"), P2, cl({"Palu"})}), cl({"Palu"}))),
               ProtocolError);
}

TEST(Ask, AllLocalConsequencesTerminateRightAway) {
  AcquaintanceGraph g;
  const auto a = PeerId::named("loc");
  g.add_peer(a, Theory({cl({"-la", "lb"}), cl({"-lb", "lc"})}),
             {Variable::named("lb"), Variable::named("lc")});
  const auto out = DecaNetwork(g).ask(a, lit("la"), ScheduleConfig{});
  EXPECT_TRUE(out.terminated);
  EXPECT_EQ(minimize(ClauseSet(out.answers.begin(), out.answers.end())), (ClauseSet{cl({"lb"}), cl({"lc"})}));
  EXPECT_TRUE(out.quiescent_at_final);
  EXPECT_FALSE(out.answers_after_final);
}

TEST(Ask, QueryAlreadyInTheoryGivesNothing) {
  AcquaintanceGraph g;
  const auto a = PeerId::named("has");
  g.add_peer(a, Theory({cl({"hq"})}), {Variable::named("hq")});
  const auto out = DecaNetwork(g).ask(a, lit("hq"), ScheduleConfig{});
  EXPECT_TRUE(out.terminated);
  EXPECT_TRUE(out.answers.empty());
}

TEST(AskClause, SingleLiteralMatchesAsk) {
  DecaNetwork net(tour_graph());
  const auto one = net.ask(P1, lit("Far"), ScheduleConfig{3});
  const auto clause = net.ask_clause(P1, cl({"Far"}), ScheduleConfig{3});
  EXPECT_EQ(minimize(ClauseSet(one.answers.begin(), one.answers.end())),
            minimize(ClauseSet(clause.answers.begin(), clause.answers.end())));
}

TEST(AskClause, MatchesOracleOnSmallInstances) {
  for (std::uint64_t seed = 300; seed < 340; ++seed) {
    const auto net = random_network(seed);
    const auto& vocab = net.graph.peer(net.query_peer).theory.vocabulary();
    const Variable other = *std::next(vocab.begin(), static_cast<std::ptrdiff_t>(seed % vocab.size()));
    const Clause c{net.query, Literal(other, seed % 2 == 0)};
    const auto out = DecaNetwork(net.graph).ask_clause(net.query_peer, c, ScheduleConfig{seed});
    EXPECT_TRUE(out.terminated);
    for (const Clause& a : out.answers) EXPECT_FALSE(a.is_tautology());
    EXPECT_EQ(proper_minimal(ClauseSet(out.answers.begin(), out.answers.end()), net.graph),
              target_consequences(c, net.graph))
        << "seed " << seed;
  }
}

TEST(AskAsync, StreamsEveryAnswerThenCloses) {
  DecaNetwork net(tour_graph());
  auto handle = net.ask_async(P1, cl({"Far"}), ScheduleConfig{5});
  ClauseSet seen;
  while (auto c = handle.stream().next()) seen.insert(*c);
  const auto& out = handle.wait();
  EXPECT_TRUE(out.terminated);
  EXPECT_EQ(seen, ClauseSet(out.answers.begin(), out.answers.end()));
  EXPECT_EQ(minimize(seen), tour_expected());
}

TEST(Properties, AnswersAreSoundAndInTheTargetLanguage) {
  for (std::uint64_t seed = 400; seed < 460; ++seed) {
    const auto net = random_network(seed);
    const auto out = DecaNetwork(net.graph).ask(net.query_peer, net.query, ScheduleConfig{seed});
    ClauseSet premises = net.graph.union_clauses();
    premises.insert(Clause::unit(net.query));
    for (const Clause& a : out.answers) {
      EXPECT_TRUE(entails(premises, a)) << "seed " << seed << " " << to_string(a);
      for (Literal l : a.literals()) EXPECT_TRUE(net.graph.all_targets().contains(l.variable()));
    }
  }
}

TEST(Properties, ConcurrentWorkersGiveTheSameClosure) {
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    const auto net = random_network(seed);
    ScheduleConfig cfg;
    cfg.seed = seed;
    cfg.workers = 4;
    const auto par = DecaNetwork(net.graph).ask(net.query_peer, net.query, cfg);
    const auto ref = DecaNetwork(net.graph).ask(net.query_peer, net.query, ScheduleConfig{seed});
    EXPECT_TRUE(par.terminated);
    EXPECT_FALSE(par.answers_after_final);
    EXPECT_EQ(minimize(ClauseSet(par.answers.begin(), par.answers.end())),
              minimize(ClauseSet(ref.answers.begin(), ref.answers.end())));
  }
}

}  // namespace
