#include <gtest/gtest.h>

#include <atomic>

#include "p2pcf/deca.hpp"
#include "p2pcf/transport.hpp"
#include "fixtures.hpp"

using namespace p2pcf;
using namespace p2pcf::testing;

namespace {

const PeerId A = PeerId::named("ta"), B = PeerId::named("tb");

ScheduleConfig unit_cost(std::uint64_t seed) {
  ScheduleConfig c;
  c.seed = seed;
  c.cost = CostModel::unit;
  return c;
}

Message ping(PeerId to, int n) { return Message::forth(PeerId::user(), to, {}, lit("tp" + std::to_string(n))); }

TEST(Fabric, SingleInjectIsDeliveredOnce) {
  Fabric f(unit_cost(0));
  int calls = 0;
  f.register_endpoint(A, [&](const Message&) {
    ++calls;
    return std::vector<Message>{};
  });
  EXPECT_TRUE(f.detect_quiescence());
  f.inject(ping(A, 0));
  EXPECT_FALSE(f.detect_quiescence());
  EXPECT_EQ(f.in_flight(), 1u);
  const auto r = f.run_until_quiescent();
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r.delivered, 1u);
  EXPECT_TRUE(f.detect_quiescence());
  EXPECT_EQ(f.now(), 1.0);
}

std::vector<std::string> delivery_order(DeliveryPolicy policy, std::uint64_t seed, int n) {
  ScheduleConfig c = unit_cost(seed);
  c.policy = policy;
  Fabric f(c);
  std::vector<std::string> order;
  f.register_endpoint(A, [&](const Message& m) {
    order.push_back(to_string(m.literal));
    return std::vector<Message>{};
  });
  for (int i = 0; i < n; ++i) f.inject(ping(A, i));
  f.run_until_quiescent();
  return order;
}

TEST(Fabric, SeedDeterminesOrder) {
  for (auto policy : {DeliveryPolicy::random, DeliveryPolicy::lifo, DeliveryPolicy::per_pair_fifo}) {
    EXPECT_EQ(delivery_order(policy, 7, 10), delivery_order(policy, 7, 10));
  }
  EXPECT_NE(delivery_order(DeliveryPolicy::random, 1, 10), delivery_order(DeliveryPolicy::random, 2, 10));
}

TEST(Fabric, PoliciesOrderAsNamed) {
  const auto fifo = delivery_order(DeliveryPolicy::per_pair_fifo, 3, 5);
  EXPECT_EQ(fifo, (std::vector<std::string>{"tp0", "tp1", "tp2", "tp3", "tp4"}));
  const auto lifo = delivery_order(DeliveryPolicy::lifo, 3, 5);
  EXPECT_EQ(lifo, (std::vector<std::string>{"tp4", "tp3", "tp2", "tp1", "tp0"}));
}

TEST(Fabric, NoBudgetNeverTimesOut) {
  Fabric f(unit_cost(0));
  int hops = 0;
  f.register_endpoint(A, [&](const Message& m) {
    EXPECT_FALSE(m.ttl.has_value());
    std::vector<Message> out;
    if (++hops < 1000) out.push_back(ping(A, hops));
    return out;
  });
  f.inject(ping(A, 0));
  const auto r = f.run_until_quiescent();
  EXPECT_EQ(r.delivered, 1000u);
  EXPECT_FALSE(r.timed_out);
}

TEST(Fabric, ZeroBudgetDropsEverythingInduced) {
  ScheduleConfig c = unit_cost(0);
  c.ttl_budget = 0;
  Fabric f(c);
  f.register_endpoint(A, [&](const Message&) { return std::vector<Message>{ping(B, 1), ping(B, 2)}; });
  f.register_endpoint(B, [&](const Message&) {
    ADD_FAILURE() << "dropped message was delivered";
    return std::vector<Message>{};
  });
  f.inject(ping(A, 0));
  const auto r = f.run_until_quiescent();
  EXPECT_EQ(r.delivered, 1u);
  EXPECT_EQ(r.dropped, 2u);
  EXPECT_TRUE(r.timed_out);
}

TEST(Fabric, BudgetBoundsChainLength) {
  ScheduleConfig c = unit_cost(0);
  c.ttl_budget = 5;
  Fabric f(c);
  f.register_endpoint(A, [&](const Message&) { return std::vector<Message>{ping(A, 0)}; });
  f.inject(ping(A, 0));
  const auto r = f.run_until_quiescent();
  EXPECT_EQ(r.delivered, 5u);
  EXPECT_TRUE(r.timed_out);
}

TEST(Fabric, DeliveryCapAborts) {
  ScheduleConfig c = unit_cost(0);
  c.max_deliveries = 10;
  Fabric f(c);
  f.register_endpoint(A, [&](const Message&) { return std::vector<Message>{ping(A, 0), ping(A, 1)}; });
  f.inject(ping(A, 0));
  const auto r = f.run_until_quiescent();
  EXPECT_EQ(r.delivered, 10u);
  EXPECT_TRUE(r.aborted);
  EXPECT_TRUE(f.detect_quiescence());
}

TEST(Fabric, HandlerFailureIsWrapped) {
  Fabric f(unit_cost(0));
  f.register_endpoint(A, [&](const Message&) -> std::vector<Message> { throw ProtocolError("boom"); });
  f.inject(ping(A, 0));
  try {
    f.run_until_quiescent();
    FAIL() << "expected a HandlerFault";
  } catch (const HandlerFault& e) {
    EXPECT_NE(e.message_trace().find("ta"), std::string::npos);
    EXPECT_THROW(std::rethrow_if_nested(e), ProtocolError);
  }
}

TEST(Fabric, MissingEndpointIsAFault) {
  Fabric f(unit_cost(0));
  f.inject(ping(A, 0));
  EXPECT_THROW(f.run_until_quiescent(), HandlerFault);
}

TEST(Fabric, ParallelWorkersDeliverEachMessageOnce) {
  ScheduleConfig c = unit_cost(4);
  c.workers = 4;
  Fabric f(c);
  std::atomic<int> calls{0};
  std::vector<PeerId> peers;
  for (int i = 0; i < 8; ++i) peers.push_back(PeerId::named("tw" + std::to_string(i)));
  for (PeerId p : peers) {
    f.register_endpoint(p, [&, p](const Message& m) {
      ++calls;
      std::vector<Message> out;
      const int depth = static_cast<int>(m.hist.size());
      if (depth < 3) {
        for (PeerId q : peers) {
          if (q != p) out.push_back(Message::forth(p, q, m.hist.push({m.literal, p, Clause{}}), m.literal));
        }
      }
      return out;
    });
  }
  f.inject(ping(peers[0], 0));
  const auto r = f.run_until_quiescent();
  // 1 + 7 + 49 + 343
  EXPECT_EQ(calls.load(), 400);
  EXPECT_EQ(r.delivered, 400u);
}

TEST(Trace, LineFormat) {
  const Message m = Message::back(A, B, History{}.push({lit("tx"), A, cl({"tx"})}), cl({"tx", "-ty"}));
  EXPECT_EQ(trace_line(4, m), "4 ta tb back 1 tx,-ty");
  EXPECT_EQ(payload_string(Message::final(A, B, {}, 0)), "true");
  EXPECT_EQ(payload_string(Message::back(A, B, {}, Clause{})), "[]");
}

TEST(Trace, ReferenceRunsAreReproducible) {
  DecaNetwork net(tour_graph());
  AskOptions opts;
  opts.keep_trace = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = net.ask(PeerId::named("P1"), lit("Far"), unit_cost(seed), opts);
    const auto b = net.ask(PeerId::named("P1"), lit("Far"), unit_cost(seed), opts);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.answers, b.answers);
    EXPECT_EQ(a.answer_times, b.answer_times);
  }
}

TEST(Quiescence, HoldsWhenTheUserIsNotified) {
  DecaNetwork net(tour_graph());
  for (auto policy : {DeliveryPolicy::random, DeliveryPolicy::lifo, DeliveryPolicy::per_pair_fifo}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      ScheduleConfig c = unit_cost(seed);
      c.policy = policy;
      const auto out = net.ask(PeerId::named("P1"), lit("Far"), c);
      EXPECT_TRUE(out.terminated);
      EXPECT_TRUE(out.quiescent_at_final);
      EXPECT_TRUE(out.all_finals_settled);
      EXPECT_FALSE(out.answers_after_final);
      EXPECT_EQ(minimize(ClauseSet(out.answers.begin(), out.answers.end())), tour_expected());
    }
  }
}

TEST(Quiescence, TimedOutRunDoesNotClaimTermination) {
  DecaNetwork net(tour_graph());
  ScheduleConfig c = unit_cost(0);
  c.ttl_budget = 2;
  const auto out = net.ask(PeerId::named("P1"), lit("Far"), c);
  EXPECT_TRUE(out.report.timed_out);
  EXPECT_FALSE(out.terminated);
}

}  // namespace
