#pragma once

#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "p2pcf/graph.hpp"
#include "p2pcf/history.hpp"
#include "p2pcf/logic.hpp"
#include "p2pcf/message.hpp"
#include "p2pcf/transport.hpp"

namespace p2pcf {

// One peer's message handlers and its CONS/FINAL bookkeeping for a query.
class PeerRuntime {
 public:
  PeerRuntime(PeerId id, const AcquaintanceGraph& g, ResourceLimits limits = {});

  PeerId id() const { return id_; }

  std::vector<Message> handle(const Message& m);
  std::vector<Message> handle_forth(const Message& m);
  std::vector<Message> handle_back(const Message& m);
  std::vector<Message> handle_final(const Message& m);

  // Split points with some literal not yet final.
  std::size_t open_split_points() const { return splits_.size(); }
  // Forth messages whose final has not been sent yet.
  std::size_t open_activations() const { return activations_.size(); }
  // Sum over open split points of the neighbours each literal still waits on.
  std::size_t pending_finals() const;
  // Consequences cached for `literal` at the split point `split_history`.
  const ClauseSet* cons(Literal literal, const History& split_history) const;

 private:
  struct NeighborProgress {
    std::size_t received = 0;
    std::optional<std::size_t> announced;
    bool done = false;
  };
  struct LiteralState {
    ClauseSet cons;
    std::size_t pending = 0;
    std::map<PeerId, NeighborProgress> neighbors;
  };
  struct SplitPoint {
    History activation;  // [(q, Self, true) | hist']
    Clause shared, rest;
    std::map<Literal, LiteralState> literals;
    std::unordered_set<Clause> emitted;
    std::size_t open_literals = 0;
  };
  struct Activation {
    PeerId upstream;
    std::size_t open_splits = 0;
    std::size_t backs_sent = 0;
  };

  // Locates the split point and literal a back/final refers to.
  std::pair<SplitPoint*, LiteralState*> locate(const Message& m, History& split_history);
  void settle_neighbor(const History& split_history, SplitPoint& sp, LiteralState& ls,
                       NeighborProgress& np, std::vector<Message>& out);

  PeerId id_;
  const AcquaintanceGraph* graph_;
  ResourceLimits limits_;
  std::unordered_map<History, SplitPoint> splits_;
  std::unordered_map<History, Activation> activations_;
};

// Thread-safe queue of answers for one query, closed once the query is
// over. Consumers may run on any thread.
class AnswerStream {
 public:
  void push(Clause c);
  void close(std::exception_ptr error = nullptr);
  // Blocks until an answer is available or the stream is closed. Rethrows
  // the run's error, if any, once the queued answers are consumed.
  std::optional<Clause> next();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Clause> queue_;
  bool closed_ = false;
  std::exception_ptr error_;
};

struct QueryOutcome {
  std::vector<Clause> answers;  // distinct, in arrival order
  std::vector<double> answer_times;  // model time of each arrival
  bool terminated = false;           // User was notified of termination
  bool answers_after_final = false;
  bool quiescent_at_final = false;   // nothing else in flight at that moment
  bool all_finals_settled = false;   // every peer closed all split points
  RunReport report;

  // Trace statistics.
  std::size_t depth = 0;
  std::vector<std::size_t> width_samples;  // per delivered forth
  std::size_t integration_degree = 0;
  std::vector<std::string> trace;  // filled when requested
};

struct AskOptions {
  std::function<void(const Clause&)> on_answer;
  std::function<void(const std::string&)> on_trace;
  bool keep_trace = false;
};

class DecaNetwork {
 public:
  // The graph must outlive the network.
  explicit DecaNetwork(const AcquaintanceGraph& g, ResourceLimits limits = {});

  // Injects m(User, p, forth, [], q) and runs the fabric to quiescence.
  QueryOutcome ask(PeerId p, Literal q, const ScheduleConfig& cfg, const AskOptions& opts = {}) const;
  // One run per literal of c, answers recombined with distribute.
  QueryOutcome ask_clause(PeerId p, const Clause& c, const ScheduleConfig& cfg,
                          const AskOptions& opts = {}) const;

  class Handle {
   public:
    Handle(std::shared_ptr<AnswerStream> stream, std::shared_ptr<QueryOutcome> outcome,
           std::jthread worker)
        : stream_(std::move(stream)), outcome_(std::move(outcome)), worker_(std::move(worker)) {}
    AnswerStream& stream() { return *stream_; }
    // Joins the run.
    const QueryOutcome& wait();

   private:
    std::shared_ptr<AnswerStream> stream_;
    std::shared_ptr<QueryOutcome> outcome_;
    std::jthread worker_;
  };
  // Runs ask_clause on a background thread, streaming answers.
  Handle ask_async(PeerId p, const Clause& c, const ScheduleConfig& cfg) const;

  const AcquaintanceGraph& graph() const { return *graph_; }

 private:
  void validate(PeerId p, const Clause& c) const;

  const AcquaintanceGraph* graph_;
  ResourceLimits limits_;
};

// Minimized answers of a run: drop members entailed by the union of the
// theories, then keep the subsumption-minimal ones.
ClauseSet proper_minimal(const ClauseSet& answers, const AcquaintanceGraph& g);

}  // namespace p2pcf
