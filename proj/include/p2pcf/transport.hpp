#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "p2pcf/error.hpp"
#include "p2pcf/message.hpp"

namespace p2pcf {

enum class DeliveryPolicy { random, per_pair_fifo, lifo };
enum class CostModel { unit, wallclock };

DeliveryPolicy parse_policy(std::string_view name);
CostModel parse_cost_model(std::string_view name);

struct ScheduleConfig {
  std::uint64_t seed = 0;
  DeliveryPolicy policy = DeliveryPolicy::random;
  // Model-time budget of each injected message; none disables timeouts.
  std::optional<double> ttl_budget;
  CostModel cost = CostModel::wallclock;
  // 1 runs the deterministic reference scheduler; more runs handlers of
  // distinct peers concurrently.
  std::size_t workers = 1;
  // Harness guard: stop after this many deliveries and discard the rest.
  std::optional<std::size_t> max_deliveries;
};

struct RunReport {
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  bool timed_out = false;
  bool aborted = false;  // max_deliveries reached
  double elapsed = 0;    // summed handler cost
};

using Handler = std::function<std::vector<Message>(const Message&)>;
// Called after each delivery with the sequence number, the delivered message
// and the messages it induced (dropped ones included). Runs under the
// scheduler lock.
using DeliveryObserver =
    std::function<void(std::size_t seq, const Message&, std::span<const Message> induced, double now)>;

// Raised when a handler throws. The original exception is nested.
class HandlerFault : public Error {
 public:
  HandlerFault(const std::string& what, std::string message)
      : Error(what), message_(std::move(message)) {}
  const std::string& message_trace() const { return message_; }

 private:
  std::string message_;
};

// In-process message fabric with seeded delivery scheduling.
class Fabric {
 public:
  explicit Fabric(ScheduleConfig cfg);

  void register_endpoint(PeerId id, Handler handler);
  void set_observer(DeliveryObserver observer) { observer_ = std::move(observer); }

  // Enqueue with the configured TTL budget.
  void inject(Message m);
  RunReport run_until_quiescent();
  bool detect_quiescence() const;
  // Pending messages plus handlers currently running.
  std::size_t in_flight() const;
  // Model time consumed so far.
  double now() const;

 private:
  bool has_pending() const;
  // Next message per policy, or none when every candidate's receiver is busy.
  std::optional<Message> take(const std::vector<char>* busy);
  void push(Message m);
  std::vector<Message> invoke(const Message& m, double& cost);
  // TTL bookkeeping and enqueueing of one delivery's induced messages.
  void settle(const Message& delivered, std::vector<Message> induced, double cost);
  void run_reference();
  void run_parallel();

  ScheduleConfig cfg_;
  std::mt19937_64 rng_;
  std::unordered_map<std::uint32_t, Handler> handlers_;
  DeliveryObserver observer_;

  // random / lifo
  std::vector<Message> pool_;
  // per-pair-fifo
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::deque<Message>> channels_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> live_channels_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t running_ = 0;
  std::size_t seq_ = 0;
  RunReport report_;
};

}  // namespace p2pcf
