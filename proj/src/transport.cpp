#include "p2pcf/transport.hpp"

#include <algorithm>
#include <chrono>
#include <thread>
#include <unordered_set>

namespace p2pcf {

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::forth: return "forth";
    case MessageKind::back: return "back";
    case MessageKind::final: return "final";
  }
  return "?";
}

std::string payload_string(const Message& m) {
  switch (m.kind) {
    case MessageKind::forth: return to_string(m.literal);
    case MessageKind::final: return "true";
    case MessageKind::back: break;
  }
  if (m.clause.empty()) return "[]";
  std::string out;
  for (Literal l : literals_by_name(m.clause)) {
    if (!out.empty()) out += ',';
    out += to_string(l);
  }
  return out;
}

std::string trace_line(std::size_t seq, const Message& m) {
  return std::to_string(seq) + " " + m.sender.name() + " " + m.receiver.name() + " " +
         to_string(m.kind) + " " + std::to_string(m.hist.size()) + " " + payload_string(m);
}

DeliveryPolicy parse_policy(std::string_view name) {
  if (name == "random") return DeliveryPolicy::random;
  if (name == "per-pair-fifo" || name == "fifo") return DeliveryPolicy::per_pair_fifo;
  if (name == "lifo") return DeliveryPolicy::lifo;
  throw InputError("unknown delivery policy '" + std::string(name) + "'");
}

CostModel parse_cost_model(std::string_view name) {
  if (name == "unit") return CostModel::unit;
  if (name == "wallclock") return CostModel::wallclock;
  throw InputError("unknown cost model '" + std::string(name) + "'");
}

Fabric::Fabric(ScheduleConfig cfg) : cfg_(cfg), rng_(cfg.seed) {}

void Fabric::register_endpoint(PeerId id, Handler handler) {
  handlers_[id.id()] = std::move(handler);
}

void Fabric::inject(Message m) {
  m.ttl = cfg_.ttl_budget;
  std::lock_guard lock(mu_);
  push(std::move(m));
}

bool Fabric::detect_quiescence() const {
  std::lock_guard lock(mu_);
  return !has_pending() && running_ == 0;
}

std::size_t Fabric::in_flight() const {
  std::lock_guard lock(mu_);
  std::size_t n = pool_.size() + running_;
  for (const auto& [key, q] : channels_) n += q.size();
  return n;
}

double Fabric::now() const {
  std::lock_guard lock(mu_);
  return report_.elapsed;
}

bool Fabric::has_pending() const { return !pool_.empty() || !live_channels_.empty(); }

void Fabric::push(Message m) {
  if (cfg_.policy == DeliveryPolicy::per_pair_fifo) {
    const auto key = std::pair{m.sender.id(), m.receiver.id()};
    auto& q = channels_[key];
    if (q.empty()) live_channels_.push_back(key);
    q.push_back(std::move(m));
  } else {
    pool_.push_back(std::move(m));
  }
}

std::optional<Message> Fabric::take(const std::vector<char>* busy) {
  auto free = [&](std::uint32_t receiver) {
    return !busy || receiver >= busy->size() || !(*busy)[receiver];
  };
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng_() % n); };

  if (cfg_.policy == DeliveryPolicy::per_pair_fifo) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < live_channels_.size(); ++i) {
      if (free(live_channels_[i].second)) eligible.push_back(i);
    }
    if (eligible.empty()) return std::nullopt;
    const std::size_t i = eligible.size() == live_channels_.size() ? pick(eligible.size())
                                                                   : eligible[pick(eligible.size())];
    const auto key = live_channels_[i];
    auto& q = channels_[key];
    Message m = std::move(q.front());
    q.pop_front();
    if (q.empty()) {
      channels_.erase(key);
      live_channels_[i] = live_channels_.back();
      live_channels_.pop_back();
    }
    return m;
  }

  std::optional<std::size_t> idx;
  if (cfg_.policy == DeliveryPolicy::lifo) {
    for (std::size_t i = pool_.size(); i-- > 0;) {
      if (free(pool_[i].receiver.id())) {
        idx = i;
        break;
      }
    }
  } else if (!busy) {
    if (!pool_.empty()) idx = pick(pool_.size());
  } else {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (free(pool_[i].receiver.id())) eligible.push_back(i);
    }
    if (!eligible.empty()) idx = eligible[pick(eligible.size())];
  }
  if (!idx) return std::nullopt;
  Message m = std::move(pool_[*idx]);
  if (cfg_.policy == DeliveryPolicy::lifo) {
    pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(*idx));
  } else {
    pool_[*idx] = std::move(pool_.back());
    pool_.pop_back();
  }
  return m;
}

std::vector<Message> Fabric::invoke(const Message& m, double& cost) {
  auto it = handlers_.find(m.receiver.id());
  const auto start = std::chrono::steady_clock::now();
  std::vector<Message> out;
  try {
    if (it == handlers_.end()) throw ProtocolError("no endpoint registered for " + m.receiver.name());
    out = it->second(m);
  } catch (...) {
    std::throw_with_nested(HandlerFault("handler of " + m.receiver.name() + " failed on " +
                                            std::string(to_string(m.kind)) + " from " +
                                            m.sender.name(),
                                        trace_line(0, m) + " hist=" + to_string(m.hist)));
  }
  if (cfg_.cost == CostModel::unit) {
    cost = 1.0;
  } else {
    cost = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

void Fabric::settle(const Message& delivered, std::vector<Message> induced, double cost) {
  ++report_.delivered;
  report_.elapsed += cost;
  const std::size_t seq = seq_++;
  std::vector<char> keep(induced.size(), 1);
  for (std::size_t i = 0; i < induced.size(); ++i) {
    if (!delivered.ttl) {
      induced[i].ttl.reset();
      continue;
    }
    induced[i].ttl = *delivered.ttl - cost;
    if (*induced[i].ttl <= 0) {
      keep[i] = 0;
      ++report_.dropped;
      report_.timed_out = true;
    }
  }
  if (observer_) observer_(seq, delivered, induced, report_.elapsed);
  if (report_.aborted) return;
  for (std::size_t i = 0; i < induced.size(); ++i) {
    if (keep[i]) push(std::move(induced[i]));
  }
  if (cfg_.max_deliveries && report_.delivered >= *cfg_.max_deliveries) {
    report_.aborted = true;
    pool_.clear();
    channels_.clear();
    live_channels_.clear();
  }
}

void Fabric::run_reference() {
  while (true) {
    std::optional<Message> m;
    {
      std::lock_guard lock(mu_);
      m = take(nullptr);
      if (!m) return;
      ++running_;
    }
    double cost = 0;
    std::vector<Message> induced;
    try {
      induced = invoke(*m, cost);
    } catch (...) {
      std::lock_guard lock(mu_);
      --running_;
      throw;
    }
    std::lock_guard lock(mu_);
    --running_;
    settle(*m, std::move(induced), cost);
  }
}

void Fabric::run_parallel() {
  std::vector<char> busy;
  std::exception_ptr failure;
  auto worker = [&] {
    std::unique_lock lock(mu_);
    while (true) {
      std::optional<Message> m;
      cv_.wait(lock, [&] {
        if (failure) return true;
        if (!has_pending()) return running_ == 0;
        m = take(&busy);
        return m.has_value();
      });
      if (failure || !m) {
        cv_.notify_all();
        return;
      }
      const std::uint32_t who = m->receiver.id();
      if (busy.size() <= who) busy.resize(who + 1, 0);
      busy[who] = 1;
      ++running_;
      lock.unlock();
      double cost = 0;
      std::vector<Message> induced;
      std::exception_ptr err;
      try {
        induced = invoke(*m, cost);
      } catch (...) {
        err = std::current_exception();
      }
      lock.lock();
      busy[who] = 0;
      --running_;
      if (err) {
        if (!failure) failure = err;
      } else {
        settle(*m, std::move(induced), cost);
      }
      cv_.notify_all();
    }
  };
  std::vector<std::jthread> threads;
  for (std::size_t i = 0; i < cfg_.workers; ++i) threads.emplace_back(worker);
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

RunReport Fabric::run_until_quiescent() {
  if (cfg_.workers <= 1) {
    run_reference();
  } else {
    run_parallel();
  }
  std::lock_guard lock(mu_);
  return report_;
}

}  // namespace p2pcf
