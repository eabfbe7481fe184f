#include "p2pcf/deca.hpp"

#include <algorithm>
#include <set>

#include "p2pcf/error.hpp"
#include "p2pcf/recursive.hpp"

namespace p2pcf {

// ---------------------------------------------------------------------------
// PeerRuntime

PeerRuntime::PeerRuntime(PeerId id, const AcquaintanceGraph& g, ResourceLimits limits)
    : id_(id), graph_(&g), limits_(limits) {
  g.peer(id);
}

std::vector<Message> PeerRuntime::handle(const Message& m) {
  if (m.receiver != id_) throw ProtocolError("message for " + m.receiver.name() + " delivered to " + id_.name());
  switch (m.kind) {
    case MessageKind::forth: return handle_forth(m);
    case MessageKind::back: return handle_back(m);
    case MessageKind::final: return handle_final(m);
  }
  return {};
}

std::vector<Message> PeerRuntime::handle_forth(const Message& m) {
  const AcquaintanceGraph& g = *graph_;
  const Literal q = m.literal;
  const History& hist = m.hist;
  const PeerId up = m.sender;
  if (!g.peer(id_).theory.has_variable(q.variable())) {
    throw InputError("variable " + q.variable().name() + " is not in the vocabulary of " + id_.name());
  }
  const History key = hist.push({q, id_, std::nullopt});
  std::vector<Message> out;
  auto contradiction = [&] {
    out.push_back(Message::back(id_, up, hist.push({q, id_, Clause{}}), Clause{}));
    out.push_back(Message::final(id_, up, key, 1));
    return out;
  };

  if (hist.contains_literal(q.complement())) return contradiction();
  const ClauseSet theory = local_theory(id_, hist, g);
  if (theory.contains(Clause::unit(q)) || hist.contains(q, id_)) {
    out.push_back(Message::final(id_, up, key, 0));
    return out;
  }
  ClauseSet local = resolvent_set(q, theory, limits_);
  if (local.contains(Clause{})) return contradiction();
  local.insert(Clause::unit(q));

  struct Kept {
    Clause c, shared, rest;
  };
  std::vector<Kept> kept;
  bool any_shared = false;
  for (const Clause& c : local) {
    auto [s, l] = split_shared(c, id_, g);
    if (!g.in_target_language(id_, l)) continue;
    any_shared = any_shared || !s.empty();
    kept.push_back({c, std::move(s), std::move(l)});
  }

  Activation act{up, 0, 0};
  for (Kept& k : kept) {
    const History split = hist.push({q, id_, k.c});
    if (k.shared.empty()) {
      out.push_back(Message::back(id_, up, split, k.c));
      ++act.backs_sent;
      continue;
    }
    SplitPoint sp{key, k.shared, k.rest, {}, {}, k.shared.size()};
    // All seeds together give c itself; send it now when it is already an
    // answer.
    if (g.in_target_language(id_, k.shared)) {
      out.push_back(Message::back(id_, up, split, k.c));
      sp.emitted.insert(k.c);
      ++act.backs_sent;
    }
    for (Literal l : k.shared.literals()) {
      LiteralState& ls = sp.literals[l];
      if (g.is_target(id_, l.variable())) ls.cons.insert(Clause::unit(l));
      const auto& peers = acq(l, id_, g);
      ls.pending = peers.size();
      for (PeerId rp : peers) {
        ls.neighbors[rp];
        out.push_back(Message::forth(id_, rp, split, l));
      }
    }
    splits_.emplace(split, std::move(sp));
    ++act.open_splits;
  }
  if (!any_shared) {
    out.push_back(Message::final(id_, up, key, act.backs_sent));
  } else {
    activations_.emplace(key, act);
  }
  return out;
}

std::pair<PeerRuntime::SplitPoint*, PeerRuntime::LiteralState*> PeerRuntime::locate(
    const Message& m, History& split_history) {
  if (m.hist.size() < 2) {
    throw ProtocolError(std::string(to_string(m.kind)) + " from " + m.sender.name() + " to " +
                        id_.name() + " has a history of length " + std::to_string(m.hist.size()));
  }
  const HistoryEntry& head = m.hist.head();
  split_history = m.hist.tail();
  const HistoryEntry& split = split_history.head();
  if (head.peer != m.sender || split.peer != id_ || !split.clause) {
    throw ProtocolError("malformed history " + to_string(m.hist) + " at " + id_.name());
  }
  auto it = splits_.find(split_history);
  if (it == splits_.end()) {
    throw ProtocolError("unknown split point " + to_string(split_history) + " at " + id_.name());
  }
  auto lit = it->second.literals.find(head.literal);
  if (lit == it->second.literals.end()) {
    throw ProtocolError("literal " + to_string(head.literal) + " is not shared at split point " +
                        to_string(split_history));
  }
  return {&it->second, &lit->second};
}

std::vector<Message> PeerRuntime::handle_back(const Message& m) {
  History split_history;
  auto [sp, ls] = locate(m, split_history);
  if (m.hist.head().clause == std::nullopt) throw ProtocolError("back message carries a final marker");
  auto np = ls->neighbors.find(m.sender);
  if (np == ls->neighbors.end()) {
    throw ProtocolError(m.sender.name() + " was not asked about " + to_string(m.hist.head().literal));
  }
  ++np->second.received;
  if (np->second.announced && np->second.received > *np->second.announced) {
    throw ProtocolError("back from " + m.sender.name() + " after its final");
  }

  std::vector<Message> out;
  const Literal answered = m.hist.head().literal;
  if (ls->cons.insert(m.clause).second) {
    Activation& act = activations_.at(sp->activation);
    std::vector<ClauseSet> factors;
    factors.reserve(sp->literals.size() + 1);
    bool empty_factor = false;
    for (const auto& [l, state] : sp->literals) {
      if (l == answered) {
        factors.push_back({m.clause});
      } else {
        if (state.cons.empty()) empty_factor = true;
        factors.push_back(state.cons);
      }
    }
    if (!empty_factor) {
      factors.push_back({sp->rest});
      for (const Clause& r : distribute(factors)) {
        if (r.is_tautology() || !sp->emitted.insert(r).second) continue;
        out.push_back(Message::back(id_, act.upstream, split_history, r));
        ++act.backs_sent;
      }
    }
  }
  settle_neighbor(split_history, *sp, *ls, np->second, out);
  return out;
}

std::vector<Message> PeerRuntime::handle_final(const Message& m) {
  History split_history;
  auto [sp, ls] = locate(m, split_history);
  if (m.hist.head().clause != std::nullopt) throw ProtocolError("final message without marker");
  auto np = ls->neighbors.find(m.sender);
  if (np == ls->neighbors.end() || np->second.announced) {
    throw ProtocolError("unexpected final from " + m.sender.name() + " at " + id_.name());
  }
  if (np->second.received > m.back_count) {
    throw ProtocolError("final from " + m.sender.name() + " announces fewer backs than received");
  }
  np->second.announced = m.back_count;
  std::vector<Message> out;
  settle_neighbor(split_history, *sp, *ls, np->second, out);
  return out;
}

void PeerRuntime::settle_neighbor(const History& split_history, SplitPoint& sp, LiteralState& ls,
                                  NeighborProgress& np, std::vector<Message>& out) {
  if (np.done || !np.announced || np.received != *np.announced) return;
  np.done = true;
  if (--ls.pending > 0) return;
  if (--sp.open_literals > 0) return;
  const History key = sp.activation;
  splits_.erase(split_history);  // clears CONS for the whole split point
  auto it = activations_.find(key);
  if (--it->second.open_splits > 0) return;
  out.push_back(Message::final(id_, it->second.upstream, key, it->second.backs_sent));
  activations_.erase(it);
}

std::size_t PeerRuntime::pending_finals() const {
  std::size_t n = 0;
  for (const auto& [h, sp] : splits_)
    for (const auto& [l, ls] : sp.literals) n += ls.pending;
  return n;
}

const ClauseSet* PeerRuntime::cons(Literal literal, const History& split_history) const {
  auto it = splits_.find(split_history);
  if (it == splits_.end()) return nullptr;
  auto lit = it->second.literals.find(literal);
  return lit == it->second.literals.end() ? nullptr : &lit->second.cons;
}

// ---------------------------------------------------------------------------
// AnswerStream

void AnswerStream::push(Clause c) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(c));
  }
  cv_.notify_all();
}

void AnswerStream::close(std::exception_ptr error) {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    error_ = error;
  }
  cv_.notify_all();
}

std::optional<Clause> AnswerStream::next() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !queue_.empty() || closed_; });
  if (!queue_.empty()) {
    Clause c = std::move(queue_.front());
    queue_.pop_front();
    return c;
  }
  if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
  return std::nullopt;
}

bool AnswerStream::closed() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

// ---------------------------------------------------------------------------
// DecaNetwork

namespace {

// The User endpoint of one query: per-literal answer sets, recombination,
// and termination detection by back counting.
class UserEndpoint {
 public:
  UserEndpoint(const Clause& query, QueryOutcome& outcome, const AskOptions& opts, Fabric& fabric)
      : outcome_(outcome), opts_(opts), fabric_(fabric) {
    for (Literal l : query.literals()) order_.push_back(l);
    for (Literal l : order_) state_[l];
    open_ = order_.size();
  }

  std::vector<Message> operator()(const Message& m) {
    if (m.hist.size() != 1) throw ProtocolError("User received history " + to_string(m.hist));
    auto it = state_.find(m.hist.head().literal);
    if (it == state_.end()) throw ProtocolError("User did not ask about " + to_string(m.hist.head().literal));
    State& st = it->second;
    if (m.kind == MessageKind::back) {
      if (done_) outcome_.answers_after_final = true;
      ++st.received;
      if (st.answers.insert(m.clause).second) combine(it->first, m.clause);
    } else if (m.kind == MessageKind::final) {
      if (st.announced) throw ProtocolError("duplicate final to User");
      st.announced = m.back_count;
    } else {
      throw ProtocolError("User cannot handle forth messages");
    }
    if (!st.done && st.announced && st.received == *st.announced) {
      st.done = true;
      if (--open_ == 0) {
        done_ = true;
        outcome_.terminated = true;
        outcome_.quiescent_at_final = fabric_.in_flight() == 1;
      }
    }
    return {};
  }

 private:
  struct State {
    ClauseSet answers;
    std::size_t received = 0;
    std::optional<std::size_t> announced;
    bool done = false;
  };

  void combine(Literal fixed, const Clause& r) {
    std::vector<ClauseSet> factors;
    for (Literal l : order_) {
      if (l == fixed) {
        factors.push_back({r});
      } else {
        if (state_[l].answers.empty()) return;
        factors.push_back(state_[l].answers);
      }
    }
    for (const Clause& c : distribute(factors)) {
      if (c.is_tautology() || !emitted_.insert(c).second) continue;
      outcome_.answers.push_back(c);
      outcome_.answer_times.push_back(fabric_.now());
      if (opts_.on_answer) opts_.on_answer(c);
    }
  }

  QueryOutcome& outcome_;
  const AskOptions& opts_;
  Fabric& fabric_;
  std::vector<Literal> order_;
  std::map<Literal, State> state_;
  std::unordered_set<Clause> emitted_;
  std::size_t open_ = 0;
  bool done_ = false;
};

}  // namespace

DecaNetwork::DecaNetwork(const AcquaintanceGraph& g, ResourceLimits limits)
    : graph_(&g), limits_(limits) {}

void DecaNetwork::validate(PeerId p, const Clause& c) const {
  if (!graph_->target_consistent()) {
    throw InputError("graph edges disagree on target status; run `check` for details");
  }
  const PeerInfo& info = graph_->peer(p);
  for (Literal l : c.literals()) {
    if (!info.theory.has_variable(l.variable())) {
      throw InputError("variable " + l.variable().name() + " is not in the vocabulary of " + p.name());
    }
  }
}

QueryOutcome DecaNetwork::ask(PeerId p, Literal q, const ScheduleConfig& cfg,
                              const AskOptions& opts) const {
  return ask_clause(p, Clause::unit(q), cfg, opts);
}

QueryOutcome DecaNetwork::ask_clause(PeerId p, const Clause& c, const ScheduleConfig& cfg,
                                     const AskOptions& opts) const {
  validate(p, c);
  QueryOutcome outcome;
  Fabric fabric(cfg);

  std::vector<std::unique_ptr<PeerRuntime>> runtimes;
  for (PeerId id : graph_->peers()) {
    runtimes.push_back(std::make_unique<PeerRuntime>(id, *graph_, limits_));
    PeerRuntime* rt = runtimes.back().get();
    fabric.register_endpoint(id, [rt](const Message& m) { return rt->handle(m); });
  }
  UserEndpoint user(c, outcome, opts, fabric);
  fabric.register_endpoint(PeerId::user(), [&user](const Message& m) { return user(m); });

  std::set<std::uint32_t> touched;
  fabric.set_observer([&](std::size_t seq, const Message& m, std::span<const Message> induced, double) {
    outcome.depth = std::max(outcome.depth, m.hist.size());
    for (const auto& e : m.hist) touched.insert(e.peer.id());
    if (m.kind == MessageKind::forth) {
      std::set<std::uint32_t> asked;
      for (const Message& x : induced) {
        if (x.kind == MessageKind::forth) asked.insert(x.receiver.id());
      }
      outcome.width_samples.push_back(asked.size());
    }
    if (opts.keep_trace || opts.on_trace) {
      std::string line = trace_line(seq, m);
      if (opts.on_trace) opts.on_trace(line);
      if (opts.keep_trace) outcome.trace.push_back(std::move(line));
    }
  });

  for (Literal l : c.literals()) fabric.inject(Message::forth(PeerId::user(), p, History{}, l));
  outcome.report = fabric.run_until_quiescent();
  outcome.integration_degree = touched.size();
  outcome.all_finals_settled = std::all_of(runtimes.begin(), runtimes.end(), [](const auto& rt) {
    return rt->open_split_points() == 0 && rt->open_activations() == 0;
  });
  return outcome;
}

DecaNetwork::Handle DecaNetwork::ask_async(PeerId p, const Clause& c, const ScheduleConfig& cfg) const {
  validate(p, c);
  auto stream = std::make_shared<AnswerStream>();
  auto outcome = std::make_shared<QueryOutcome>();
  std::jthread worker([this, p, c, cfg, stream, outcome] {
    try {
      AskOptions opts;
      opts.on_answer = [&](const Clause& a) { stream->push(a); };
      *outcome = ask_clause(p, c, cfg, opts);
      stream->close();
    } catch (...) {
      stream->close(std::current_exception());
    }
  });
  return Handle(stream, outcome, std::move(worker));
}

const QueryOutcome& DecaNetwork::Handle::wait() {
  if (worker_.joinable()) worker_.join();
  return *outcome_;
}

ClauseSet proper_minimal(const ClauseSet& answers, const AcquaintanceGraph& g) {
  const ClauseSet all = g.union_clauses();
  ClauseSet kept;
  for (const Clause& c : answers) {
    if (!entails(all, c)) kept.insert(c);
  }
  return minimize(kept);
}

}  // namespace p2pcf
