#include "p2pcf/history.hpp"

#include "p2pcf/error.hpp"

namespace p2pcf {

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t entry_hash(const HistoryEntry& e) {
  std::size_t h = mix(e.literal.code(), e.peer.id());
  return mix(h, e.clause ? std::hash<Clause>{}(*e.clause) : 0x5bd1e995);
}

}  // namespace

History History::push(HistoryEntry entry) const {
  const std::size_t h = mix(hash(), entry_hash(entry));
  return History(std::make_shared<const Node>(Node{std::move(entry), head_, size() + 1, h}));
}

const HistoryEntry& History::head() const {
  if (!head_) throw ProtocolError("empty history has no head");
  return head_->entry;
}

History History::tail() const {
  if (!head_) throw ProtocolError("empty history has no tail");
  return History(head_->next);
}

bool History::contains_literal(Literal l) const {
  for (const auto& e : *this)
    if (e.literal == l) return true;
  return false;
}

bool History::contains(Literal l, PeerId p) const {
  for (const auto& e : *this)
    if (e.literal == l && e.peer == p) return true;
  return false;
}

std::vector<HistoryEntry> History::entries() const { return {begin(), end()}; }

bool operator==(const History& a, const History& b) {
  const History::Node* x = a.head_.get();
  const History::Node* y = b.head_.get();
  if (a.size() != b.size() || a.hash() != b.hash()) return false;
  while (x && y) {
    if (x == y) return true;
    if (!(x->entry == y->entry)) return false;
    x = x->next.get();
    y = y->next.get();
  }
  return x == y;
}

std::string to_string(const History& h) {
  std::string out = "[";
  bool first = true;
  for (const auto& e : h) {
    if (!first) out += ", ";
    first = false;
    out += "(" + to_string(e.literal) + ", " + e.peer.name() + ", " +
           (e.clause ? to_string(*e.clause) : std::string("true")) + ")";
  }
  return out + "]";
}

}  // namespace p2pcf
