#pragma once

#include <cstddef>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "p2pcf/graph.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf {

// (l, P, c): literal l was processed at peer P, branching on clause c. An
// absent clause is the termination marker carried by final messages.
struct HistoryEntry {
  Literal literal;
  PeerId peer;
  std::optional<Clause> clause;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// Persistent newest-first list. push() shares the tail, so extending a
// history is O(1) and sibling branches share their common suffix.
class History {
  struct Node;

 public:
  History() = default;

  History push(HistoryEntry entry) const;

  bool empty() const { return !head_; }
  std::size_t size() const { return head_ ? head_->size : 0; }
  const HistoryEntry& head() const;
  History tail() const;

  bool contains_literal(Literal l) const;
  bool contains(Literal l, PeerId p) const;
  std::vector<HistoryEntry> entries() const;

  std::size_t hash() const { return head_ ? head_->hash : 0; }
  friend bool operator==(const History& a, const History& b);

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = HistoryEntry;
    using difference_type = std::ptrdiff_t;
    using pointer = const HistoryEntry*;
    using reference = const HistoryEntry&;

    iterator() = default;
    reference operator*() const { return node_->entry; }
    pointer operator->() const { return &node_->entry; }
    iterator& operator++() {
      node_ = node_->next.get();
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(iterator a, iterator b) { return a.node_ == b.node_; }

   private:
    friend class History;
    explicit iterator(const Node* node) : node_(node) {}
    const Node* node_ = nullptr;
  };

  iterator begin() const { return iterator(head_.get()); }
  iterator end() const { return iterator(); }

 private:
  struct Node {
    HistoryEntry entry;
    std::shared_ptr<const Node> next;
    std::size_t size;
    std::size_t hash;
  };
  explicit History(std::shared_ptr<const Node> head) : head_(std::move(head)) {}

  std::shared_ptr<const Node> head_;
};

std::string to_string(const History& h);

}  // namespace p2pcf

template <>
struct std::hash<p2pcf::History> {
  std::size_t operator()(const p2pcf::History& h) const noexcept { return h.hash(); }
};
