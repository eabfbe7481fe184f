#pragma once

// Internal clause store shared by the saturation procedures.

#include <chrono>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "p2pcf/error.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf::detail {

class Budget {
 public:
  explicit Budget(const ResourceLimits& limits)
      : limits_(limits), start_(std::chrono::steady_clock::now()) {}

  void charge(std::size_t live_clauses) {
    ++derived_;
    if (live_clauses > limits_.max_clauses) {
      throw ResourceLimitError("clause budget of " + std::to_string(limits_.max_clauses) +
                               " exceeded");
    }
    if (limits_.time_budget && (derived_ & 0x3ff) == 0 &&
        std::chrono::steady_clock::now() - start_ > *limits_.time_budget) {
      throw ResourceLimitError("time budget of " + std::to_string(limits_.time_budget->count()) +
                               " ms exceeded");
    }
  }

 private:
  ResourceLimits limits_;
  std::chrono::steady_clock::time_point start_;
  std::size_t derived_ = 0;
};

// Clauses with lazy deletion and two occurrence indices: every literal, and
// the smallest literal of each clause. A clause s subsumes r only if s's
// smallest literal is in r, so forward subsumption scans one short list per
// literal of r.
class ClauseStore {
 public:
  std::size_t add(Clause c) {
    const auto idx = static_cast<std::uint32_t>(clauses_.size());
    for (Literal l : c.literals()) occ_[l.code()].push_back(idx);
    if (c.empty()) has_empty_ = true;
    else first_[c.literals().front().code()].push_back(idx);
    signatures_.push_back(c.signature());
    clauses_.push_back(std::move(c));
    alive_.push_back(1);
    ++alive_count_;
    return idx;
  }

  bool alive(std::uint32_t idx) const { return alive_[idx] != 0; }
  const Clause& clause(std::uint32_t idx) const { return clauses_[idx]; }
  std::size_t alive_count() const { return alive_count_; }

  bool forward_subsumed(const Clause& r) const {
    if (has_empty_) return true;
    const std::uint64_t sig = r.signature();
    for (Literal l : r.literals()) {
      auto it = first_.find(l.code());
      if (it == first_.end()) continue;
      for (std::uint32_t idx : it->second) {
        if (!alive_[idx] || (signatures_[idx] & ~sig) != 0) continue;
        if (subsumes(clauses_[idx], r)) return true;
      }
    }
    return false;
  }

  void remove_subsumed_by(const Clause& r) {
    if (r.empty()) {
      for (auto& a : alive_) a = 0;
      alive_count_ = 0;
      has_empty_ = true;
      return;
    }
    const std::vector<std::uint32_t>* shortest = nullptr;
    for (Literal l : r.literals()) {
      auto it = occ_.find(l.code());
      if (it == occ_.end()) return;
      if (!shortest || it->second.size() < shortest->size()) shortest = &it->second;
    }
    const std::uint64_t sig = r.signature();
    for (std::uint32_t idx : *shortest) {
      if (!alive_[idx] || (sig & ~signatures_[idx]) != 0) continue;
      if (subsumes(r, clauses_[idx])) {
        alive_[idx] = 0;
        --alive_count_;
      }
    }
  }

  std::vector<std::uint32_t> occurrences(Literal l) const {
    std::vector<std::uint32_t> out;
    if (auto it = occ_.find(l.code()); it != occ_.end()) {
      for (std::uint32_t idx : it->second) {
        if (alive_[idx]) out.push_back(idx);
      }
    }
    return out;
  }

  std::vector<Clause> alive_clauses() const {
    std::vector<Clause> out;
    out.reserve(alive_count_);
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      if (alive_[i]) out.push_back(clauses_[i]);
    }
    return out;
  }

 private:
  std::vector<Clause> clauses_;
  std::vector<std::uint64_t> signatures_;
  std::vector<char> alive_;
  std::size_t alive_count_ = 0;
  bool has_empty_ = false;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> occ_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> first_;
};

}  // namespace p2pcf::detail
