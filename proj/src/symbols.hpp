#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace p2pcf::detail {

// Process-wide interning table. Id 0 is reserved for the empty name.
template <class Tag>
class SymbolTable {
 public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  std::uint32_t intern(std::string_view name) {
    {
      std::shared_lock lock(mu_);
      if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  const std::string& name(std::uint32_t id) {
    std::shared_lock lock(mu_);
    return names_.at(id);
  }

 private:
  SymbolTable() {
    names_.emplace_back();
    ids_.emplace(names_.back(), 0);
  }

  std::shared_mutex mu_;
  std::deque<std::string> names_;  // stable addresses; ids_ keys view into it
  std::unordered_map<std::string_view, std::uint32_t> ids_;
};

}  // namespace p2pcf::detail
