#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "p2pcf/graph.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf {

// `name` or `-name`. Throws InputError on an empty token.
Literal parse_literal(std::string_view token);

// One peer's theory file:
//   p <peer-id>
//   v <name> [target]
//   c <lit> <lit> ...      (a bare `c` is the empty clause)
//   # comment
struct TheoryFile {
  PeerId peer;
  Theory theory;
  std::set<Variable> targets;

  friend bool operator==(const TheoryFile&, const TheoryFile&) = default;
};

// Variables used in clauses but not declared are added to the vocabulary.
TheoryFile parse_theory(std::string_view text);
TheoryFile read_theory(const std::filesystem::path& path);
// Variable lines and clause lines each sorted by text; literals within a
// clause sorted by variable name.
std::string serialize_theory(const TheoryFile& file);

}  // namespace p2pcf
