#include "p2pcf/theory_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "p2pcf/error.hpp"

namespace p2pcf {

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string literal_text(Literal l) { return (l.positive() ? "" : "-") + l.variable().name(); }

std::string clause_line(const Clause& c) {
  std::vector<std::string> lits;
  for (Literal l : c.literals()) lits.push_back(literal_text(l));
  std::sort(lits.begin(), lits.end(), [](const std::string& a, const std::string& b) {
    const std::string_view va = a[0] == '-' ? std::string_view(a).substr(1) : std::string_view(a);
    const std::string_view vb = b[0] == '-' ? std::string_view(b).substr(1) : std::string_view(b);
    return va != vb ? va < vb : a > b;
  });
  std::string line = "c";
  for (const auto& l : lits) line += " " + l;
  return line;
}

}  // namespace

Literal parse_literal(std::string_view token) {
  const bool negative = !token.empty() && token.front() == '-';
  if (negative) token.remove_prefix(1);
  if (token.empty() || token.front() == '-' || token.front() == '#') {
    throw InputError("malformed literal '" + std::string(token) + "'");
  }
  return {Variable::named(token), !negative};
}

TheoryFile parse_theory(std::string_view text) {
  TheoryFile out;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto words = split_words(line);
    if (words.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw InputError("theory line " + std::to_string(line_no) + ": " + what);
    };
    if (words[0] == "p") {
      if (words.size() != 2) fail("expected 'p <peer-id>'");
      if (have_header) fail("duplicate peer header");
      out.peer = PeerId::named(words[1]);
      have_header = true;
    } else if (!have_header) {
      fail("missing 'p <peer-id>' header");
    } else if (words[0] == "v") {
      if (words.size() < 2 || words.size() > 3 || (words.size() == 3 && words[2] != "target")) {
        fail("expected 'v <name> [target]'");
      }
      const Literal l = parse_literal(words[1]);
      if (!l.positive()) fail("variable names cannot start with '-'");
      out.theory.add_variable(l.variable());
      if (words.size() == 3) out.targets.insert(l.variable());
    } else if (words[0] == "c") {
      std::vector<Literal> lits;
      for (std::size_t i = 1; i < words.size(); ++i) lits.push_back(parse_literal(words[i]));
      out.theory.add_clause(Clause(std::move(lits)));
    } else {
      fail("unknown directive '" + std::string(words[0]) + "'");
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw InputError("theory file has no 'p <peer-id>' header");
  return out;
}

TheoryFile read_theory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_theory(buf.str());
}

std::string serialize_theory(const TheoryFile& file) {
  std::string out = "p " + file.peer.name() + "\n";
  std::vector<std::string> vars;
  for (Variable v : file.theory.vocabulary()) {
    vars.push_back("v " + v.name() + (file.targets.contains(v) ? " target" : ""));
  }
  std::sort(vars.begin(), vars.end());
  for (const auto& v : vars) out += v + "\n";
  std::vector<std::string> clauses;
  for (const Clause& c : file.theory.clauses()) clauses.push_back(clause_line(c));
  std::sort(clauses.begin(), clauses.end());
  for (const auto& c : clauses) out += c + "\n";
  return out;
}

}  // namespace p2pcf
