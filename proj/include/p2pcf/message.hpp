#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "p2pcf/graph.hpp"
#include "p2pcf/history.hpp"
#include "p2pcf/logic.hpp"

namespace p2pcf {

enum class MessageKind { forth, back, final };

struct Message {
  PeerId sender;    // PeerId::user() for the User endpoint
  PeerId receiver;
  MessageKind kind = MessageKind::forth;
  History hist;
  Literal literal;  // forth
  Clause clause;    // back
  // final: number of back messages the sender sent on this channel for the
  // activation being closed. The receiver treats the sender as finished
  // once it has received that many.
  std::size_t back_count = 0;
  // Remaining time to live in model time units; none means unbounded.
  std::optional<double> ttl;

  static Message forth(PeerId from, PeerId to, History hist, Literal l) {
    return {from, to, MessageKind::forth, std::move(hist), l, {}, 0, std::nullopt};
  }
  static Message back(PeerId from, PeerId to, History hist, Clause c) {
    return {from, to, MessageKind::back, std::move(hist), {}, std::move(c), 0, std::nullopt};
  }
  static Message final(PeerId from, PeerId to, History hist, std::size_t backs) {
    return {from, to, MessageKind::final, std::move(hist), {}, {}, backs, std::nullopt};
  }
};

const char* to_string(MessageKind k);
// "forth" payload is the literal, "back" the clause with ',' between
// literals, "final" the word true.
std::string payload_string(const Message& m);
// seq sender receiver kind hist-depth payload
std::string trace_line(std::size_t seq, const Message& m);

}  // namespace p2pcf
