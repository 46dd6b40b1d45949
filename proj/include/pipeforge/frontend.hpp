// Assembly text <-> Program, control-flow graph, and counted-loop recognition.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/isa.hpp"

namespace pipeforge {

enum class ParseErrorKind { Syntax, UnknownMnemonic, UndefinedLabel, OperandRange, DuplicateLabel, NoInstructions };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, int line, int column, const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  ParseErrorKind kind_;
  int line_;
  int column_;
};

// Grammar, one statement per line:
//   [label:] MNEMONIC operands [; comment]
//   .data <addr> <byte> [<byte> ...]
//   .entry <label>
// An empty program (no instructions) is valid here; the CLI rejects it.
Program parse(std::string_view source, std::string name = {});

// Canonical listing. parse(render(p), p.name) == p.
std::string render(const Program& program);
std::string render(const Instruction& instr);

enum class Terminator { None, B, Bcc, Halt };

struct BasicBlock {
  std::size_t id = 0;
  std::size_t first = 0;  // inclusive
  std::size_t last = 0;   // inclusive
  std::vector<std::size_t> successors;
  Terminator terminator = Terminator::None;

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t index) const { return index >= first && index <= last; }
  bool operator==(const BasicBlock&) const = default;
};

// Blocks split only at branch targets and after B/Bcc/HALT; a label nothing
// branches to does not start a block.
std::vector<BasicBlock> build_cfg(const Program& program);

// Index of the block containing instruction `index`.
std::size_t block_of(const std::vector<BasicBlock>& cfg, std::size_t index);

struct StaticTrip {
  std::int64_t count = 0;
  bool operator==(const StaticTrip&) const = default;
};
struct DynamicTrip {
  bool operator==(const DynamicTrip&) const = default;
};
using TripMode = std::variant<StaticTrip, DynamicTrip>;

using LoopBound = std::variant<Reg, std::int32_t>;

// A single-block counted loop:
//   header: <body> ... ADDI/SUBI i, #step ... <body> CMP i, bound ; Bcc header
struct LoopDescriptor {
  std::string header_label;
  std::size_t body = 0;  // block id
  Reg induction;
  std::int32_t step = 0;
  LoopBound bound;
  Kind cmp_kind = Kind::Cmpr;
  Cond cond = Cond::Lt;
  std::size_t header_index = 0;
  std::size_t update_index = 0;
  std::size_t cmp_index = 0;
  std::size_t back_branch_index = 0;
  TripMode trip_mode = DynamicTrip{};

  bool is_static() const { return std::holds_alternative<StaticTrip>(trip_mode); }
  std::int64_t static_trip() const { return std::get<StaticTrip>(trip_mode).count; }
  bool operator==(const LoopDescriptor&) const = default;
};

// Every single-block backward-Bcc loop that satisfies the descriptor
// invariants; anything else is skipped silently.
std::vector<LoopDescriptor> find_loops(const Program& program, const std::vector<BasicBlock>& cfg);

}  // namespace pipeforge
