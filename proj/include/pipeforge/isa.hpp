// Mini-ISA: a Thumb-flavoured low-register subset used by every other pass.
#pragma once

#include <array>
#include <bitset>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/error.hpp"

namespace pipeforge {

inline constexpr int kNumRegs = 8;
// Every instruction is one Thumb half-word; branch-range math depends on it.
inline constexpr int kInstrBytes = 2;

struct Reg {
  std::uint8_t index = 0;

  constexpr Reg() = default;
  constexpr explicit Reg(int i) : index(static_cast<std::uint8_t>(i)) {
    if (i < 0 || i >= kNumRegs) throw Error("register index out of range: " + std::to_string(i));
  }
  friend constexpr auto operator<=>(Reg, Reg) = default;
};

constexpr Reg r(int i) { return Reg(i); }

enum class Kind : std::uint8_t {
  Movi,
  Movr,
  Add3,
  Sub3,
  Addi,
  Subi,
  And,
  Orr,
  Eor,
  Bic,
  Lsli,
  Lsri,
  Asri,
  Cmpr,
  Cmpi,
  B,
  Bcc,
  Ldr,
  Str,
  Ldrb,
  Strb,
  Push,
  Pop,
  Nop,
  Halt,
};

inline constexpr std::array kAllKinds = {
    Kind::Movi, Kind::Movr, Kind::Add3, Kind::Sub3, Kind::Addi, Kind::Subi, Kind::And,
    Kind::Orr,  Kind::Eor,  Kind::Bic,  Kind::Lsli, Kind::Lsri, Kind::Asri, Kind::Cmpr,
    Kind::Cmpi, Kind::B,    Kind::Bcc,  Kind::Ldr,  Kind::Str,  Kind::Ldrb, Kind::Strb,
    Kind::Push, Kind::Pop,  Kind::Nop,  Kind::Halt,
};

enum class Cond : std::uint8_t { Eq, Ne, Lt, Ge, Gt, Le };

inline constexpr std::array kAllConds = {Cond::Eq, Cond::Ne, Cond::Lt, Cond::Ge, Cond::Gt, Cond::Le};

enum class FUClass : std::uint8_t { Alu, Dmau, Bru };

inline constexpr std::array kAllFUClasses = {FUClass::Alu, FUClass::Dmau, FUClass::Bru};

FUClass fu_class_of(Kind kind);

std::string_view kind_name(Kind kind);
std::string_view cond_name(Cond cond);
std::string_view fu_class_name(FUClass fu);
std::optional<FUClass> parse_fu_class(std::string_view text);

Cond invert(Cond cond);

constexpr bool is_branch(Kind k) { return k == Kind::B || k == Kind::Bcc; }
// Kinds that end a basic block.
constexpr bool is_terminator(Kind k) { return is_branch(k) || k == Kind::Halt; }
constexpr bool is_load(Kind k) { return k == Kind::Ldr || k == Kind::Ldrb || k == Kind::Pop; }
constexpr bool is_store(Kind k) { return k == Kind::Str || k == Kind::Strb || k == Kind::Push; }

struct Instruction {
  Kind kind = Kind::Nop;
  Cond cond = Cond::Eq;  // meaningful for Bcc only
  std::optional<Reg> dst;
  std::vector<Reg> srcs;
  std::optional<std::int32_t> imm;
  std::optional<std::string> target;

  bool operator==(const Instruction&) const = default;
};

// Returns a description of the first operand-shape or range violation, if any.
std::optional<std::string> check_operands(const Instruction& instr);

// Builders used by the passes and tests. They throw Error on malformed operands.
namespace ins {
Instruction movi(Reg rd, std::int32_t imm);
Instruction movr(Reg rd, Reg rs);
Instruction add3(Reg rd, Reg rs, Reg rt);
Instruction sub3(Reg rd, Reg rs, Reg rt);
Instruction addi(Reg rd, std::int32_t imm);
Instruction subi(Reg rd, std::int32_t imm);
Instruction alu2(Kind kind, Reg rd, Reg rs);  // AND/ORR/EOR/BIC
Instruction shift(Kind kind, Reg rd, Reg rs, std::int32_t amount);
Instruction cmpr(Reg rs, Reg rt);
Instruction cmpi(Reg rs, std::int32_t imm);
Instruction b(std::string label);
Instruction bcc(Cond cond, std::string label);
Instruction mem(Kind kind, Reg rt, Reg rb, std::int32_t offset);
Instruction push(Reg reg);
Instruction pop(Reg reg);
Instruction nop();
Instruction halt();
}  // namespace ins

// Dependence resources: r0..r7, the condition flags, and the stack pointer.
inline constexpr std::size_t kFlagsResource = kNumRegs;
inline constexpr std::size_t kSpResource = kNumRegs + 1;
using ResourceSet = std::bitset<kNumRegs + 2>;

enum class MemEffect : std::uint8_t { None, Load, Store };

struct Effects {
  ResourceSet reads;
  ResourceSet writes;
  MemEffect mem = MemEffect::None;
};

Effects reads_writes(const Instruction& instr);

struct DataDirective {
  std::uint32_t addr = 0;
  std::vector<std::uint8_t> bytes;

  bool operator==(const DataDirective&) const = default;
};

// Single-pipe program: the form every pass consumes and produces.
struct Program {
  std::string name;
  std::vector<Instruction> instrs;
  std::map<std::string, std::size_t> labels;
  std::vector<DataDirective> data;
  std::optional<std::string> entry;

  std::size_t label_index(const std::string& label) const;
  std::size_t target_index(const Instruction& branch) const;
  std::size_t entry_index() const;
  std::vector<std::string> labels_at(std::size_t index) const;
  bool has_label(const std::string& label) const { return labels.contains(label); }
  // Label that is not yet used, derived from `stem`.
  std::string fresh_label(std::string_view stem) const;

  bool operator==(const Program&) const = default;
};

// Structural checks: operands, label bounds, branch targets, entry label.
void validate(const Program& program);

}  // namespace pipeforge
