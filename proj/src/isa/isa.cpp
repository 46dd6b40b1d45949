#include "pipeforge/isa.hpp"

#include <algorithm>

namespace pipeforge {

FUClass fu_class_of(Kind kind) {
  switch (kind) {
    case Kind::Cmpr:
    case Kind::Cmpi:
    case Kind::B:
    case Kind::Bcc:
    case Kind::Halt:
      return FUClass::Bru;
    case Kind::Ldr:
    case Kind::Str:
    case Kind::Ldrb:
    case Kind::Strb:
    case Kind::Push:
    case Kind::Pop:
      return FUClass::Dmau;
    default:
      return FUClass::Alu;
  }
}

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Movi: return "MOVI";
    case Kind::Movr: return "MOVR";
    case Kind::Add3: return "ADD3";
    case Kind::Sub3: return "SUB3";
    case Kind::Addi: return "ADDI";
    case Kind::Subi: return "SUBI";
    case Kind::And: return "AND";
    case Kind::Orr: return "ORR";
    case Kind::Eor: return "EOR";
    case Kind::Bic: return "BIC";
    case Kind::Lsli: return "LSLI";
    case Kind::Lsri: return "LSRI";
    case Kind::Asri: return "ASRI";
    case Kind::Cmpr: return "CMPR";
    case Kind::Cmpi: return "CMPI";
    case Kind::B: return "B";
    case Kind::Bcc: return "Bcc";
    case Kind::Ldr: return "LDR";
    case Kind::Str: return "STR";
    case Kind::Ldrb: return "LDRB";
    case Kind::Strb: return "STRB";
    case Kind::Push: return "PUSH";
    case Kind::Pop: return "POP";
    case Kind::Nop: return "NOP";
    case Kind::Halt: return "HALT";
  }
  return "?";
}

std::string_view cond_name(Cond cond) {
  switch (cond) {
    case Cond::Eq: return "EQ";
    case Cond::Ne: return "NE";
    case Cond::Lt: return "LT";
    case Cond::Ge: return "GE";
    case Cond::Gt: return "GT";
    case Cond::Le: return "LE";
  }
  return "?";
}

std::string_view fu_class_name(FUClass fu) {
  switch (fu) {
    case FUClass::Alu: return "ALU";
    case FUClass::Dmau: return "DMAU";
    case FUClass::Bru: return "BRU";
  }
  return "?";
}

std::optional<FUClass> parse_fu_class(std::string_view text) {
  for (FUClass fu : kAllFUClasses)
    if (fu_class_name(fu) == text) return fu;
  return std::nullopt;
}

Cond invert(Cond cond) {
  switch (cond) {
    case Cond::Eq: return Cond::Ne;
    case Cond::Ne: return Cond::Eq;
    case Cond::Lt: return Cond::Ge;
    case Cond::Ge: return Cond::Lt;
    case Cond::Gt: return Cond::Le;
    case Cond::Le: return Cond::Gt;
  }
  return cond;
}

namespace {

struct Shape {
  bool dst;
  std::size_t srcs;
  bool imm;
  bool target;
};

Shape shape_of(Kind kind) {
  switch (kind) {
    case Kind::Movi: return {true, 0, true, false};
    case Kind::Movr: return {true, 1, false, false};
    case Kind::Add3:
    case Kind::Sub3: return {true, 2, false, false};
    case Kind::Addi:
    case Kind::Subi: return {true, 0, true, false};
    case Kind::And:
    case Kind::Orr:
    case Kind::Eor:
    case Kind::Bic: return {true, 1, false, false};
    case Kind::Lsli:
    case Kind::Lsri:
    case Kind::Asri: return {true, 1, true, false};
    case Kind::Cmpr: return {false, 2, false, false};
    case Kind::Cmpi: return {false, 1, true, false};
    case Kind::B:
    case Kind::Bcc: return {false, 0, false, true};
    case Kind::Ldr:
    case Kind::Ldrb: return {true, 1, true, false};
    case Kind::Str:
    case Kind::Strb: return {false, 2, true, false};
    case Kind::Push: return {false, 1, false, false};
    case Kind::Pop: return {true, 0, false, false};
    case Kind::Nop:
    case Kind::Halt: return {false, 0, false, false};
  }
  return {};
}

}  // namespace

std::optional<std::string> check_operands(const Instruction& instr) {
  const Shape shape = shape_of(instr.kind);
  const std::string name(kind_name(instr.kind));
  if (shape.dst != instr.dst.has_value()) return name + ": destination register mismatch";
  if (shape.srcs != instr.srcs.size()) return name + ": wrong number of source registers";
  if (shape.imm != instr.imm.has_value()) return name + ": immediate operand mismatch";
  if (shape.target != instr.target.has_value()) return name + ": branch target mismatch";
  for (Reg reg : instr.srcs)
    if (reg.index >= kNumRegs) return name + ": register out of range";
  if (instr.dst && instr.dst->index >= kNumRegs) return name + ": register out of range";

  if (!instr.imm) return std::nullopt;
  const std::int32_t v = *instr.imm;
  switch (instr.kind) {
    case Kind::Movi:
    case Kind::Addi:
    case Kind::Subi:
    case Kind::Cmpi:
      if (v < 0 || v > 255) return name + ": immediate " + std::to_string(v) + " outside [0,255]";
      break;
    case Kind::Lsli:
    case Kind::Lsri:
    case Kind::Asri:
      if (v < 0 || v > 31) return name + ": shift amount " + std::to_string(v) + " outside [0,31]";
      break;
    case Kind::Ldr:
    case Kind::Str:
      if (v < 0 || v > 124) return name + ": offset " + std::to_string(v) + " outside [0,124]";
      if (v % 4 != 0) return name + ": offset " + std::to_string(v) + " not word-aligned";
      break;
    case Kind::Ldrb:
    case Kind::Strb:
      if (v < 0 || v > 124) return name + ": offset " + std::to_string(v) + " outside [0,124]";
      break;
    default:
      break;
  }
  return std::nullopt;
}

namespace ins {
namespace {

Instruction checked(Instruction instr) {
  if (auto problem = check_operands(instr)) throw Error(*problem);
  return instr;
}

}  // namespace

Instruction movi(Reg rd, std::int32_t imm) { return checked({.kind = Kind::Movi, .dst = rd, .imm = imm}); }
Instruction movr(Reg rd, Reg rs) { return checked({.kind = Kind::Movr, .dst = rd, .srcs = {rs}}); }
Instruction add3(Reg rd, Reg rs, Reg rt) {
  return checked({.kind = Kind::Add3, .dst = rd, .srcs = {rs, rt}});
}
Instruction sub3(Reg rd, Reg rs, Reg rt) {
  return checked({.kind = Kind::Sub3, .dst = rd, .srcs = {rs, rt}});
}
Instruction addi(Reg rd, std::int32_t imm) { return checked({.kind = Kind::Addi, .dst = rd, .imm = imm}); }
Instruction subi(Reg rd, std::int32_t imm) { return checked({.kind = Kind::Subi, .dst = rd, .imm = imm}); }
Instruction alu2(Kind kind, Reg rd, Reg rs) { return checked({.kind = kind, .dst = rd, .srcs = {rs}}); }
Instruction shift(Kind kind, Reg rd, Reg rs, std::int32_t amount) {
  return checked({.kind = kind, .dst = rd, .srcs = {rs}, .imm = amount});
}
Instruction cmpr(Reg rs, Reg rt) { return checked({.kind = Kind::Cmpr, .srcs = {rs, rt}}); }
Instruction cmpi(Reg rs, std::int32_t imm) { return checked({.kind = Kind::Cmpi, .srcs = {rs}, .imm = imm}); }
Instruction b(std::string label) { return checked({.kind = Kind::B, .target = std::move(label)}); }
Instruction bcc(Cond cond, std::string label) {
  return checked({.kind = Kind::Bcc, .cond = cond, .target = std::move(label)});
}
Instruction mem(Kind kind, Reg rt, Reg rb, std::int32_t offset) {
  if (is_load(kind) && kind != Kind::Pop) return checked({.kind = kind, .dst = rt, .srcs = {rb}, .imm = offset});
  return checked({.kind = kind, .srcs = {rt, rb}, .imm = offset});
}
Instruction push(Reg reg) { return checked({.kind = Kind::Push, .srcs = {reg}}); }
Instruction pop(Reg reg) { return checked({.kind = Kind::Pop, .dst = reg}); }
Instruction nop() { return {.kind = Kind::Nop}; }
Instruction halt() { return {.kind = Kind::Halt}; }

}  // namespace ins

Effects reads_writes(const Instruction& instr) {
  Effects fx;
  for (Reg reg : instr.srcs) fx.reads.set(reg.index);
  if (instr.dst) fx.writes.set(instr.dst->index);
  switch (instr.kind) {
    // Two-operand forms read their destination.
    case Kind::Addi:
    case Kind::Subi:
    case Kind::And:
    case Kind::Orr:
    case Kind::Eor:
    case Kind::Bic:
      fx.reads.set(instr.dst->index);
      break;
    case Kind::Cmpr:
    case Kind::Cmpi:
      fx.writes.set(kFlagsResource);
      break;
    case Kind::Bcc:
      fx.reads.set(kFlagsResource);
      break;
    case Kind::Ldr:
    case Kind::Ldrb:
      fx.mem = MemEffect::Load;
      break;
    case Kind::Str:
    case Kind::Strb:
      fx.mem = MemEffect::Store;
      break;
    case Kind::Push:
      fx.reads.set(kSpResource);
      fx.writes.set(kSpResource);
      fx.mem = MemEffect::Store;
      break;
    case Kind::Pop:
      fx.reads.set(kSpResource);
      fx.writes.set(kSpResource);
      fx.mem = MemEffect::Load;
      break;
    default:
      break;
  }
  return fx;
}

std::size_t Program::label_index(const std::string& label) const {
  auto it = labels.find(label);
  if (it == labels.end()) throw Error("undefined label '" + label + "'");
  return it->second;
}

std::size_t Program::target_index(const Instruction& branch) const {
  if (!branch.target) throw Error("instruction has no branch target");
  return label_index(*branch.target);
}

std::size_t Program::entry_index() const { return entry ? label_index(*entry) : 0; }

std::vector<std::string> Program::labels_at(std::size_t index) const {
  std::vector<std::string> out;
  for (const auto& [name, at] : labels)
    if (at == index) out.push_back(name);
  return out;
}

std::string Program::fresh_label(std::string_view stem) const {
  std::string base(stem);
  if (!labels.contains(base)) return base;
  for (int n = 1;; ++n) {
    std::string candidate = base + "_" + std::to_string(n);
    if (!labels.contains(candidate)) return candidate;
  }
}

void validate(const Program& program) {
  for (const auto& [name, at] : program.labels)
    if (at >= program.instrs.size())
      throw Error("label '" + name + "' points past the last instruction");
  for (std::size_t i = 0; i < program.instrs.size(); ++i) {
    const Instruction& instr = program.instrs[i];
    if (auto problem = check_operands(instr))
      throw Error("instruction " + std::to_string(i) + ": " + *problem);
    if (instr.target && !program.labels.contains(*instr.target))
      throw Error("instruction " + std::to_string(i) + ": undefined label '" + *instr.target + "'");
  }
  if (program.entry && !program.labels.contains(*program.entry))
    throw Error("entry label '" + *program.entry + "' is undefined");
}

}  // namespace pipeforge
