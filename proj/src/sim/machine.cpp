#include "machine.hpp"

#include <fmt/format.h>

namespace pipeforge {

std::uint32_t MachineState::load_word(std::uint32_t addr) const {
  if (std::uint64_t{addr} + 4 > mem.size())
    throw SimError(SimErrorKind::MemoryOutOfBounds, fmt::format("word load at 0x{:x} out of bounds", addr));
  return std::uint32_t{mem[addr]} | std::uint32_t{mem[addr + 1]} << 8 | std::uint32_t{mem[addr + 2]} << 16 |
         std::uint32_t{mem[addr + 3]} << 24;
}

std::string MachineState::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  auto mix32 = [&](std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) mix(static_cast<std::uint8_t>(v >> s));
  };
  for (std::uint32_t v : regs) mix32(v);
  mix(static_cast<std::uint8_t>(flags.n | flags.z << 1 | flags.c << 2 | flags.v << 3));
  mix32(sp);
  for (std::uint8_t b : mem) mix(b);
  return fmt::format("{:016x}", h);
}

MachineState initial_state(const Program& program, const MachineInit& init) {
  MachineState state;
  state.regs = init.regs;
  state.mem.assign(init.mem_size, 0);
  state.sp = init.mem_size;
  auto poke = [&](std::uint64_t addr, std::uint8_t value) {
    if (addr >= state.mem.size())
      throw SimError(SimErrorKind::MemoryOutOfBounds, fmt::format("initial data at 0x{:x} out of bounds", addr));
    state.mem[addr] = value;
  };
  for (const DataDirective& d : program.data)
    for (std::size_t k = 0; k < d.bytes.size(); ++k) poke(std::uint64_t{d.addr} + k, d.bytes[k]);
  for (const auto& [addr, value] : init.mem) poke(addr, value);
  return state;
}

bool condition_holds(Cond cond, const Flags& f) {
  switch (cond) {
    case Cond::Eq: return f.z;
    case Cond::Ne: return !f.z;
    case Cond::Lt: return f.n != f.v;
    case Cond::Ge: return f.n == f.v;
    case Cond::Gt: return !f.z && f.n == f.v;
    case Cond::Le: return f.z || f.n != f.v;
  }
  return false;
}

namespace detail {

namespace {

Flags compare(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t diff = a - b;
  Flags f;
  f.n = (diff >> 31) != 0;
  f.z = diff == 0;
  f.c = a >= b;
  f.v = (((a ^ b) & (a ^ diff)) >> 31) != 0;
  return f;
}

void check_bounds(const MachineState& state, std::uint32_t addr, std::uint32_t size) {
  if (std::uint64_t{addr} + size > state.mem.size())
    throw SimError(SimErrorKind::MemoryOutOfBounds,
                   fmt::format("{}-byte access at 0x{:x} outside {}-byte memory", size, addr, state.mem.size()));
}

}  // namespace

Outcome evaluate(const Instruction& in, const MachineState& s) {
  Outcome out;
  auto src = [&](std::size_t k) { return s.regs[in.srcs[k].index]; };
  auto dst_val = [&] { return s.regs[in.dst->index]; };
  auto write = [&](std::uint32_t v) { out.reg_write = {{in.dst->index, v}}; };
  const auto imm = static_cast<std::uint32_t>(in.imm.value_or(0));

  switch (in.kind) {
    case Kind::Movi: write(imm); break;
    case Kind::Movr: write(src(0)); break;
    case Kind::Add3: write(src(0) + src(1)); break;
    case Kind::Sub3: write(src(0) - src(1)); break;
    case Kind::Addi: write(dst_val() + imm); break;
    case Kind::Subi: write(dst_val() - imm); break;
    case Kind::And: write(dst_val() & src(0)); break;
    case Kind::Orr: write(dst_val() | src(0)); break;
    case Kind::Eor: write(dst_val() ^ src(0)); break;
    case Kind::Bic: write(dst_val() & ~src(0)); break;
    case Kind::Lsli: write(imm >= 32 ? 0 : src(0) << imm); break;
    case Kind::Lsri: write(imm >= 32 ? 0 : src(0) >> imm); break;
    case Kind::Asri: write(static_cast<std::uint32_t>(static_cast<std::int32_t>(src(0)) >> imm)); break;
    case Kind::Cmpr: out.flags = compare(src(0), src(1)); break;
    case Kind::Cmpi: out.flags = compare(src(0), imm); break;
    case Kind::B: out.taken = true; break;
    case Kind::Bcc: out.taken = condition_holds(in.cond, s.flags); break;
    case Kind::Ldr: {
      const std::uint32_t addr = src(0) + imm;
      check_bounds(s, addr, 4);
      write(s.load_word(addr));
      break;
    }
    case Kind::Ldrb: {
      const std::uint32_t addr = src(0) + imm;
      check_bounds(s, addr, 1);
      write(s.mem[addr]);
      break;
    }
    case Kind::Str: {
      const std::uint32_t addr = src(1) + imm;
      check_bounds(s, addr, 4);
      out.mem_write = MemWrite{addr, src(0), 4};
      break;
    }
    case Kind::Strb: {
      const std::uint32_t addr = src(1) + imm;
      check_bounds(s, addr, 1);
      out.mem_write = MemWrite{addr, src(0) & 0xFFu, 1};
      break;
    }
    case Kind::Push: {
      if (s.sp < 4) throw SimError(SimErrorKind::StackOverflow, "PUSH below address 0");
      const std::uint32_t addr = s.sp - 4;
      check_bounds(s, addr, 4);
      out.mem_write = MemWrite{addr, src(0), 4};
      out.sp = addr;
      break;
    }
    case Kind::Pop: {
      if (std::uint64_t{s.sp} + 4 > s.mem.size()) throw SimError(SimErrorKind::StackUnderflow, "POP on empty stack");
      write(s.load_word(s.sp));
      out.sp = s.sp + 4;
      break;
    }
    case Kind::Nop: break;
    case Kind::Halt: out.halt = true; break;
  }
  return out;
}

void commit(MachineState& s, const Outcome& o) {
  if (o.reg_write) s.regs[o.reg_write->first] = o.reg_write->second;
  if (o.flags) s.flags = *o.flags;
  if (o.sp) s.sp = *o.sp;
  if (o.mem_write)
    for (std::uint32_t k = 0; k < o.mem_write->size; ++k)
      s.mem[o.mem_write->addr + k] = static_cast<std::uint8_t>(o.mem_write->value >> (8 * k));
}

std::uint64_t Scoreboard::ready_for(const Instruction& in) const {
  const ResourceSet reads = reads_writes(in).reads;
  std::uint64_t ready = 0;
  for (std::size_t r = 0; r < ready_.size(); ++r)
    if (reads.test(r)) ready = std::max(ready, ready_[r]);
  return ready;
}

void Scoreboard::produce(const Instruction& in, std::uint64_t issue_cycle, const Timing& timing) {
  const ResourceSet writes = reads_writes(in).writes;
  const std::uint64_t at = issue_cycle + static_cast<std::uint64_t>(timing.latency(fu_class_of(in.kind)));
  for (std::size_t r = 0; r < ready_.size(); ++r)
    if (writes.test(r)) ready_[r] = at;
}

}  // namespace detail
}  // namespace pipeforge
