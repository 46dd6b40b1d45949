#include <cstdint>

#include "pipeforge/frontend.hpp"

namespace pipeforge {

namespace {

// Loops whose exit condition moves monotonically toward the bound.
bool condition_fits_step(Cond cond, std::int32_t step) {
  if (step > 0) return cond == Cond::Lt || cond == Cond::Le || cond == Cond::Ne;
  if (step < 0) return cond == Cond::Gt || cond == Cond::Ge || cond == Cond::Ne;
  return false;
}

bool holds(Cond cond, std::int64_t a, std::int64_t b) {
  switch (cond) {
    case Cond::Eq: return a == b;
    case Cond::Ne: return a != b;
    case Cond::Lt: return a < b;
    case Cond::Ge: return a >= b;
    case Cond::Gt: return a > b;
    case Cond::Le: return a <= b;
  }
  return false;
}

// Do-while trip count; nullopt if it does not terminate within the cap or
// leaves the signed 32-bit range.
std::optional<std::int64_t> count_trips(std::int64_t init, std::int32_t step, Cond cond, std::int64_t bound) {
  constexpr std::int64_t kCap = 1 << 24;
  std::int64_t x = init;
  for (std::int64_t n = 1; n <= kCap; ++n) {
    x += step;
    if (x < INT32_MIN || x > INT32_MAX) return std::nullopt;
    if (!holds(cond, x, bound)) return n;
  }
  return std::nullopt;
}

}  // namespace

std::vector<LoopDescriptor> find_loops(const Program& program, const std::vector<BasicBlock>& cfg) {
  std::vector<LoopDescriptor> loops;
  for (const BasicBlock& block : cfg) {
    if (block.terminator != Terminator::Bcc || block.size() < 3) continue;
    const Instruction& branch = program.instrs[block.last];
    if (program.target_index(branch) != block.first) continue;

    const std::size_t cmp_index = block.last - 1;
    const Instruction& cmp = program.instrs[cmp_index];
    if (cmp.kind != Kind::Cmpr && cmp.kind != Kind::Cmpi) continue;
    const Reg induction = cmp.srcs[0];

    LoopBound bound = cmp.kind == Kind::Cmpr ? LoopBound{cmp.srcs[1]} : LoopBound{*cmp.imm};
    if (cmp.kind == Kind::Cmpr && cmp.srcs[1] == induction) continue;

    std::optional<std::size_t> update;
    bool ok = true;
    for (std::size_t i = block.first; i < cmp_index && ok; ++i) {
      const Effects fx = reads_writes(program.instrs[i]);
      if (fx.writes.test(induction.index)) {
        const Instruction& in = program.instrs[i];
        if (update || (in.kind != Kind::Addi && in.kind != Kind::Subi)) ok = false;
        update = i;
      }
      if (const Reg* b = std::get_if<Reg>(&bound); b && fx.writes.test(b->index)) ok = false;
    }
    if (!ok || !update) continue;

    const Instruction& upd = program.instrs[*update];
    const std::int32_t step = upd.kind == Kind::Addi ? *upd.imm : -*upd.imm;
    if (!condition_fits_step(branch.cond, step)) continue;

    LoopDescriptor loop;
    loop.header_label = *branch.target;
    loop.body = block.id;
    loop.induction = induction;
    loop.step = step;
    loop.bound = bound;
    loop.cmp_kind = cmp.kind;
    loop.cond = branch.cond;
    loop.header_index = block.first;
    loop.update_index = *update;
    loop.cmp_index = cmp_index;
    loop.back_branch_index = block.last;

    // Static trip count: entered only by falling through a preheader that
    // sets the induction register to a constant, with an immediate bound.
    bool single_entry = block.id > 0;
    for (std::size_t i = 0; i < program.instrs.size() && single_entry; ++i) {
      const Instruction& in = program.instrs[i];
      if (i != block.last && is_branch(in.kind) && program.target_index(in) == block.first) single_entry = false;
    }
    if (single_entry && cmp.kind == Kind::Cmpi) {
      const BasicBlock& pre = cfg[block.id - 1];
      const bool falls_in = pre.terminator == Terminator::None || pre.terminator == Terminator::Bcc;
      std::optional<std::int64_t> init;
      if (falls_in) {
        for (std::size_t i = pre.last + 1; i-- > pre.first;) {
          const Instruction& in = program.instrs[i];
          if (reads_writes(in).writes.test(induction.index)) {
            if (in.kind == Kind::Movi) init = *in.imm;
            break;
          }
        }
      }
      if (init)
        if (auto trips = count_trips(*init, step, branch.cond, *cmp.imm)) loop.trip_mode = StaticTrip{*trips};
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace pipeforge
