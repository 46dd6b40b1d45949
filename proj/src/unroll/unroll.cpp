#include "pipeforge/unroll.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

namespace pipeforge {

std::string_view unroll_mode_name(UnrollMode mode) {
  return mode == UnrollMode::Divisible ? "divisible" : "remainder";
}

std::optional<UnrollMode> parse_unroll_mode(std::string_view text) {
  if (text == "divisible") return UnrollMode::Divisible;
  if (text == "remainder") return UnrollMode::Remainder;
  return std::nullopt;
}

namespace {

constexpr std::int64_t kImmMax = 255;

// rd += v as a run of ADDI/SUBI, each within the 8-bit immediate.
std::vector<Instruction> add_const(Reg rd, std::int64_t v) {
  std::vector<Instruction> out;
  while (v != 0) {
    const std::int64_t chunk = std::clamp(v, -kImmMax, kImmMax);
    out.push_back(chunk > 0 ? ins::addi(rd, static_cast<std::int32_t>(chunk))
                            : ins::subi(rd, static_cast<std::int32_t>(-chunk)));
    v -= chunk;
  }
  return out;
}

std::size_t chunks(std::int64_t v) { return static_cast<std::size_t>((std::llabs(v) + kImmMax - 1) / kImmMax); }

bool is_data_access(Kind k) { return k == Kind::Ldr || k == Kind::Str || k == Kind::Ldrb || k == Kind::Strb; }

// Multiplier of ri in the value written by `in`, when that value is
// otherwise independent of ri.
std::optional<std::int64_t> linear_coefficient(const Instruction& in, Reg ri) {
  auto uses = [&](std::size_t k) -> std::int64_t { return in.srcs.size() > k && in.srcs[k] == ri ? 1 : 0; };
  switch (in.kind) {
    case Kind::Movr: return uses(0);
    case Kind::Lsli: return uses(0) << *in.imm;
    case Kind::Add3: return uses(0) + uses(1);
    case Kind::Sub3: return uses(0) - uses(1);
    default: return std::nullopt;
  }
}

struct CopyWriter {
  Reg ri;
  Reg scratch;
  bool used_scratch = false;
  std::vector<Instruction> out;

  void emit(const Instruction& in, std::int64_t d) {
    const bool reads_ri = reads_writes(in).reads.test(ri.index);
    if (d == 0 || !reads_ri) {
      out.push_back(in);
      return;
    }
    if (is_data_access(in.kind) && in.srcs.back() == ri && (is_load(in.kind) || in.srcs[0] != ri)) {
      Instruction moved = in;
      const std::int64_t off = static_cast<std::int64_t>(*in.imm) + d;
      if (off >= INT32_MIN && off <= INT32_MAX) {
        moved.imm = static_cast<std::int32_t>(off);
        if (!check_operands(moved)) {
          out.push_back(moved);
          return;
        }
      }
    }
    if (auto coef = linear_coefficient(in, ri)) {
      const std::int64_t adj = *coef * d;
      if (chunks(adj) <= 2) {
        out.push_back(in);
        for (const Instruction& a : add_const(*in.dst, adj)) out.push_back(a);
        return;
      }
    }
    out.push_back(ins::movr(scratch, ri));
    for (const Instruction& a : add_const(scratch, d)) out.push_back(a);
    Instruction swapped = in;
    for (Reg& s : swapped.srcs)
      if (s == ri) s = scratch;
    out.push_back(swapped);
    used_scratch = true;
  }

  void append(const std::vector<Instruction>& more) { out.insert(out.end(), more.begin(), more.end()); }
};

const LoopDescriptor* match_loop(const std::vector<LoopDescriptor>& loops, const LoopDescriptor& want) {
  for (const LoopDescriptor& l : loops)
    if (l == want) return &l;
  return nullptr;
}

}  // namespace

Program unroll(const Program& program, const LoopDescriptor& loop, const UnrollSpec& spec) {
  if (spec.luf < 1) throw UnrollError(UnrollErrorKind::BadFactor, fmt::format("unroll factor must be >= 1, got {}", spec.luf));
  const std::vector<LoopDescriptor> loops = find_loops(program, build_cfg(program));
  if (!match_loop(loops, loop))
    throw UnrollError(UnrollErrorKind::LoopNotFound, fmt::format("no loop at '{}' matches the descriptor", loop.header_label));
  if (spec.luf == 1) return program;

  const std::size_t head = loop.header_index;
  const std::size_t back = loop.back_branch_index;
  const Reg ri = loop.induction;
  const std::string scratch_name = fmt::format("r{}", spec.scratch.index);

  for (std::size_t i = head; i <= back; ++i) {
    const Effects fx = reads_writes(program.instrs[i]);
    if (fx.reads.test(spec.scratch.index) || fx.writes.test(spec.scratch.index))
      throw UnrollError(UnrollErrorKind::ScratchConflict,
                        fmt::format("loop '{}' uses {} (instruction {}), which is reserved as unroll scratch",
                                    loop.header_label, scratch_name, i));
  }
  if (back + 1 >= program.instrs.size())
    throw UnrollError(UnrollErrorKind::Unsupported, fmt::format("loop '{}' ends the program", loop.header_label));
  if (program.entry) {
    const std::size_t e = program.entry_index();
    if (e > head && e <= back)
      throw UnrollError(UnrollErrorKind::Unsupported, fmt::format("entry point lies inside loop '{}'", loop.header_label));
  }
  if (spec.mode == UnrollMode::Divisible && loop.is_static() && loop.static_trip() % spec.luf != 0)
    throw UnrollError(UnrollErrorKind::TripNotDivisible,
                      fmt::format("loop '{}' runs {} times, not a multiple of {}", loop.header_label, loop.static_trip(),
                                  spec.luf));

  const Instruction& cmp = program.instrs[loop.cmp_index];
  const std::int64_t step = loop.step;

  Program out;
  out.name = program.name;
  out.data = program.data;
  out.entry = program.entry;
  out.instrs.assign(program.instrs.begin(), program.instrs.begin() + static_cast<std::ptrdiff_t>(head));
  for (const auto& [name, at] : program.labels)
    if (at <= head) out.labels.emplace(name, at);

  CopyWriter copies{ri, spec.scratch};
  for (int c = 0; c < spec.luf; ++c) {
    int phase = 0;
    for (std::size_t i = head; i < loop.cmp_index; ++i) {
      if (i == loop.update_index) {
        phase = 1;
        continue;
      }
      copies.emit(program.instrs[i], (c + phase) * step);
    }
  }
  copies.append(add_const(ri, spec.luf * step));

  if (spec.mode == UnrollMode::Divisible) {
    copies.out.push_back(cmp);
    copies.out.push_back(ins::bcc(loop.cond, loop.header_label));
    out.instrs.insert(out.instrs.end(), copies.out.begin(), copies.out.end());
  } else {
    // Continue unrolled only while ri + (luf-1)*step still passes the test,
    // i.e. compare ri against bound - k.
    const std::int64_t k = (spec.luf - 1) * step;
    std::vector<Instruction> setup;
    Instruction guard_cmp;
    if (cmp.kind == Kind::Cmpi && *cmp.imm - k >= 0 && *cmp.imm - k <= kImmMax) {
      guard_cmp = ins::cmpi(ri, static_cast<std::int32_t>(*cmp.imm - k));
    } else {
      setup.push_back(cmp.kind == Kind::Cmpi ? ins::movi(spec.scratch, *cmp.imm) : ins::movr(spec.scratch, cmp.srcs[1]));
      for (const Instruction& a : add_const(spec.scratch, -k)) setup.push_back(a);
      guard_cmp = ins::cmpr(ri, spec.scratch);
    }
    Cond main_cond = loop.cond;
    if (main_cond == Cond::Ne) main_cond = step > 0 ? Cond::Lt : Cond::Gt;

    Program names = program;
    auto fresh = [&](const std::string& stem) {
      std::string name = names.fresh_label(stem);
      names.labels.emplace(name, 0);
      return name;
    };
    const std::string main_label = fresh(loop.header_label + "_unrolled");
    const std::string rem_label = fresh(loop.header_label + "_rem");
    const std::string exit_label = fresh(loop.header_label + "_exit");

    out.instrs.insert(out.instrs.end(), setup.begin(), setup.end());
    out.instrs.push_back(guard_cmp);
    out.instrs.push_back(ins::bcc(invert(main_cond), rem_label));

    out.labels[main_label] = out.instrs.size();
    out.instrs.insert(out.instrs.end(), copies.out.begin(), copies.out.end());
    if (copies.used_scratch) out.instrs.insert(out.instrs.end(), setup.begin(), setup.end());
    out.instrs.push_back(guard_cmp);
    out.instrs.push_back(ins::bcc(main_cond, main_label));

    out.instrs.push_back(cmp);
    out.instrs.push_back(ins::bcc(invert(loop.cond), exit_label));

    out.labels[rem_label] = out.instrs.size();
    for (std::size_t i = head; i < back; ++i) out.instrs.push_back(program.instrs[i]);
    out.instrs.push_back(ins::bcc(loop.cond, rem_label));
    out.labels[exit_label] = out.instrs.size();
  }

  const std::size_t tail = out.instrs.size();
  out.instrs.insert(out.instrs.end(), program.instrs.begin() + static_cast<std::ptrdiff_t>(back) + 1, program.instrs.end());
  for (const auto& [name, at] : program.labels)
    if (at > back) {
      if (out.labels.contains(name)) throw InternalError(fmt::format("label '{}' emitted twice", name));
      out.labels.emplace(name, at - (back + 1) + tail);
    }
  validate(out);
  return out;
}

Program unroll_all(const Program& program, const UnrollSpec& spec) {
  if (spec.luf < 1) throw UnrollError(UnrollErrorKind::BadFactor, fmt::format("unroll factor must be >= 1, got {}", spec.luf));
  const std::vector<LoopDescriptor> loops = find_loops(program, build_cfg(program));
  if (loops.empty()) {
    if (spec.luf > 1) throw UnrollError(UnrollErrorKind::NoLoop, "no unrollable loop");
    return program;
  }
  std::vector<std::size_t> heads;
  for (const LoopDescriptor& l : loops) heads.push_back(l.header_index);
  std::sort(heads.rbegin(), heads.rend());

  // Later loops first so earlier indices stay put.
  Program current = program;
  for (std::size_t head : heads) {
    const std::vector<LoopDescriptor> now = find_loops(current, build_cfg(current));
    auto it = std::find_if(now.begin(), now.end(), [&](const LoopDescriptor& l) { return l.header_index == head; });
    if (it == now.end()) throw InternalError(fmt::format("loop at {} vanished during unrolling", head));
    current = unroll(current, *it, spec);
  }
  return current;
}

std::vector<std::int64_t> measure_trips(const Program& program, const LoopDescriptor& loop, const MachineInit& init) {
  std::vector<std::int64_t> trips;
  std::int64_t count = 0;
  run_reference(program, init, Timing{}, [&](std::size_t index, bool taken) {
    if (index != loop.back_branch_index) return;
    ++count;
    if (!taken) {
      trips.push_back(count);
      count = 0;
    }
  });
  return trips;
}

bool semantic_check(const Program& original, const Program& unrolled, const MachineInit& init, const UnrollSpec& spec) {
  if (spec.mode == UnrollMode::Divisible && spec.luf > 1) {
    for (const LoopDescriptor& loop : find_loops(original, build_cfg(original)))
      for (std::int64_t t : measure_trips(original, loop, init))
        if (t % spec.luf != 0)
          throw UnrollError(UnrollErrorKind::TripNotDivisible,
                            fmt::format("loop '{}' runs {} times, not a multiple of {}", loop.header_label, t, spec.luf));
  }
  const MachineState a = run_reference(original, init, Timing{}).final;
  const MachineState b = run_reference(unrolled, init, Timing{}).final;
  for (std::size_t r = 0; r < kNumRegs; ++r)
    if (r != spec.scratch.index && a.regs[r] != b.regs[r]) return false;
  return a.mem == b.mem;
}

}  // namespace pipeforge
