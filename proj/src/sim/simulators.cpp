#include <fmt/format.h>

#include "machine.hpp"

namespace pipeforge {

namespace {

void check_budget(std::uint64_t cycles, const MachineInit& init) {
  if (cycles > init.max_cycles)
    throw SimError(SimErrorKind::BudgetExceeded, fmt::format("cycle budget of {} exceeded", init.max_cycles));
}

}  // namespace

SimResult run_reference(const Program& program, const MachineInit& init, const Timing& timing,
                        const RetireHook& hook) {
  SimResult res;
  res.final = initial_state(program, init);
  detail::Scoreboard board;
  std::uint64_t cycle = 0;
  std::size_t pc = program.instrs.empty() ? 0 : program.entry_index();

  for (;;) {
    check_budget(cycle, init);
    if (pc >= program.instrs.size())
      throw SimError(SimErrorKind::FellOffEnd, fmt::format("execution ran past the last instruction (pc={})", pc));
    const Instruction& in = program.instrs[pc];

    if (const std::uint64_t ready = board.ready_for(in); ready > cycle) {
      res.stall_cycles += ready - cycle;
      cycle = ready;
    }
    const detail::Outcome out = detail::evaluate(in, res.final);
    detail::commit(res.final, out);
    board.produce(in, cycle, timing);
    ++cycle;
    ++res.issued;
    if (in.kind != Kind::Nop) ++res.retired;
    if (hook) hook(pc, out.taken);

    if (out.halt) break;
    if (out.taken) {
      ++res.taken_branches;
      res.flush_cycles += static_cast<std::uint64_t>(timing.flush_penalty);
      cycle += static_cast<std::uint64_t>(timing.flush_penalty);
      pc = program.target_index(in);
    } else {
      ++pc;
    }
  }
  res.cycles = cycle;
  return res;
}

SimResult run_reference(const Program& program, const MachineInit& init, int flush_penalty) {
  Timing timing;
  timing.flush_penalty = flush_penalty;
  return run_reference(program, init, timing);
}

SimResult run_scheduled(const Schedule& schedule, const MachineInit& init) {
  const Program& program = schedule.program;
  const Timing timing = schedule.config.timing();
  SimResult res;
  res.final = initial_state(program, init);
  detail::Scoreboard board;
  std::uint64_t cycle = 0;

  if (schedule.slots.empty()) throw SimError(SimErrorKind::FellOffEnd, "empty schedule");
  std::size_t slot = schedule.slot_of_block_start(block_of(schedule.blocks, program.entry_index()));
  std::vector<detail::Outcome> outcomes;

  for (;;) {
    check_budget(cycle, init);
    if (slot >= schedule.slots.size())
      throw SimError(SimErrorKind::FellOffEnd, fmt::format("execution ran past the last word (slot={})", slot));
    const LongWord& word = schedule.slots[slot];

    std::uint64_t ready = 0;
    for (const auto& entry : word)
      if (entry) ready = std::max(ready, board.ready_for(program.instrs[*entry]));
    if (ready > cycle) {
      res.stall_cycles += ready - cycle;
      cycle = ready;
    }

    // All reads of the word see the state before any of its writes.
    outcomes.clear();
    for (const auto& entry : word)
      if (entry) outcomes.push_back(detail::evaluate(program.instrs[*entry], res.final));

    bool halt = false;
    std::optional<std::size_t> taken_branch;
    std::size_t k = 0;
    for (const auto& entry : word) {
      if (!entry) continue;
      const Instruction& in = program.instrs[*entry];
      const detail::Outcome& out = outcomes[k++];
      detail::commit(res.final, out);
      board.produce(in, cycle, timing);
      if (in.kind != Kind::Nop) ++res.retired;
      halt = halt || out.halt;
      if (out.taken) taken_branch = *entry;
    }
    ++cycle;
    ++res.issued;

    if (halt) break;
    if (taken_branch) {
      ++res.taken_branches;
      res.flush_cycles += static_cast<std::uint64_t>(timing.flush_penalty);
      cycle += static_cast<std::uint64_t>(timing.flush_penalty);
      const std::size_t target = program.target_index(program.instrs[*taken_branch]);
      slot = schedule.slot_of_block_start(block_of(schedule.blocks, target));
    } else {
      ++slot;
    }
  }
  res.cycles = cycle;
  return res;
}

SimResult run_scheduled_checked(const Schedule& schedule, const MachineInit& init) {
  SimResult scheduled = run_scheduled(schedule, init);
  SimResult reference = run_reference(schedule.program, init, schedule.config.timing());
  if (!(scheduled.final == reference.final))
    throw InternalError(fmt::format("scheduled run of '{}' diverged from the reference (digest {} vs {})",
                                    schedule.program.name, scheduled.final.digest(), reference.final.digest()));
  return scheduled;
}

}  // namespace pipeforge
