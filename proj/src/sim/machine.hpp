// Instruction semantics shared by the reference and multi-pipe simulators.
#pragma once

#include <cstdint>
#include <optional>

#include "pipeforge/sim.hpp"

namespace pipeforge::detail {

struct MemWrite {
  std::uint32_t addr = 0;
  std::uint32_t value = 0;
  std::uint32_t size = 0;  // 1 or 4
};

// Everything an instruction changes, computed from a state it does not modify.
struct Outcome {
  std::optional<std::pair<std::uint8_t, std::uint32_t>> reg_write;
  std::optional<Flags> flags;
  std::optional<std::uint32_t> sp;
  std::optional<MemWrite> mem_write;
  bool taken = false;
  bool halt = false;
};

Outcome evaluate(const Instruction& in, const MachineState& state);
void commit(MachineState& state, const Outcome& outcome);

// Result-ready bookkeeping for the interlock model.
class Scoreboard {
 public:
  // Earliest cycle at which every resource `in` reads is available.
  std::uint64_t ready_for(const Instruction& in) const;
  void produce(const Instruction& in, std::uint64_t issue_cycle, const Timing& timing);

 private:
  std::array<std::uint64_t, kNumRegs + 2> ready_{};
};

}  // namespace pipeforge::detail
