// Reference (single-issue) and multi-pipe simulators.
//
// Both share one cycle model: an issue takes one cycle, a taken branch costs
// the flush penalty before the target issues, and a consumer that would read a
// result before the producer's latency has elapsed stalls (interlock). The
// scheduler honours latencies inside a block, so scheduled runs only stall on
// hazards that cross a block boundary.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/isa.hpp"
#include "pipeforge/schedule.hpp"

namespace pipeforge {

enum class SimErrorKind { BudgetExceeded, MemoryOutOfBounds, StackUnderflow, StackOverflow, FellOffEnd };

class SimError : public Error {
 public:
  SimError(SimErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  SimErrorKind kind() const { return kind_; }

 private:
  SimErrorKind kind_;
};

inline constexpr std::uint32_t kDefaultMemSize = 64 * 1024;

struct MachineInit {
  std::array<std::uint32_t, kNumRegs> regs{};
  std::map<std::uint32_t, std::uint8_t> mem;  // applied after the program's .data image
  std::uint64_t max_cycles = 50'000'000;
  std::uint32_t mem_size = kDefaultMemSize;
};

struct Flags {
  bool n = false, z = false, c = false, v = false;
  bool operator==(const Flags&) const = default;
};

struct MachineState {
  std::array<std::uint32_t, kNumRegs> regs{};
  Flags flags;
  std::uint32_t sp = 0;
  std::vector<std::uint8_t> mem;

  std::uint32_t load_word(std::uint32_t addr) const;
  // FNV-1a over registers, flags, sp and memory; stable across runs.
  std::string digest() const;
  bool operator==(const MachineState&) const = default;
};

MachineState initial_state(const Program& program, const MachineInit& init);

bool condition_holds(Cond cond, const Flags& flags);

struct SimResult {
  std::uint64_t cycles = 0;
  std::uint64_t issued = 0;   // instructions (reference) or long words (scheduled)
  std::uint64_t retired = 0;  // non-NOP instructions executed
  std::uint64_t taken_branches = 0;
  std::uint64_t flush_cycles = 0;
  std::uint64_t stall_cycles = 0;
  MachineState final;
};

// Called once per retired instruction with its index and whether it branched.
using RetireHook = std::function<void(std::size_t index, bool taken)>;

SimResult run_reference(const Program& program, const MachineInit& init, const Timing& timing,
                        const RetireHook& hook = {});
SimResult run_reference(const Program& program, const MachineInit& init, int flush_penalty);

SimResult run_scheduled(const Schedule& schedule, const MachineInit& init);

// run_scheduled plus a reference run of the schedule's own program; throws
// InternalError if the final states differ.
SimResult run_scheduled_checked(const Schedule& schedule, const MachineInit& init);

}  // namespace pipeforge
