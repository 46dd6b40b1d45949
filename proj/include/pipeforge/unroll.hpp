// Loop unrolling over single-block counted loops.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/frontend.hpp"
#include "pipeforge/isa.hpp"
#include "pipeforge/sim.hpp"

namespace pipeforge {

enum class UnrollMode { Divisible, Remainder };

std::string_view unroll_mode_name(UnrollMode mode);
std::optional<UnrollMode> parse_unroll_mode(std::string_view text);

struct UnrollSpec {
  int luf = 1;
  UnrollMode mode = UnrollMode::Remainder;
  Reg scratch = Reg{7};
};

enum class UnrollErrorKind { BadFactor, LoopNotFound, ScratchConflict, TripNotDivisible, NoLoop, Unsupported };

class UnrollError : public Error {
 public:
  UnrollError(UnrollErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  UnrollErrorKind kind() const { return kind_; }

 private:
  UnrollErrorKind kind_;
};

// Copies of the body, with induction uses in copy c shifted by c*step:
//   * [ri, #off] addresses fold the shift into the offset when it still encodes;
//   * MOV/LSL/ADD/SUB whose result is linear in ri get a trailing ADDI/SUBI;
//   * anything else reads a scratch copy (MOV r7, ri; ADDI r7, #shift).
// Divisible mode closes the copies with ADDI ri, #luf*step; CMP; Bcc.
// Remainder mode guards the unrolled loop so it only runs while luf full
// iterations remain, then finishes in a copy of the original loop.
Program unroll(const Program& program, const LoopDescriptor& loop, const UnrollSpec& spec);

// Unrolls every loop find_loops reports. luf > 1 on a loop-free program is
// an error ("no unrollable loop").
Program unroll_all(const Program& program, const UnrollSpec& spec);

// Trip count of each entry into `loop`, in execution order.
std::vector<std::int64_t> measure_trips(const Program& program, const LoopDescriptor& loop, const MachineInit& init);

// Final registers (scratch excluded) and memory agree under the reference
// simulator. In divisible mode every dynamic trip count of the original's
// loops must be a multiple of luf, else TripNotDivisible is thrown.
bool semantic_check(const Program& original, const Program& unrolled, const MachineInit& init,
                    const UnrollSpec& spec = {});

}  // namespace pipeforge
