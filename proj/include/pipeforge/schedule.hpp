// Multi-pipe scheduling: machine model, dependence graphs, long-branch
// expansion, and the per-block list scheduler that packs instructions into
// long instruction words.
#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/frontend.hpp"
#include "pipeforge/isa.hpp"

namespace pipeforge {

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class BranchRangeError : public Error {
 public:
  using Error::Error;
};

// Cycle-model knobs shared by both simulators.
struct Timing {
  int flush_penalty = 3;
  int alu_latency = 1;
  int load_latency = 2;

  // Slots until a result of this unit can be consumed.
  int latency(FUClass fu) const {
    switch (fu) {
      case FUClass::Alu: return alu_latency;
      case FUClass::Dmau: return load_latency;
      case FUClass::Bru: return 1;
    }
    return 1;
  }
};

using FUSet = std::set<FUClass>;

// Pipe indices are 0-based in code; pipe 0 is the control-flow pipe
// ("pipe 1" in the config file and reports).
struct PipelineConfig {
  int n_pipes = 2;
  std::vector<FUSet> fu_sets = {{FUClass::Alu, FUClass::Bru}, {FUClass::Alu, FUClass::Dmau}};
  int alu_latency = 1;
  int load_latency = 2;
  int branch_flush_penalty = 3;
  int cond_branch_range_bytes = 256;
  int uncond_branch_range_bytes = 2048;

  // Default heterogeneous profile: pipe 1 {ALU,BRU}, pipe 2 {ALU,DMAU},
  // further pipes {ALU}. A single pipe carries all three units.
  static PipelineConfig with_pipes(int n);

  bool supports(int pipe, FUClass fu) const { return fu_sets.at(static_cast<std::size_t>(pipe)).contains(fu); }
  int read_ports() const { return 2 * n_pipes; }
  int write_ports() const { return n_pipes; }
  Timing timing() const { return {branch_flush_penalty, alu_latency, load_latency}; }
  int latency(FUClass fu) const { return timing().latency(fu); }

  bool operator==(const PipelineConfig&) const = default;
};

void validate(const PipelineConfig& config);

// Key-value machine description ("key = value", '#' comments). Keys: pipes,
// fu.<p> (comma list of ALU/DMAU/BRU, 1-based p), latency.alu, latency.load,
// flush_penalty, cond_branch_range, uncond_branch_range. Missing keys keep
// their defaults; fu.<p> overrides the default profile for that pipe.
PipelineConfig parse_machine_config(std::string_view text);
std::string render_machine_config(const PipelineConfig& config);

enum class DepKind { Raw, War, Waw, Mem, Flag };

std::string_view dep_kind_name(DepKind kind);

struct DepEdge {
  std::size_t from = 0;  // instruction index
  std::size_t to = 0;
  DepKind kind = DepKind::Raw;
  int min_gap = 1;

  bool operator==(const DepEdge&) const = default;
};

struct DependenceGraph {
  std::size_t block = 0;
  std::vector<std::size_t> nodes;
  std::vector<DepEdge> edges;

  bool has_edge(std::size_t from, std::size_t to) const;
  bool has_edge(std::size_t from, std::size_t to, DepKind kind) const;
};

// Register, flag, stack-pointer and memory dependences inside one block.
// Every edge forbids same-slot issue (min_gap >= 1); RAW gaps carry the
// producer's latency.
DependenceGraph build_depgraph(const Program& program, const BasicBlock& block,
                               const PipelineConfig& config = PipelineConfig{});

// Rewrites every conditional branch whose span on the single-pipe layout
// exceeds the conditional range as `B<inverse> skip; B target; skip:`,
// repeating until nothing is out of range. Throws BranchRangeError if an
// unconditional branch is out of its range.
Program expand_long_branches(const Program& program, const PipelineConfig& config);

// Byte distance of a branch on the single-pipe layout.
std::size_t branch_span_bytes(const Program& program, std::size_t branch_index);

struct Placement {
  std::size_t slot = 0;
  int pipe = 0;
  bool operator==(const Placement&) const = default;
};

using LongWord = std::vector<std::optional<std::size_t>>;  // per pipe: instruction index or empty

struct Schedule {
  PipelineConfig config;
  Program program;
  std::vector<BasicBlock> blocks;
  std::vector<LongWord> slots;
  std::vector<Placement> placement;  // by instruction index
  std::vector<std::size_t> block_first_slot;
  std::vector<std::size_t> block_slot_count;
  std::vector<std::set<Kind>> per_pipe_isa;

  std::size_t slot_of_block_start(std::size_t block) const { return block_first_slot.at(block); }
  bool operator==(const Schedule&) const = default;
};

// Greedy per-block list scheduling by critical-path height (ties: program
// order). A single pipe keeps program order.
Schedule schedule_program(const Program& program, const std::vector<BasicBlock>& cfg, const PipelineConfig& config);

struct CodeSize {
  std::size_t words = 0;   // long instruction words
  std::size_t instrs = 0;  // real (non-padding) instructions
  std::size_t bytes = 0;   // words * pipes * 2
  bool operator==(const CodeSize&) const = default;
};

CodeSize code_sizes(const Schedule& schedule);

// Every legality violation found; empty means the schedule is legal.
std::vector<std::string> verify_schedule(const Schedule& schedule);

// Human-readable slot-by-pipe table.
std::string render_schedule(const Schedule& schedule);

}  // namespace pipeforge
