// Design-space sweeps over pipe count x unroll factor.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/isa.hpp"
#include "pipeforge/schedule.hpp"
#include "pipeforge/sim.hpp"
#include "pipeforge/unroll.hpp"

namespace pipeforge {

// 100 * (base - now) / base, unrounded. Throws on base == 0.
double improvement(std::uint64_t base_cycles, std::uint64_t new_cycles);

// The same figure in hundredths of a percent, rounded half up.
std::int64_t improvement_hundredths(std::uint64_t base_cycles, std::uint64_t new_cycles);

// "18.97", "-3.50", "0.00"
std::string format_hundredths(std::int64_t hundredths);

struct SweepPlan {
  Program program;
  std::vector<PipelineConfig> configs;
  std::vector<int> lufs;  // must contain 1
  UnrollMode unroll_mode = UnrollMode::Remainder;
  MachineInit init;
  bool expand_branches = true;
  int threads = 1;
};

struct SweepRow {
  std::string program;
  int n_pipes = 0;
  int luf = 0;
  std::uint64_t cycles = 0;
  std::size_t words = 0;
  std::size_t instrs = 0;
  std::size_t bytes = 0;
  std::uint64_t taken_branches = 0;
  std::uint64_t flush_cycles = 0;
  std::int64_t improvement_hundredths = 0;  // vs the same config's luf=1 row

  // Not part of the emitted report.
  std::uint64_t stall_cycles = 0;
  std::uint64_t retired = 0;
  std::vector<std::size_t> per_pipe_isa_sizes;
  int read_ports = 0;
  int write_ports = 0;
  std::string digest;

  double improvement_pct() const { return static_cast<double>(improvement_hundredths) / 100.0; }
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

// One cell: unroll -> expand long branches -> schedule -> verify -> simulate,
// with both the unrolled program and the schedule checked against the
// reference simulator. Improvement is left at 0.
SweepRow evaluate_cell(const Program& program, const PipelineConfig& config, int luf, UnrollMode mode,
                       const MachineInit& init, bool expand_branches = true);

// Rows ordered config-major, luf-minor. Stage errors carry "(pipes=N, luf=L)".
SweepReport run_sweep(const SweepPlan& plan);

enum class ReportFormat { Csv, Json };

inline constexpr std::string_view kCsvHeader =
    "program,n_pipes,luf,cycles,words,instrs,bytes,taken_branches,flush_cycles,improvement_pct";

std::string emit_report(const SweepReport& report, ReportFormat format);
SweepReport parse_report(std::string_view text, ReportFormat format);

}  // namespace pipeforge
