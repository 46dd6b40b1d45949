#include "pipeforge/explore.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <exception>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "pipeforge/frontend.hpp"

namespace pipeforge {

double improvement(std::uint64_t base_cycles, std::uint64_t new_cycles) {
  if (base_cycles == 0) throw Error("improvement needs a non-zero baseline");
  return 100.0 * (static_cast<double>(base_cycles) - static_cast<double>(new_cycles)) / static_cast<double>(base_cycles);
}

std::int64_t improvement_hundredths(std::uint64_t base_cycles, std::uint64_t new_cycles) {
  if (base_cycles == 0) throw Error("improvement needs a non-zero baseline");
  // floor((10000*(b-n))/b + 1/2), in integers.
  const __int128 b = base_cycles;
  const __int128 num = 2 * 10000 * (b - static_cast<__int128>(new_cycles)) + b;
  const __int128 den = 2 * b;
  __int128 q = num / den;
  if (num % den != 0 && num < 0) --q;
  return static_cast<std::int64_t>(q);
}

std::string format_hundredths(std::int64_t h) {
  const std::int64_t mag = h < 0 ? -h : h;
  return fmt::format("{}{}.{:02}", h < 0 ? "-" : "", mag / 100, mag % 100);
}

SweepRow evaluate_cell(const Program& program, const PipelineConfig& config, int luf, UnrollMode mode,
                       const MachineInit& init, bool expand_branches) {
  const UnrollSpec spec{.luf = luf, .mode = mode};
  const Program unrolled = unroll_all(program, spec);
  if (!semantic_check(program, unrolled, init, spec))
    throw InternalError("unrolled program diverges from the original under the reference simulator");
  const Program placed = expand_branches ? expand_long_branches(unrolled, config) : unrolled;
  const Schedule schedule = schedule_program(placed, build_cfg(placed), config);
  if (auto bad = verify_schedule(schedule); !bad.empty())
    throw InternalError(fmt::format("schedule failed verification: {}", bad.front()));
  const SimResult sim = run_scheduled_checked(schedule, init);
  const CodeSize size = code_sizes(schedule);

  SweepRow row;
  row.program = program.name;
  row.n_pipes = config.n_pipes;
  row.luf = luf;
  row.cycles = sim.cycles;
  row.words = size.words;
  row.instrs = size.instrs;
  row.bytes = size.bytes;
  row.taken_branches = sim.taken_branches;
  row.flush_cycles = sim.flush_cycles;
  row.stall_cycles = sim.stall_cycles;
  row.retired = sim.retired;
  for (const auto& kinds : schedule.per_pipe_isa) row.per_pipe_isa_sizes.push_back(kinds.size());
  row.read_ports = config.read_ports();
  row.write_ports = config.write_ports();
  row.digest = sim.final.digest();
  return row;
}

SweepReport run_sweep(const SweepPlan& plan) {
  if (plan.configs.empty() || plan.lufs.empty()) throw Error("sweep needs at least one config and one luf");
  if (std::find(plan.lufs.begin(), plan.lufs.end(), 1) == plan.lufs.end())
    throw Error("luf list must include 1 (the baseline)");

  const std::size_t n_lufs = plan.lufs.size();
  const std::size_t cells = plan.configs.size() * n_lufs;
  SweepReport report;
  report.rows.resize(cells);
  std::vector<std::exception_ptr> failures(cells);

  auto run_cell = [&](std::size_t i) {
    const PipelineConfig& config = plan.configs[i / n_lufs];
    const int luf = plan.lufs[i % n_lufs];
    try {
      report.rows[i] = evaluate_cell(plan.program, config, luf, plan.unroll_mode, plan.init, plan.expand_branches);
    } catch (const InternalError& e) {
      failures[i] = std::make_exception_ptr(InternalError(fmt::format("(pipes={}, luf={}) {}", config.n_pipes, luf, e.what())));
    } catch (const Error& e) {
      failures[i] = std::make_exception_ptr(Error(fmt::format("(pipes={}, luf={}) {}", config.n_pipes, luf, e.what())));
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(plan.threads, 1)), 1, cells);
  if (workers == 1) {
    for (std::size_t i = 0; i < cells; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cells;) run_cell(i);
      });
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  for (std::size_t c = 0; c < plan.configs.size(); ++c) {
    const std::size_t base_at = c * n_lufs + static_cast<std::size_t>(
                                                  std::find(plan.lufs.begin(), plan.lufs.end(), 1) - plan.lufs.begin());
    const std::uint64_t base = report.rows[base_at].cycles;
    for (std::size_t l = 0; l < n_lufs; ++l) {
      SweepRow& row = report.rows[c * n_lufs + l];
      row.improvement_hundredths = improvement_hundredths(base, row.cycles);
    }
  }
  return report;
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

std::int64_t parse_hundredths(const std::string& text) {
  std::string_view s = text;
  const bool neg = !s.empty() && s.front() == '-';
  if (neg) s.remove_prefix(1);
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || s.size() - dot != 3) throw Error(fmt::format("bad percentage '{}'", text));
  const std::int64_t v = std::stoll(std::string(s.substr(0, dot))) * 100 + std::stoll(std::string(s.substr(dot + 1)));
  return neg ? -v : v;
}

}  // namespace

std::string emit_report(const SweepReport& report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const SweepRow& r : report.rows)
      out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.program, r.n_pipes, r.luf, r.cycles, r.words, r.instrs,
                         r.bytes, r.taken_branches, r.flush_cycles, format_hundredths(r.improvement_hundredths));
    return out;
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : report.rows) {
    nlohmann::ordered_json j;
    j["program"] = r.program;
    j["n_pipes"] = r.n_pipes;
    j["luf"] = r.luf;
    j["cycles"] = r.cycles;
    j["words"] = r.words;
    j["instrs"] = r.instrs;
    j["bytes"] = r.bytes;
    j["taken_branches"] = r.taken_branches;
    j["flush_cycles"] = r.flush_cycles;
    j["improvement_pct"] = r.improvement_pct();
    rows.push_back(std::move(j));
  }
  return rows.dump(2) + "\n";
}

SweepReport parse_report(std::string_view text, ReportFormat format) {
  SweepReport report;
  if (format == ReportFormat::Csv) {
    std::vector<std::string> lines = split(text, '\n');
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines.front() != kCsvHeader) throw Error("report does not start with the expected CSV header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const std::vector<std::string> f = split(lines[i], ',');
      if (f.size() != 10) throw Error(fmt::format("report line {} has {} fields", i + 1, f.size()));
      SweepRow r;
      r.program = f[0];
      r.n_pipes = std::stoi(f[1]);
      r.luf = std::stoi(f[2]);
      r.cycles = std::stoull(f[3]);
      r.words = std::stoull(f[4]);
      r.instrs = std::stoull(f[5]);
      r.bytes = std::stoull(f[6]);
      r.taken_branches = std::stoull(f[7]);
      r.flush_cycles = std::stoull(f[8]);
      r.improvement_hundredths = parse_hundredths(f[9]);
      report.rows.push_back(std::move(r));
    }
    return report;
  }
  const auto rows = nlohmann::json::parse(text);
  if (!rows.is_array()) throw Error("JSON report must be an array");
  for (const auto& j : rows) {
    SweepRow r;
    r.program = j.at("program").get<std::string>();
    r.n_pipes = j.at("n_pipes").get<int>();
    r.luf = j.at("luf").get<int>();
    r.cycles = j.at("cycles").get<std::uint64_t>();
    r.words = j.at("words").get<std::size_t>();
    r.instrs = j.at("instrs").get<std::size_t>();
    r.bytes = j.at("bytes").get<std::size_t>();
    r.taken_branches = j.at("taken_branches").get<std::uint64_t>();
    r.flush_cycles = j.at("flush_cycles").get<std::uint64_t>();
    r.improvement_hundredths = std::llround(j.at("improvement_pct").get<double>() * 100.0);
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace pipeforge
