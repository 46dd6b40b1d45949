#include "pipeforge/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pipeforge/corpus.hpp"
#include "pipeforge/explore.hpp"
#include "pipeforge/frontend.hpp"
#include "pipeforge/schedule.hpp"
#include "pipeforge/sim.hpp"
#include "pipeforge/unroll.hpp"

namespace pipeforge {

namespace {

struct Options {
  std::string input;
  int pipes = 2;
  int luf = 1;
  std::string mode = "remainder";
  std::string config_path;
  std::vector<std::string> regs;
  std::vector<std::string> mems;
  std::string pipes_list = "1,2,3";
  std::string luf_list = "1,2,4,8";
  std::string format = "csv";
  std::string out_path;
  bool no_range_expansion = false;
  int threads = 1;
};

// Re-raise with a stage prefix, keeping internal errors internal.
template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InternalError& e) {
    throw InternalError(fmt::format("{}: {}", name, e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", name, e.what()));
  }
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  int base = 10;
  std::string_view digits = text;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    base = 16;
    digits.remove_prefix(2);
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size())
    throw Error(fmt::format("{}: '{}' is not a number", what, text));
  return v;
}

std::vector<int> parse_list(const std::string& text, std::string_view what) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const std::int64_t v = parse_int(item, what);
    if (v < 1 || v > 1024) throw Error(fmt::format("{}: {} is out of range", what, v));
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw Error(fmt::format("{} is empty", what));
  return out;
}

Program load_input(const std::string& input) {
  if (std::filesystem::exists(input)) return load_program(input);
  if (input.find('/') == std::string::npos && input.find('.') == std::string::npos) return load_corpus(find_corpus(input));
  throw Error(fmt::format("cannot open '{}'", input));
}

Program load_nonempty(const std::string& input) {
  Program p = stage("parse", [&] { return load_input(input); });
  if (p.instrs.empty()) throw Error("parse: no instructions");
  return p;
}

MachineInit make_init(const Options& o) {
  MachineInit init;
  for (const std::string& r : o.regs) {
    const auto eq = r.find('=');
    if (eq == std::string::npos || eq < 2 || (r[0] != 'r' && r[0] != 'R'))
      throw Error(fmt::format("--reg expects rN=value, got '{}'", r));
    const std::int64_t idx = parse_int(std::string_view(r).substr(1, eq - 1), "--reg");
    if (idx < 0 || idx >= static_cast<std::int64_t>(kNumRegs)) throw Error(fmt::format("--reg: no register r{}", idx));
    init.regs[static_cast<std::size_t>(idx)] = static_cast<std::uint32_t>(parse_int(std::string_view(r).substr(eq + 1), "--reg"));
  }
  for (const std::string& m : o.mems) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw Error(fmt::format("--mem expects addr=byte, got '{}'", m));
    const std::int64_t addr = parse_int(std::string_view(m).substr(0, eq), "--mem");
    const std::int64_t byte = parse_int(std::string_view(m).substr(eq + 1), "--mem");
    if (addr < 0 || addr >= init.mem_size) throw Error(fmt::format("--mem: address {} outside memory", addr));
    if (byte < 0 || byte > 255) throw Error(fmt::format("--mem: {} is not a byte", byte));
    init.mem[static_cast<std::uint32_t>(addr)] = static_cast<std::uint8_t>(byte);
  }
  return init;
}

PipelineConfig make_config(const Options& o, std::optional<int> pipes = std::nullopt) {
  if (o.config_path.empty()) return PipelineConfig::with_pipes(pipes.value_or(o.pipes));
  std::ifstream in(o.config_path);
  if (!in) throw Error(fmt::format("cannot open config '{}'", o.config_path));
  std::ostringstream text;
  text << in.rdbuf();
  PipelineConfig c = stage("config", [&] { return parse_machine_config(text.str()); });
  if (pipes && *pipes != c.n_pipes) {
    PipelineConfig sized = PipelineConfig::with_pipes(*pipes);
    sized.alu_latency = c.alu_latency;
    sized.load_latency = c.load_latency;
    sized.branch_flush_penalty = c.branch_flush_penalty;
    sized.cond_branch_range_bytes = c.cond_branch_range_bytes;
    sized.uncond_branch_range_bytes = c.uncond_branch_range_bytes;
    return sized;
  }
  return c;
}

UnrollSpec make_spec(const Options& o) {
  UnrollSpec spec;
  spec.luf = o.luf;
  spec.mode = *parse_unroll_mode(o.mode);
  return spec;
}

struct Built {
  Program unrolled;
  Schedule schedule;
};

Built build(const Program& p, const Options& o) {
  const PipelineConfig config = make_config(o);
  const UnrollSpec spec = make_spec(o);
  Built b;
  b.unrolled = stage("unroll", [&] { return unroll_all(p, spec); });
  const Program placed = stage("branch-range", [&] {
    return o.no_range_expansion ? b.unrolled : expand_long_branches(b.unrolled, config);
  });
  b.schedule = stage("schedule", [&] { return schedule_program(placed, build_cfg(placed), config); });
  if (auto bad = verify_schedule(b.schedule); !bad.empty())
    throw InternalError(fmt::format("schedule: verification failed: {}", bad.front()));
  return b;
}

void write_output(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path);
  if (!f) throw Error(fmt::format("cannot write '{}'", o.out_path));
  f << text;
}

int cmd_asm(const Options& o, std::ostream& out) {
  const Program p = load_nonempty(o.input);
  const auto cfg = build_cfg(p);
  const auto loops = find_loops(p, cfg);
  out << render(p);
  out << fmt::format("blocks: {}\n", cfg.size());
  out << fmt::format("loops: {}\n", loops.size());
  for (const LoopDescriptor& l : loops) {
    const std::string bound = std::holds_alternative<Reg>(l.bound) ? fmt::format("r{}", std::get<Reg>(l.bound).index)
                                                                   : fmt::format("#{}", std::get<std::int32_t>(l.bound));
    out << fmt::format("  {}: induction r{} step {} bound {} cond {} trip {}\n", l.header_label, l.induction.index,
                       l.step, bound, cond_name(l.cond),
                       l.is_static() ? std::to_string(l.static_trip()) : std::string("dynamic"));
  }
  return 0;
}

int cmd_unroll(const Options& o, std::ostream& out) {
  const Program p = load_nonempty(o.input);
  const UnrollSpec spec = make_spec(o);
  const Program u = stage("unroll", [&] { return unroll_all(p, spec); });
  write_output(o, render(u), out);
  return 0;
}

int cmd_schedule(const Options& o, std::ostream& out) {
  const Program p = load_nonempty(o.input);
  const Built b = build(p, o);
  const CodeSize size = code_sizes(b.schedule);
  std::string text = render_schedule(b.schedule);
  text += fmt::format("words: {}\ninstrs: {}\nbytes: {}\n", size.words, size.instrs, size.bytes);
  for (std::size_t pipe = 0; pipe < b.schedule.per_pipe_isa.size(); ++pipe) {
    std::vector<std::string> names;
    for (Kind k : b.schedule.per_pipe_isa[pipe]) names.emplace_back(kind_name(k));
    text += fmt::format("pipe {} isa: {}\n", pipe + 1, names.empty() ? std::string("-") : fmt::format("{}", fmt::join(names, " ")));
  }
  write_output(o, text, out);
  return 0;
}

int cmd_sim(const Options& o, std::ostream& out) {
  const Program p = load_nonempty(o.input);
  const MachineInit init = make_init(o);
  const Built b = build(p, o);
  const SimResult r = stage("sim", [&] { return run_scheduled_checked(b.schedule, init); });
  const CodeSize size = code_sizes(b.schedule);
  out << fmt::format("program: {}\npipes: {}\nluf: {}\n", p.name, b.schedule.config.n_pipes, o.luf);
  out << fmt::format("cycles: {}\nissued: {}\nretired: {}\ntaken_branches: {}\nflush_cycles: {}\nstall_cycles: {}\n",
                     r.cycles, r.issued, r.retired, r.taken_branches, r.flush_cycles, r.stall_cycles);
  out << fmt::format("words: {}\ninstrs: {}\nbytes: {}\n", size.words, size.instrs, size.bytes);
  out << fmt::format("digest: {}\n", r.final.digest());
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  SweepPlan plan;
  plan.program = load_nonempty(o.input);
  for (int n : parse_list(o.pipes_list, "--pipes-list")) plan.configs.push_back(make_config(o, n));
  plan.lufs = parse_list(o.luf_list, "--luf-list");
  plan.unroll_mode = *parse_unroll_mode(o.mode);
  plan.init = make_init(o);
  plan.expand_branches = !o.no_range_expansion;
  plan.threads = o.threads;
  const SweepReport report = run_sweep(plan);
  write_output(o, emit_report(report, o.format == "json" ? ReportFormat::Json : ReportFormat::Csv), out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pipeforge: unroll, schedule and simulate mini-ISA programs on multi-pipe ASIPs", "pipeforge"};
  app.require_subcommand(1);
  Options o;

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("program", o.input, "assembly file or corpus name")->required();
  };
  auto add_unroll = [&](CLI::App* sub) {
    sub->add_option("--luf", o.luf, "loop-unrolling factor")->check(CLI::Range(1, 1024));
    sub->add_option("--mode", o.mode, "remainder or divisible")->check(CLI::IsMember({"remainder", "divisible"}));
  };
  auto add_machine = [&](CLI::App* sub) {
    sub->add_option("--pipes", o.pipes, "number of pipes")->check(CLI::Range(1, 64));
    sub->add_option("--config", o.config_path, "machine config file");
    sub->add_flag("--no-range-expansion", o.no_range_expansion, "leave out-of-range branches as they are");
  };
  auto add_init = [&](CLI::App* sub) {
    sub->add_option("--reg", o.regs, "initial register, rN=value");
    sub->add_option("--mem", o.mems, "initial memory byte, addr=value");
  };

  CLI::App* asm_cmd = app.add_subcommand("asm", "parse, print the canonical listing and report loops");
  add_input(asm_cmd);
  CLI::App* unroll_cmd = app.add_subcommand("unroll", "print the unrolled program");
  add_input(unroll_cmd);
  add_unroll(unroll_cmd);
  unroll_cmd->add_option("--out", o.out_path, "write to a file");
  CLI::App* sched_cmd = app.add_subcommand("schedule", "print the long-word schedule");
  add_input(sched_cmd);
  add_unroll(sched_cmd);
  add_machine(sched_cmd);
  sched_cmd->add_option("--out", o.out_path, "write to a file");
  CLI::App* sim_cmd = app.add_subcommand("sim", "unroll, schedule and simulate");
  add_input(sim_cmd);
  add_unroll(sim_cmd);
  add_machine(sim_cmd);
  add_init(sim_cmd);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep pipe counts and unroll factors");
  add_input(sweep_cmd);
  sweep_cmd->add_option("--pipes-list", o.pipes_list, "comma-separated pipe counts");
  sweep_cmd->add_option("--luf-list", o.luf_list, "comma-separated unroll factors (must include 1)");
  sweep_cmd->add_option("--mode", o.mode, "remainder or divisible")->check(CLI::IsMember({"remainder", "divisible"}));
  sweep_cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--out", o.out_path, "write to a file");
  sweep_cmd->add_option("--config", o.config_path, "machine config file (timing and ranges)");
  sweep_cmd->add_flag("--no-range-expansion", o.no_range_expansion, "leave out-of-range branches as they are");
  sweep_cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 256));
  add_init(sweep_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (asm_cmd->parsed()) return cmd_asm(o, out);
    if (unroll_cmd->parsed()) return cmd_unroll(o, out);
    if (sched_cmd->parsed()) return cmd_schedule(o, out);
    if (sim_cmd->parsed()) return cmd_sim(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace pipeforge
