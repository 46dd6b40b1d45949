// Acceptance checks AC1..AC8: one PASS/FAIL line each, nonzero exit on failure.
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>

#include "pipeforge/explore.hpp"
#include "support.hpp"

using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

std::uint64_t cycles_of(const Program& p, int pipes, int luf, bool expand = true) {
  return evaluate_cell(p, PipelineConfig::with_pipes(pipes), luf, UnrollMode::Remainder, {}, expand).cycles;
}

Outcome ac1() {
  Outcome o;
  const auto t0 = Clock::now();
  int cells = 0;
  for (const CorpusEntry& e : corpus()) {
    const Program p = load_corpus(e);
    for (int n = 1; n <= 4; ++n)
      for (int luf : {1, 2, 4, 8}) {
        const Program u = unroll_all(p, {.luf = luf});
        const PipelineConfig c = PipelineConfig::with_pipes(n);
        const Schedule s = schedule_on(expand_long_branches(u, c), c);
        const MachineState got = run_scheduled(s, {}).final;
        const MachineState want = run_reference(u, {}, c.timing()).final;
        if (!(got == want)) o.fail(fmt::format("{} pipes={} luf={} diverged", e.name, n, luf));
        ++cells;
      }
  }
  const double secs = seconds_since(t0);
  if (secs >= 60) o.fail(fmt::format("took {:.1f}s", secs));
  if (o.ok) o.detail = fmt::format("{} cells equal, {:.2f}s", cells, secs);
  return o;
}

Outcome ac2() {
  struct Printed {
    std::uint64_t base, now;
    double pct;
  };
  const std::vector<Printed> printed = {
      {8498, 6886, 18.96},     {278755, 215810, 22.58}, {199700, 172550, 13.60}, {525650, 368855, 29.83},
      {18573, 16952, 8.73},    {2560026, 1792030, 30.00}, {8498, 6882, 19.02},   {273455, 215454, 21.21},
      {199700, 172550, 13.60}, {516750, 365704, 29.23}, {16873, 15132, 10.31},   {2560026, 1791081, 30.03},
  };
  Outcome o;
  double worst = 0;
  for (const Printed& p : printed) {
    const double got = static_cast<double>(improvement_hundredths(p.base, p.now)) / 100.0;
    worst = std::max(worst, std::abs(got - p.pct));
    if (std::abs(got - p.pct) > 0.02 + 1e-9)
      o.fail(fmt::format("{}/{} gave {:.2f}, printed {:.2f}", p.base, p.now, got, p.pct));
  }
  if (o.ok) o.detail = fmt::format("12 percentages, worst deviation {:.2f}", worst);
  return o;
}

Outcome ac3() {
  Outcome o;
  std::string report;
  for (const std::string name : {"encryption", "bubble_sort"}) {
    const Program p = corpus_program(name);
    const std::uint64_t c1 = cycles_of(p, 2, 1), c4 = cycles_of(p, 2, 4);
    const std::string pct = format_hundredths(improvement_hundredths(c1, c4));
    report += fmt::format("{}{} {}->{} ({}%)", report.empty() ? "" : ", ", name, c1, c4, pct);
    if (!(c4 < c1)) o.fail(fmt::format("{}: luf 4 {} not below luf 1 {}", name, c4, c1));
    const double d = improvement(c1, c4);
    if (d < 5 || d > 35) fmt::print("  warning: {} improvement {}% outside 5-35%\n", name, pct);
  }
  if (o.ok) o.detail = report;
  return o;
}

Outcome ac4() {
  Outcome o;
  const std::vector<int> lufs = {1, 2, 3, 4, 5, 6, 8, 10, 12, 15};
  for (const CorpusEntry& e : corpus()) {
    const Program p = load_corpus(e);
    for (int n = 1; n <= 3; ++n) {
      std::size_t prev_instrs = 0, prev_words = 0;
      for (int luf : lufs) {
        const Program u = unroll_all(p, {.luf = luf});
        const PipelineConfig c = PipelineConfig::with_pipes(n);
        const std::size_t words = code_sizes(schedule_on(expand_long_branches(u, c), c)).words;
        if (u.instrs.size() <= prev_instrs || words <= prev_words)
          o.fail(fmt::format("{} pipes={} luf={}: instrs {} words {} (previous {} / {})", e.name, n, luf, u.instrs.size(),
                             words, prev_instrs, prev_words));
        prev_instrs = u.instrs.size();
        prev_words = words;
      }
    }
  }
  if (o.ok) o.detail = "instructions and words strictly increase over 10 lufs, 6 programs x 3 configs";
  return o;
}

Outcome ac5() {
  Outcome o;
  const Program p = corpus_program("encryption");
  const PipelineConfig c = PipelineConfig::with_pipes(2);
  for (int k = 2; k <= 32; ++k) {
    const Program u = unroll_all(p, {.luf = k});
    std::size_t far = 0;
    for (std::size_t i = 0; i < u.instrs.size(); ++i)
      if (u.instrs[i].kind == Kind::Bcc && branch_span_bytes(u, i) > static_cast<std::size_t>(c.cond_branch_range_bytes)) ++far;
    if (far == 0) continue;

    const Program x = expand_long_branches(u, c);
    if (x.instrs.size() != u.instrs.size() + far)
      o.fail(fmt::format("luf {}: {} far branches but {} added instructions", k, far, x.instrs.size() - u.instrs.size()));
    // evaluate_cell checks the unrolled program and the schedule against the reference.
    const SweepRow with = evaluate_cell(p, c, k, UnrollMode::Remainder, {}, true);
    const SweepRow without = evaluate_cell(p, c, k, UnrollMode::Remainder, {}, false);
    if (with.digest != without.digest) o.fail("expanded run changed the result");
    const double per_with = static_cast<double>(with.cycles) / 16.0, per_without = static_cast<double>(without.cycles) / 16.0;
    if (!(per_with > per_without))
      o.fail(fmt::format("luf {}: {:.2f} cycles/iteration with expansion, {:.2f} without", k, per_with, per_without));
    if (o.ok)
      o.detail = fmt::format("first far branch at luf {} ({} branch(es)); {:.2f} vs {:.2f} cycles/iteration", k, far,
                             per_with, per_without);
    return o;
  }
  o.fail("no luf up to 32 pushed a branch past the conditional range");
  return o;
}

Outcome ac6() {
  Outcome o;
  std::string deltas;
  for (const CorpusEntry& e : corpus()) {
    const Program p = load_corpus(e);
    for (int luf : {1, 2, 4, 8}) {
      const std::uint64_t one = cycles_of(p, 1, luf);
      std::uint64_t two = 0, three = 0;
      for (int n = 2; n <= 4; ++n) {
        const std::uint64_t cyc = cycles_of(p, n, luf);
        if (cyc > one) o.fail(fmt::format("{} luf={} pipes={}: {} > {}", e.name, luf, n, cyc, one));
        if (n == 2) two = cyc;
        if (n == 3) three = cyc;
      }
      if (luf == 4) deltas += fmt::format(" {}={}%", e.name, format_hundredths(improvement_hundredths(two, three)));
    }
  }
  if (o.ok) o.detail = "3-vs-2 pipes at luf 4:" + deltas;
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Program p = random_block(rng, 30);
    const PipelineConfig c = random_config(rng);
    const Schedule s = schedule_on(p, c);
    const auto problems = verify_schedule(s);
    if (!problems.empty()) o.fail(fmt::format("program {}: {}", i, problems.front()));
    if (!(run_scheduled(s, {}).final == run_reference(p, {}, c.timing()).final)) o.fail(fmt::format("program {} diverged", i));
  }
  const double secs = seconds_since(t0);
  if (secs >= 30) o.fail(fmt::format("took {:.1f}s", secs));
  if (o.ok) o.detail = fmt::format("1000 programs legal and equivalent, {:.2f}s", secs);
  return o;
}

Outcome ac8() {
  Outcome o;
  for (const CorpusEntry& e : corpus()) {
    const Program p = load_corpus(e);
    if (render(unroll_all(p, {.luf = 1})) != render(p)) o.fail(e.name + ": luf 1 changed the program");
    for (int luf : {1, 2, 4, 8}) {
      const Program u = unroll_all(p, {.luf = luf});
      const std::uint64_t ref = reference(u).cycles;
      const std::uint64_t one = run_scheduled(schedule_on(u, PipelineConfig::with_pipes(1)), {}).cycles;
      if (ref != one) o.fail(fmt::format("{} luf={}: 1-pipe {} vs reference {}", e.name, luf, one, ref));
    }
  }
  if (emit_report({}, ReportFormat::Csv) != std::string(kCsvHeader) + "\n") o.fail("empty report is not header-only");
  if (o.ok) o.detail = "luf 1 identity, 1-pipe cycles == reference, empty report header-only";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8},
  };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    fmt::print("{} {} {}\n", name, o.ok ? "PASS" : "FAIL", o.detail);
    failed += !o.ok;
  }
  return failed == 0 ? 0 : 1;
}
