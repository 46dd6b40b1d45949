#include <doctest.h>

#include <algorithm>
#include <bit>

#include "pipeforge/unroll.hpp"
#include "support.hpp"

using namespace testing;

TEST_CASE("reference examples") {
  const SimResult a = run_reference(assemble("MOV r0, #5\nHALT"), {}, 3);
  CHECK(a.final.regs[0] == 5);
  CHECK(a.cycles == 2);
  CHECK(a.taken_branches == 0);

  const SimResult z = run_reference(assemble("CMP r0, #0\nBEQ yes\nMOV r1, #1\nyes: HALT"), {}, 3);
  CHECK(z.final.flags.z);
  CHECK(z.taken_branches == 1);
  CHECK(z.final.regs[1] == 0);

  const SimResult c = run_reference(assemble("MOV r0, #3\nL: SUB r0, #1\nCMP r0, #0\nBNE L\nHALT"), {}, 3);
  CHECK(c.retired == 11);
  CHECK(c.taken_branches == 2);
  CHECK(c.cycles == 17);
}

TEST_CASE("condition codes follow the subtraction flags") {
  struct Case {
    std::uint32_t a, b;
  };
  const std::vector<Case> cases = {{0, 0}, {1, 2}, {2, 1}, {0x80000000u, 1}, {1, 0x80000000u}, {0xFFFFFFFFu, 0}, {5, 5}};
  for (const Case& k : cases)
    for (Cond cond : kAllConds) {
      Program p = assemble("CMP r0, r1\nBEQ t\nMOV r2, #0\nHALT\nt: MOV r2, #1\nHALT");
      p.instrs[1].cond = cond;
      MachineInit init;
      init.regs[0] = k.a;
      init.regs[1] = k.b;
      const auto sa = static_cast<std::int32_t>(k.a), sb = static_cast<std::int32_t>(k.b);
      bool expect = false;
      switch (cond) {
        case Cond::Eq: expect = sa == sb; break;
        case Cond::Ne: expect = sa != sb; break;
        case Cond::Lt: expect = sa < sb; break;
        case Cond::Ge: expect = sa >= sb; break;
        case Cond::Gt: expect = sa > sb; break;
        case Cond::Le: expect = sa <= sb; break;
      }
      CAPTURE(k.a);
      CAPTURE(k.b);
      CAPTURE(cond_name(cond));
      CHECK(reference(p, init).final.regs[2] == (expect ? 1u : 0u));
    }
}

TEST_CASE("arithmetic wraps at 32 bits") {
  const SimResult s = reference(assemble("MOV r0, #0\nSUB r0, #1\nMOV r1, #1\nLSL r1, r1, #31\nADD r2, r1, r1\nASR r3, r1, #31\nHALT"));
  CHECK(s.final.regs[0] == 0xFFFFFFFFu);
  CHECK(s.final.regs[1] == 0x80000000u);
  CHECK(s.final.regs[2] == 0);
  CHECK(s.final.regs[3] == 0xFFFFFFFFu);
}

TEST_CASE("memory is little-endian and byte addressable") {
  const Program p = assemble(".data 0x20 0x11 0x22 0x33 0x44\nMOV r0, #0x20\nLDR r1, [r0, #0]\nLDRB r2, [r0, #2]\nSTRB r2, [r0, #4]\nHALT");
  const SimResult s = reference(p);
  CHECK(s.final.regs[1] == 0x44332211u);
  CHECK(s.final.regs[2] == 0x33);
  CHECK(s.final.mem[0x24] == 0x33);
}

TEST_CASE("init overrides apply after the data image") {
  MachineInit init;
  init.regs[3] = 9;
  init.mem[0x20] = 0x99;
  const SimResult s = reference(assemble(".data 0x20 0x11\nMOV r0, #0x20\nLDRB r1, [r0, #0]\nHALT"), init);
  CHECK(s.final.regs[1] == 0x99);
  CHECK(s.final.regs[3] == 9);
}

TEST_CASE("push and pop") {
  const SimResult s = reference(assemble("MOV r1, #42\nPUSH {r1}\nMOV r1, #0\nPOP {r2}\nHALT"));
  CHECK(s.final.regs[2] == 42);
  CHECK(s.final.sp == kDefaultMemSize);
  const SimResult mid = reference(assemble("MOV r1, #42\nPUSH {r1}\nHALT"));
  CHECK(mid.final.sp == kDefaultMemSize - 4);
}

TEST_CASE("simulation errors") {
  auto kind = [](const Program& p, MachineInit init = {}) {
    try {
      reference(p, init);
    } catch (const SimError& e) {
      return e.kind();
    }
    FAIL("no error");
    return SimErrorKind::FellOffEnd;
  };
  CHECK(kind(assemble("POP {r0}\nHALT")) == SimErrorKind::StackUnderflow);
  CHECK(kind(assemble("MOV r0, #0\nSUB r0, #1\nLDR r1, [r0, #0]\nHALT")) == SimErrorKind::MemoryOutOfBounds);
  CHECK(kind(assemble("MOV r0, #1")) == SimErrorKind::FellOffEnd);
  MachineInit tight;
  tight.max_cycles = 100;
  CHECK(kind(assemble("L: B L\nHALT"), tight) == SimErrorKind::BudgetExceeded);
}

TEST_CASE("load-use interlock stalls the reference") {
  const SimResult s = reference(assemble("LDR r1, [r0, #0]\nADD r2, r1, r1\nHALT"));
  CHECK(s.stall_cycles == 1);
  CHECK(s.cycles == 4);
}

TEST_CASE("scheduled run of the dual-pipe example") {
  const Program p = assemble("MOV r0, #1\nMOV r1, #2\nADD r2, r0, r1\nSTR r2, [r3, #0]\nHALT");
  MachineInit init;
  init.regs[3] = 0x40;
  const Schedule s = schedule_on(p, PipelineConfig::with_pipes(2));
  const SimResult m = run_scheduled(s, init);
  const SimResult ref = reference(p, init);
  CHECK(code_sizes(s).words == 3);  // HALT shares the STR's word
  CHECK(m.cycles == 3);
  CHECK(m.flush_cycles == 0);
  CHECK(ref.cycles == 5);
  CHECK(m.final.regs[2] == 3);
  CHECK(m.final.load_word(0x40) == 3);
  CHECK(m.final == ref.final);
}

TEST_CASE("corpus kernels compute what they claim") {
  SUBCASE("crc32") {
    const SimResult s = reference(corpus_program("crc32"));
    const std::string msg = "123456789ABCDEFG";
    CHECK(s.final.load_word(0x44) == crc32({msg.begin(), msg.end()}));
  }
  SUBCASE("bit_count") {
    const Program p = corpus_program("bit_count");
    const MachineState init = initial_state(p, {});
    std::uint32_t total = 0;
    for (std::uint32_t a = 0; a < 128; a += 4) total += static_cast<std::uint32_t>(std::popcount(init.load_word(a)));
    CHECK(reference(p).final.load_word(0x80) == total);
  }
  SUBCASE("bubble_sort") {
    const Program p = corpus_program("bubble_sort");
    const MachineState init = initial_state(p, {});
    std::vector<std::uint32_t> v;
    for (std::uint32_t a = 0; a < 64; a += 4) v.push_back(init.load_word(a));
    std::sort(v.begin(), v.end());
    const MachineState out = reference(p).final;
    for (std::uint32_t i = 0; i < 16; ++i) CHECK(out.load_word(4 * i) == v[i]);
  }
  SUBCASE("bit_shifter") {
    const Program p = corpus_program("bit_shifter");
    const MachineState init = initial_state(p, {});
    const MachineState out = reference(p).final;
    for (std::uint32_t a = 0; a < 128; a += 4) CHECK(out.load_word(a) == std::rotl(init.load_word(a), 3));
  }
  SUBCASE("bit_string") {
    const Program p = corpus_program("bit_string");
    const MachineState init = initial_state(p, {});
    const MachineState out = reference(p).final;
    for (std::uint32_t w = 0; w < 4; ++w)
      for (std::uint32_t b = 0; b < 32; ++b) {
        const char expect = ((init.load_word(4 * w) >> (31 - b)) & 1u) ? '1' : '0';
        CHECK(out.mem[0x40 + 32 * w + b] == static_cast<std::uint8_t>(expect));
      }
  }
  SUBCASE("encryption") {
    const Program p = corpus_program("encryption");
    const MachineState init = initial_state(p, {});
    const MachineState out = reference(p).final;
    const std::uint32_t key = init.mem[0x80];
    for (std::uint32_t i = 0; i < 16; ++i) {
      const std::uint32_t j = i ^ key;
      const std::uint32_t left = j & 0xF0, right = j & 0x0F;
      CHECK(out.load_word(0x40 + 4 * i) == init.load_word(4 * i));
      CHECK(out.load_word(4 * i) == (left << 4) + (right >> 4));
    }
  }
  SUBCASE("nibble_swap") {
    const Program p = corpus_program("nibble_swap");
    const MachineState init = initial_state(p, {});
    const MachineState out = reference(p).final;
    const std::uint32_t key = init.mem[0x80];
    for (std::uint32_t i = 0; i < 16; ++i) {
      const std::uint32_t j = init.load_word(4 * i) ^ key;
      CHECK(out.load_word(4 * i) == (((j & 0xF0) >> 4) | ((j & 0x0F) << 4)));
    }
  }
}

TEST_CASE("cycle accounting identity") {
  for (const CorpusEntry& e : corpus()) {
    const Program p = load_corpus(e);
    const SimResult ref = reference(p);
    CHECK(ref.flush_cycles == ref.taken_branches * 3);
    CHECK(ref.cycles == ref.issued + ref.flush_cycles + ref.stall_cycles);
    for (int n = 1; n <= 4; ++n) {
      const SimResult m = run_scheduled(schedule_on(p, PipelineConfig::with_pipes(n)), {});
      CHECK(m.cycles == m.issued + m.flush_cycles + m.stall_cycles);
      CHECK(m.taken_branches == ref.taken_branches);
      CHECK(m.retired == ref.retired);
    }
  }
}

TEST_CASE("single-pipe schedule reproduces reference cycles") {
  std::mt19937 rng(17);
  std::vector<Program> programs;
  for (const CorpusEntry& e : corpus()) programs.push_back(load_corpus(e));
  for (int i = 0; i < 100; ++i) programs.push_back(random_block(rng, 30));
  for (const Program& p : programs) {
    const SimResult ref = reference(p);
    const SimResult one = run_scheduled(schedule_on(p, PipelineConfig::with_pipes(1)), {});
    CHECK(one.cycles == ref.cycles);
    CHECK(one.final == ref.final);
  }
}

TEST_CASE("multi-pipe runs are never slower than the reference") {
  for (const CorpusEntry& e : corpus()) {
    const Program p = load_corpus(e);
    const SimResult ref = reference(p);
    for (int n = 2; n <= 4; ++n) CHECK(run_scheduled(schedule_on(p, PipelineConfig::with_pipes(n)), {}).cycles <= ref.cycles);
  }
}

TEST_CASE("simulation is deterministic") {
  const Program p = corpus_program("crc32");
  const Schedule s = schedule_on(p, PipelineConfig::with_pipes(3));
  const SimResult a = run_scheduled(s, {});
  const SimResult b = run_scheduled(s, {});
  CHECK(a.cycles == b.cycles);
  CHECK(a.final == b.final);
  CHECK(a.final.digest() == b.final.digest());
}

TEST_CASE("checked run flags a divergent schedule") {
  const Program p = assemble("MOV r0, #1\nADD r1, r0, r0\nHALT");
  Schedule s = schedule_on(p, PipelineConfig::with_pipes(2));
  // Put the ADD beside its producer: the scheduled run reads the stale r0.
  s.slots = {{0, 1}, {2, std::nullopt}};
  s.placement = {{0, 0}, {0, 1}, {1, 0}};
  s.block_first_slot = {0};
  s.block_slot_count = {2};
  CHECK_THROWS_AS(run_scheduled_checked(s, {}), InternalError);
}

TEST_CASE("unrolled encryption on two pipes: same memory, fewer cycles") {
  const Program p = corpus_program("encryption");
  const PipelineConfig c = PipelineConfig::with_pipes(2);
  const SimResult base = run_scheduled(schedule_on(p, c), {});
  const SimResult four = run_scheduled(schedule_on(unroll_all(p, {.luf = 4}), c), {});
  CHECK(four.final.mem == base.final.mem);
  CHECK(four.cycles < base.cycles);
}
