#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace testing;

TEST_CASE("parse examples") {
  const Program add = assemble("ADD r2, r0, r1");
  REQUIRE(add.instrs.size() == 1);
  CHECK(add.instrs[0] == ins::add3(r(2), r(0), r(1)));

  const Program loop = assemble("loop: SUBI r0, #1\n  BNE loop\n");
  CHECK(loop.target_index(loop.instrs[1]) == 0);
  CHECK(loop.instrs[0] == ins::subi(r(0), 1));

  try {
    assemble("LDR r1, [r2, #3]");
    FAIL("misaligned offset accepted");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::OperandRange);
    CHECK(e.line() == 1);
  }
}

TEST_CASE("parse diagnostics are distinct and located") {
  auto kind_of = [](const std::string& text) {
    try {
      assemble(text);
    } catch (const ParseError& e) {
      return std::make_pair(e.kind(), e.line());
    }
    FAIL("no error for: " << text);
    return std::make_pair(ParseErrorKind::Syntax, 0);
  };
  CHECK(kind_of("NOP\nFROB r1, r2") == std::make_pair(ParseErrorKind::UnknownMnemonic, 2));
  CHECK(kind_of("NOP\nNOP\nB nowhere") == std::make_pair(ParseErrorKind::UndefinedLabel, 3));
  CHECK(kind_of("MOV r1, #256") == std::make_pair(ParseErrorKind::OperandRange, 1));
  CHECK(kind_of("MOV r9, #1") == std::make_pair(ParseErrorKind::OperandRange, 1));
  CHECK(kind_of("MOV r1 #3") .first == ParseErrorKind::Syntax);
  CHECK(kind_of("x: NOP\nx: NOP") == std::make_pair(ParseErrorKind::DuplicateLabel, 2));
  CHECK(kind_of("LSL r1, r2, #32").first == ParseErrorKind::OperandRange);
}

TEST_CASE("comments, whitespace and case are insignificant") {
  const Program a = assemble("  mov r0, #5   ; five\n\n\tHALT\n");
  const Program b = assemble("MOV r0, #5\nHALT");
  CHECK(a.instrs == b.instrs);
  CHECK(assemble("MOV r0, #0x1F").instrs[0] == ins::movi(r(0), 31));
}

TEST_CASE("data and entry directives") {
  const Program p = assemble(".data 0x10 1 2 0xff\n.entry go\nNOP\ngo: HALT");
  REQUIRE(p.data.size() == 1);
  CHECK(p.data[0].addr == 0x10);
  CHECK(p.data[0].bytes == std::vector<std::uint8_t>{1, 2, 255});
  CHECK(p.entry_index() == 1);
}

TEST_CASE("render/parse round trip on the corpus") {
  for (const CorpusEntry& e : corpus()) {
    CAPTURE(e.name);
    const Program p = load_corpus(e);
    const std::string text = render(p);
    CHECK(parse(text, p.name) == p);
    CHECK(render(parse(text, p.name)) == text);
  }
}

TEST_CASE("render/parse round trip on random programs") {
  std::mt19937 rng(1234);
  for (int i = 0; i < 200; ++i) {
    Program p = random_block(rng, 20);
    // Wrap the block in a loop so labels and branches are exercised.
    p.instrs.insert(p.instrs.end() - 1, {ins::cmpi(r(0), 3), ins::bcc(kAllConds[static_cast<std::size_t>(i) % 6], "top")});
    p.labels["top"] = 1;
    p.data.push_back({static_cast<std::uint32_t>(i), {static_cast<std::uint8_t>(i), 7}});
    CHECK(parse(render(p), p.name) == p);
  }
}

TEST_CASE("build_cfg examples") {
  const Program straight = assemble("MOV r0, #1\nMOV r1, #2\nADD r2, r0, r1\nSTR r2, [r3, #0]\nHALT");
  const auto one = build_cfg(straight);
  REQUIRE(one.size() == 1);
  CHECK(one[0].successors.empty());
  CHECK(one[0].terminator == Terminator::Halt);

  const Program enc = corpus_program("encryption");
  const auto cfg = build_cfg(enc);
  REQUIRE(cfg.size() == 3);
  CHECK(cfg[0].successors == std::vector<std::size_t>{1});
  CHECK(std::set<std::size_t>(cfg[1].successors.begin(), cfg[1].successors.end()) == std::set<std::size_t>{1, 2});
  CHECK(cfg[1].terminator == Terminator::Bcc);
  CHECK(cfg[2].terminator == Terminator::Halt);

  const Program labelled = assemble("start: MOV r0, #1\nMOV r1, #2\nHALT");
  const Program bare = assemble("MOV r0, #1\nMOV r1, #2\nHALT");
  CHECK(build_cfg(labelled) == build_cfg(bare));
}

TEST_CASE("cfg partitions every program") {
  std::vector<Program> programs;
  for (const CorpusEntry& e : corpus()) programs.push_back(load_corpus(e));
  std::mt19937 rng(99);
  for (int i = 0; i < 50; ++i) programs.push_back(random_block(rng, 30));
  for (const Program& p : programs) {
    const auto cfg = build_cfg(p);
    std::vector<int> hits(p.instrs.size(), 0);
    std::size_t expect = 0;
    for (const BasicBlock& b : cfg) {
      CHECK(b.first == expect);
      expect = b.last + 1;
      for (std::size_t i = b.first; i <= b.last; ++i) {
        ++hits[i];
        if (i != b.last) CHECK_FALSE(is_terminator(p.instrs[i].kind));
      }
      if (b.terminator == Terminator::Bcc) CHECK(b.successors.size() == 2);
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("find_loops on the encryption kernel") {
  const Program p = corpus_program("encryption");
  const auto loops = find_loops(p, build_cfg(p));
  REQUIRE(loops.size() == 1);
  const LoopDescriptor& l = loops[0];
  CHECK(l.header_label == "loop");
  CHECK(l.induction == r(0));
  CHECK(l.step == 1);
  CHECK(std::get<Reg>(l.bound) == r(1));
  CHECK(l.cmp_kind == Kind::Cmpr);
  CHECK_FALSE(l.is_static());
}

TEST_CASE("find_loops rejects a double induction write") {
  const Program p = assemble(
      "MOV r0, #0\nloop: ADD r0, #1\nADD r0, #1\nCMP r0, #8\nBLT loop\nHALT");
  CHECK(find_loops(p, build_cfg(p)).empty());
}

TEST_CASE("find_loops in a two-level nest keeps only the inner loop") {
  const Program p = assemble(
      "MOV r0, #3\n"
      "outer: MOV r1, #0\n"
      "inner: ADD r1, #1\n"
      "CMP r1, #4\n"
      "BLT inner\n"
      "SUB r0, #1\n"
      "CMP r0, #0\n"
      "BNE outer\n"
      "HALT");
  const auto loops = find_loops(p, build_cfg(p));
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].header_label == "inner");
  REQUIRE(loops[0].is_static());
  CHECK(loops[0].static_trip() == 4);
}

TEST_CASE("static trip counts need a visible initial value") {
  const Program counted = assemble("MOV r5, #2\nbits: ADD r5, #3\nCMP r5, #20\nBLT bits\nHALT");
  const auto a = find_loops(counted, build_cfg(counted));
  REQUIRE(a.size() == 1);
  CHECK(a[0].static_trip() == 6);  // 5, 8, 11, 14, 17, 20

  const Program unknown = assemble("bits: ADD r5, #3\nCMP r5, #20\nBLT bits\nHALT");
  const auto b = find_loops(unknown, build_cfg(unknown));
  REQUIRE(b.size() == 1);
  CHECK_FALSE(b[0].is_static());
}

TEST_CASE("every corpus loop header is visited when entered") {
  for (const CorpusEntry& e : corpus()) {
    CAPTURE(e.name);
    const Program p = load_corpus(e);
    for (const LoopDescriptor& l : find_loops(p, build_cfg(p))) {
      std::size_t visits = 0;
      run_reference(p, {}, Timing{}, [&](std::size_t i, bool) { visits += i == l.header_index; });
      CHECK(visits >= 1);
    }
  }
}
