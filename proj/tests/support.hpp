// Shared helpers and independent oracles for the test suites.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pipeforge/corpus.hpp"
#include "pipeforge/frontend.hpp"
#include "pipeforge/isa.hpp"
#include "pipeforge/schedule.hpp"
#include "pipeforge/sim.hpp"

namespace testing {

using namespace pipeforge;

inline Program assemble(const std::string& text, const std::string& name = "t") { return parse(text, name); }

inline Program corpus_program(const std::string& name) { return load_corpus(find_corpus(name)); }

inline SimResult reference(const Program& p, const MachineInit& init = {}) { return run_reference(p, init, Timing{}); }

inline Schedule schedule_on(const Program& p, const PipelineConfig& c) { return schedule_program(p, build_cfg(p), c); }

// Plain bitwise CRC-32 (reflected 0xEDB88320).
inline std::uint32_t crc32(const std::vector<std::uint8_t>& bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : bytes) {
    crc ^= b;
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

inline std::vector<std::uint8_t> bytes_at(const MachineState& s, std::uint32_t addr, std::size_t n) {
  return {s.mem.begin() + addr, s.mem.begin() + addr + static_cast<std::ptrdiff_t>(n)};
}

// Random straight-line block over r0..r6 ending in HALT. Memory ops use r6 as
// a fixed base pointing at scratch memory.
inline Program random_block(std::mt19937& rng, int max_len) {
  std::uniform_int_distribution<int> len_d(1, max_len);
  std::uniform_int_distribution<int> reg_d(0, 5);
  std::uniform_int_distribution<int> imm_d(0, 255);
  std::uniform_int_distribution<int> sh_d(0, 31);
  std::uniform_int_distribution<int> off_d(0, 31);
  std::uniform_int_distribution<int> kind_d(0, 15);
  Program p;
  p.name = "fuzz";
  p.instrs.push_back(ins::movi(r(6), 0x80));
  const int n = len_d(rng) - 1;
  int depth = 0;
  for (int i = 0; i < n; ++i) {
    const Reg a = r(reg_d(rng)), b = r(reg_d(rng)), c = r(reg_d(rng));
    switch (kind_d(rng)) {
      case 0: p.instrs.push_back(ins::movi(a, imm_d(rng))); break;
      case 1: p.instrs.push_back(ins::movr(a, b)); break;
      case 2: p.instrs.push_back(ins::add3(a, b, c)); break;
      case 3: p.instrs.push_back(ins::sub3(a, b, c)); break;
      case 4: p.instrs.push_back(ins::addi(a, imm_d(rng))); break;
      case 5: p.instrs.push_back(ins::subi(a, imm_d(rng))); break;
      case 6: p.instrs.push_back(ins::alu2(std::array{Kind::And, Kind::Orr, Kind::Eor, Kind::Bic}[static_cast<std::size_t>(imm_d(rng) % 4)], a, b)); break;
      case 7: p.instrs.push_back(ins::shift(std::array{Kind::Lsli, Kind::Lsri, Kind::Asri}[static_cast<std::size_t>(imm_d(rng) % 3)], a, b, sh_d(rng))); break;
      case 8: p.instrs.push_back(ins::cmpr(a, b)); break;
      case 9: p.instrs.push_back(ins::cmpi(a, imm_d(rng))); break;
      case 10: p.instrs.push_back(ins::mem(Kind::Ldr, a, r(6), off_d(rng) * 4 % 128)); break;
      case 11: p.instrs.push_back(ins::mem(Kind::Str, a, r(6), off_d(rng) * 4 % 128)); break;
      case 12: p.instrs.push_back(ins::mem(Kind::Ldrb, a, r(6), off_d(rng) * 3 % 125)); break;
      case 13: p.instrs.push_back(ins::mem(Kind::Strb, a, r(6), off_d(rng) * 3 % 125)); break;
      case 14:
        p.instrs.push_back(ins::push(a));
        ++depth;
        break;
      default:
        if (depth > 0) {
          p.instrs.push_back(ins::pop(a));
          --depth;
        } else {
          p.instrs.push_back(ins::nop());
        }
        break;
    }
  }
  p.instrs.push_back(ins::halt());
  return p;
}

// Random legal config: 1..4 pipes, pipe 2 sometimes memory-only.
inline PipelineConfig random_config(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_d(1, 4);
  std::uniform_int_distribution<int> lat_d(1, 3);
  std::uniform_int_distribution<int> coin(0, 1);
  PipelineConfig c = PipelineConfig::with_pipes(n_d(rng));
  if (c.n_pipes >= 2 && coin(rng)) c.fu_sets[1].erase(FUClass::Alu);
  c.alu_latency = lat_d(rng);
  c.load_latency = lat_d(rng);
  c.branch_flush_penalty = lat_d(rng) - 1;
  return c;
}

}  // namespace testing
