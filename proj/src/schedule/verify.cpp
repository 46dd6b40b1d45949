#include <fmt/format.h>

#include "pipeforge/schedule.hpp"

namespace pipeforge {

std::vector<std::string> verify_schedule(const Schedule& s) {
  std::vector<std::string> bad;
  const Program& p = s.program;
  const auto n_pipes = static_cast<std::size_t>(s.config.n_pipes);

  if (s.placement.size() != p.instrs.size()) {
    bad.push_back("placement table size differs from instruction count");
    return bad;
  }
  if (s.block_first_slot.size() != s.blocks.size() || s.block_slot_count.size() != s.blocks.size()) {
    bad.push_back("block slot tables do not match the block list");
    return bad;
  }

  // Grid <-> placement agreement and slot exclusivity.
  std::vector<int> seen(p.instrs.size(), 0);
  for (std::size_t t = 0; t < s.slots.size(); ++t) {
    if (s.slots[t].size() != n_pipes) bad.push_back(fmt::format("slot {} has {} entries", t, s.slots[t].size()));
    for (std::size_t pipe = 0; pipe < s.slots[t].size(); ++pipe) {
      const auto& entry = s.slots[t][pipe];
      if (!entry) continue;
      if (*entry >= p.instrs.size()) {
        bad.push_back(fmt::format("slot {} names instruction {} outside the program", t, *entry));
        continue;
      }
      ++seen[*entry];
      const Placement& pl = s.placement[*entry];
      if (pl.slot != t || pl.pipe != static_cast<int>(pipe))
        bad.push_back(fmt::format("instruction {} in grid at ({},{}) but placed at ({},{})", *entry, t, pipe + 1,
                                  pl.slot, pl.pipe + 1));
      const FUClass fu = fu_class_of(p.instrs[*entry].kind);
      if (!s.config.supports(static_cast<int>(pipe), fu))
        bad.push_back(fmt::format("instruction {} needs {} but pipe {} lacks it", *entry, fu_class_name(fu), pipe + 1));
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1) bad.push_back(fmt::format("instruction {} appears {} times", i, seen[i]));

  std::size_t expected_first = 0;
  for (const BasicBlock& block : s.blocks) {
    const std::size_t first = s.block_first_slot[block.id];
    const std::size_t last = first + s.block_slot_count[block.id] - 1;
    if (first != expected_first) bad.push_back(fmt::format("block {} does not start right after its predecessor", block.id));
    expected_first = last + 1;
    for (std::size_t i = block.first; i <= block.last; ++i)
      if (s.placement[i].slot < first || s.placement[i].slot > last)
        bad.push_back(fmt::format("instruction {} placed outside block {}", i, block.id));

    const DependenceGraph graph = build_depgraph(p, block, s.config);
    for (const DepEdge& e : graph.edges)
      if (s.placement[e.to].slot < s.placement[e.from].slot + static_cast<std::size_t>(e.min_gap))
        bad.push_back(fmt::format("{} edge {}->{} needs gap {} but slots are {} and {}", dep_kind_name(e.kind), e.from,
                                  e.to, e.min_gap, s.placement[e.from].slot, s.placement[e.to].slot));

    if (is_terminator(p.instrs[block.last].kind)) {
      const Placement& term = s.placement[block.last];
      if (term.pipe != 0) bad.push_back(fmt::format("terminator of block {} is not on pipe 1", block.id));
      if (term.slot != last) bad.push_back(fmt::format("terminator of block {} is not in the final slot", block.id));
      for (std::size_t i = block.first; i < block.last; ++i)
        if (s.placement[i].slot > term.slot)
          bad.push_back(fmt::format("instruction {} issues after block {}'s terminator", i, block.id));
    }
  }
  if (expected_first != s.slots.size()) bad.push_back("slots exist beyond the last block");

  // Opcode subsets.
  if (s.per_pipe_isa.size() != n_pipes) {
    bad.push_back("per-pipe ISA table has the wrong size");
  } else {
    std::vector<std::set<Kind>> actual(n_pipes);
    for (std::size_t i = 0; i < p.instrs.size(); ++i)
      actual[static_cast<std::size_t>(s.placement[i].pipe)].insert(p.instrs[i].kind);
    if (actual != s.per_pipe_isa) bad.push_back("per-pipe ISA subsets disagree with placements");
    for (std::size_t pipe = 1; pipe < n_pipes; ++pipe)
      for (Kind k : s.per_pipe_isa[pipe])
        if (fu_class_of(k) == FUClass::Bru)
          bad.push_back(fmt::format("control-flow kind {} on pipe {}", kind_name(k), pipe + 1));
  }
  return bad;
}

}  // namespace pipeforge
