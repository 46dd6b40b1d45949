#include <algorithm>
#include <set>

#include "pipeforge/frontend.hpp"

namespace pipeforge {

std::vector<BasicBlock> build_cfg(const Program& program) {
  const std::size_t n = program.instrs.size();
  std::vector<BasicBlock> blocks;
  if (n == 0) return blocks;

  std::set<std::size_t> leaders{0};
  if (program.entry) leaders.insert(program.entry_index());
  for (std::size_t i = 0; i < n; ++i) {
    const Instruction& in = program.instrs[i];
    if (is_branch(in.kind)) leaders.insert(program.target_index(in));
    if (is_terminator(in.kind) && i + 1 < n) leaders.insert(i + 1);
  }

  std::vector<std::size_t> starts(leaders.begin(), leaders.end());
  for (std::size_t b = 0; b < starts.size(); ++b) {
    BasicBlock block;
    block.id = b;
    block.first = starts[b];
    block.last = (b + 1 < starts.size() ? starts[b + 1] : n) - 1;
    switch (program.instrs[block.last].kind) {
      case Kind::B: block.terminator = Terminator::B; break;
      case Kind::Bcc: block.terminator = Terminator::Bcc; break;
      case Kind::Halt: block.terminator = Terminator::Halt; break;
      default: block.terminator = Terminator::None; break;
    }
    blocks.push_back(block);
  }

  auto block_starting_at = [&](std::size_t index) {
    auto it = std::lower_bound(starts.begin(), starts.end(), index);
    return static_cast<std::size_t>(it - starts.begin());
  };
  for (BasicBlock& block : blocks) {
    const bool has_next = block.id + 1 < blocks.size();
    switch (block.terminator) {
      case Terminator::B:
        block.successors.push_back(block_starting_at(program.target_index(program.instrs[block.last])));
        break;
      case Terminator::Bcc:
        if (has_next) block.successors.push_back(block.id + 1);
        block.successors.push_back(block_starting_at(program.target_index(program.instrs[block.last])));
        break;
      case Terminator::Halt:
        break;
      case Terminator::None:
        if (has_next) block.successors.push_back(block.id + 1);
        break;
    }
  }
  return blocks;
}

std::size_t block_of(const std::vector<BasicBlock>& cfg, std::size_t index) {
  auto it = std::upper_bound(cfg.begin(), cfg.end(), index,
                             [](std::size_t i, const BasicBlock& b) { return i < b.first; });
  if (it == cfg.begin()) throw Error("instruction index outside every block");
  --it;
  if (!it->contains(index)) throw Error("instruction index outside every block");
  return it->id;
}

}  // namespace pipeforge
