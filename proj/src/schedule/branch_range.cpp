#include <fmt/format.h>

#include "pipeforge/schedule.hpp"

namespace pipeforge {

std::size_t branch_span_bytes(const Program& program, std::size_t branch_index) {
  const std::size_t target = program.target_index(program.instrs.at(branch_index));
  const std::size_t span = target > branch_index ? target - branch_index : branch_index - target;
  return span * kInstrBytes;
}

namespace {

// `B<inverse> skip; B target; skip:` in place of the conditional branch at `at`.
Program expand_one(const Program& program, std::size_t at) {
  if (at + 1 >= program.instrs.size())
    throw BranchRangeError(fmt::format("conditional branch at {} has no fall-through to skip to", at));
  const Instruction& branch = program.instrs[at];

  Program out = program;
  const std::string skip = program.fresh_label("far_skip");
  out.instrs.insert(out.instrs.begin() + static_cast<std::ptrdiff_t>(at) + 1, ins::b(*branch.target));
  out.instrs[at] = ins::bcc(invert(branch.cond), skip);
  for (auto& [name, index] : out.labels)
    if (index > at) ++index;
  out.labels.emplace(skip, at + 2);
  return out;
}

}  // namespace

Program expand_long_branches(const Program& program, const PipelineConfig& config) {
  validate(program);
  Program current = program;
  const auto cond_range = static_cast<std::size_t>(config.cond_branch_range_bytes);
  const auto uncond_range = static_cast<std::size_t>(config.uncond_branch_range_bytes);

  // Each expansion only lengthens spans, so scanning from the start after
  // every rewrite reaches the fixpoint.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < current.instrs.size(); ++i) {
      if (current.instrs[i].kind == Kind::Bcc && branch_span_bytes(current, i) > cond_range) {
        current = expand_one(current, i);
        changed = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < current.instrs.size(); ++i)
    if (current.instrs[i].kind == Kind::B && branch_span_bytes(current, i) > uncond_range)
      throw BranchRangeError(fmt::format("unconditional branch at {} to '{}' spans {} bytes (limit {})", i,
                                         *current.instrs[i].target, branch_span_bytes(current, i), uncond_range));
  return current;
}

}  // namespace pipeforge
