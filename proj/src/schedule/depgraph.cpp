#include <algorithm>

#include "pipeforge/schedule.hpp"

namespace pipeforge {

std::string_view dep_kind_name(DepKind kind) {
  switch (kind) {
    case DepKind::Raw: return "RAW";
    case DepKind::War: return "WAR";
    case DepKind::Waw: return "WAW";
    case DepKind::Mem: return "MEM";
    case DepKind::Flag: return "FLAG";
  }
  return "?";
}

bool DependenceGraph::has_edge(std::size_t from, std::size_t to) const {
  return std::any_of(edges.begin(), edges.end(), [&](const DepEdge& e) { return e.from == from && e.to == to; });
}

bool DependenceGraph::has_edge(std::size_t from, std::size_t to, DepKind kind) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const DepEdge& e) { return e.from == from && e.to == to && e.kind == kind; });
}

DependenceGraph build_depgraph(const Program& program, const BasicBlock& block, const PipelineConfig& config) {
  DependenceGraph graph;
  graph.block = block.id;
  std::vector<Effects> fx;
  for (std::size_t i = block.first; i <= block.last; ++i) {
    graph.nodes.push_back(i);
    fx.push_back(reads_writes(program.instrs[i]));
  }

  ResourceSet regs;
  for (std::size_t r = 0; r < kNumRegs; ++r) regs.set(r);
  regs.set(kSpResource);
  ResourceSet flags;
  flags.set(kFlagsResource);

  for (std::size_t a = 0; a < graph.nodes.size(); ++a) {
    const int raw_gap = config.latency(fu_class_of(program.instrs[graph.nodes[a]].kind));
    for (std::size_t b = a + 1; b < graph.nodes.size(); ++b) {
      const Effects& fa = fx[a];
      const Effects& fb = fx[b];
      auto add = [&](DepKind kind, int gap) { graph.edges.push_back({graph.nodes[a], graph.nodes[b], kind, gap}); };

      if ((fa.writes & fb.reads & regs).any()) add(DepKind::Raw, raw_gap);
      if ((fa.reads & fb.writes & regs).any()) add(DepKind::War, 1);
      if ((fa.writes & fb.writes & regs).any()) add(DepKind::Waw, 1);
      if ((fa.writes & fb.reads & flags).any()) {
        add(DepKind::Flag, raw_gap);
      } else if (((fa.writes & fb.writes) | (fa.reads & fb.writes)).test(kFlagsResource)) {
        add(DepKind::Flag, 1);
      }
      const bool mem_order = (fa.mem == MemEffect::Store && fb.mem != MemEffect::None) ||
                             (fa.mem == MemEffect::Load && fb.mem == MemEffect::Store);
      if (mem_order) add(DepKind::Mem, 1);
    }
  }
  return graph;
}

}  // namespace pipeforge
