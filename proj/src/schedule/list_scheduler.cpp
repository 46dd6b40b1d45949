#include <algorithm>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pipeforge/schedule.hpp"

namespace pipeforge {

namespace {

constexpr std::size_t kUnplaced = std::numeric_limits<std::size_t>::max();

struct Node {
  FUClass fu;
  std::vector<std::pair<std::size_t, int>> preds;  // (local index, min gap)
  std::vector<std::pair<std::size_t, int>> succs;
  int height = 1;
  std::size_t slot = kUnplaced;
  int pipe = -1;
};

// Kuhn's augmenting-path matching of `items` onto pipes 1..n-1.
bool match_to_side_pipes(const std::vector<std::size_t>& items, const std::vector<Node>& nodes,
                         const PipelineConfig& config, std::vector<int>& pipe_of_item) {
  std::vector<int> owner(static_cast<std::size_t>(config.n_pipes), -1);
  pipe_of_item.assign(items.size(), -1);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t item) -> bool {
    for (int p = 1; p < config.n_pipes; ++p) {
      if (seen[static_cast<std::size_t>(p)] || !config.supports(p, nodes[items[item]].fu)) continue;
      seen[static_cast<std::size_t>(p)] = 1;
      int& cur = owner[static_cast<std::size_t>(p)];
      if (cur < 0 || self(self, static_cast<std::size_t>(cur))) {
        cur = static_cast<int>(item);
        pipe_of_item[item] = p;
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < items.size(); ++i) {
    seen.assign(static_cast<std::size_t>(config.n_pipes), 0);
    if (!augment(augment, i)) return false;
  }
  return true;
}

class BlockScheduler {
 public:
  BlockScheduler(const Program& program, const BasicBlock& block, const PipelineConfig& config)
      : program_(program), block_(block), config_(config) {
    const DependenceGraph graph = build_depgraph(program, block, config);
    nodes_.resize(block.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i].fu = fu_class_of(program.instrs[block.first + i].kind);
    for (const DepEdge& e : graph.edges) {
      const std::size_t a = e.from - block.first;
      const std::size_t b = e.to - block.first;
      nodes_[a].succs.emplace_back(b, e.min_gap);
      nodes_[b].preds.emplace_back(a, e.min_gap);
    }
    for (std::size_t i = nodes_.size(); i-- > 0;)
      for (auto [s, gap] : nodes_[i].succs) nodes_[i].height = std::max(nodes_[i].height, gap + nodes_[s].height);
    if (is_terminator(program.instrs[block.last].kind)) terminator_ = nodes_.size() - 1;
  }

  // Returns the block's words; node placements are relative to its first slot.
  std::vector<LongWord> run() {
    if (config_.n_pipes == 1) return run_in_order();

    std::vector<LongWord> words;
    std::size_t remaining = nodes_.size();
    for (std::size_t t = 0; remaining > 0; ++t) {
      words.emplace_back(static_cast<std::size_t>(config_.n_pipes));
      LongWord& word = words.back();
      if (try_close(t, word)) break;

      std::vector<std::size_t> ready = ready_at(t);
      for (int p = 0; p < config_.n_pipes; ++p) {
        auto it = std::find_if(ready.begin(), ready.end(),
                               [&](std::size_t n) { return config_.supports(p, nodes_[n].fu); });
        if (it == ready.end()) continue;
        place(*it, t, p, word);
        ready.erase(it);
        --remaining;
      }
    }
    return words;
  }

  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<LongWord> run_in_order() {
    std::vector<LongWord> words;
    std::size_t t = 0;
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      t = std::max(t, earliest(n));
      while (words.size() <= t) words.emplace_back(1);
      place(n, t, 0, words[t]);
      ++t;
    }
    return words;
  }

  std::size_t earliest(std::size_t n) const {
    std::size_t at = 0;
    for (auto [p, gap] : nodes_[n].preds) at = std::max(at, nodes_[p].slot + static_cast<std::size_t>(gap));
    return at;
  }

  bool preds_placed(std::size_t n) const {
    return std::all_of(nodes_[n].preds.begin(), nodes_[n].preds.end(),
                       [&](auto pg) { return nodes_[pg.first].slot != kUnplaced; });
  }

  // Unplaced non-terminator nodes issuable at `t`, best first.
  std::vector<std::size_t> ready_at(std::size_t t) const {
    std::vector<std::size_t> ready;
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      if (nodes_[n].slot == kUnplaced && n != terminator_ && preds_placed(n) && earliest(n) <= t) ready.push_back(n);
    std::stable_sort(ready.begin(), ready.end(),
                     [&](std::size_t a, std::size_t b) { return nodes_[a].height > nodes_[b].height; });
    return ready;
  }

  // Puts the terminator on pipe 1 of this slot when every other unplaced
  // node can issue alongside it on the remaining pipes.
  bool try_close(std::size_t t, LongWord& word) {
    if (!terminator_) return false;
    const std::size_t term = *terminator_;
    if (!preds_placed(term) || earliest(term) > t) return false;
    std::vector<std::size_t> rest;
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      if (n != term && nodes_[n].slot == kUnplaced) {
        if (!preds_placed(n) || earliest(n) > t) return false;
        rest.push_back(n);
      }
    std::vector<int> pipes;
    if (!match_to_side_pipes(rest, nodes_, config_, pipes)) return false;
    place(term, t, 0, word);
    for (std::size_t i = 0; i < rest.size(); ++i) place(rest[i], t, pipes[i], word);
    return true;
  }

  void place(std::size_t n, std::size_t slot, int pipe, LongWord& word) {
    nodes_[n].slot = slot;
    nodes_[n].pipe = pipe;
    word[static_cast<std::size_t>(pipe)] = block_.first + n;
  }

  const Program& program_;
  const BasicBlock& block_;
  const PipelineConfig& config_;
  std::vector<Node> nodes_;
  std::optional<std::size_t> terminator_;
};

}  // namespace

Schedule schedule_program(const Program& program, const std::vector<BasicBlock>& cfg, const PipelineConfig& config) {
  validate(config);
  for (std::size_t i = 0; i < program.instrs.size(); ++i) {
    const FUClass fu = fu_class_of(program.instrs[i].kind);
    bool supported = false;
    for (int p = 0; p < config.n_pipes; ++p) supported = supported || config.supports(p, fu);
    if (!supported)
      throw ScheduleError(fmt::format("instruction {} ({}) needs {} but no pipe provides it", i,
                                      kind_name(program.instrs[i].kind), fu_class_name(fu)));
  }

  Schedule s;
  s.config = config;
  s.program = program;
  s.blocks = cfg;
  s.placement.resize(program.instrs.size());
  s.per_pipe_isa.resize(static_cast<std::size_t>(config.n_pipes));

  for (const BasicBlock& block : cfg) {
    BlockScheduler scheduler(program, block, config);
    std::vector<LongWord> words = scheduler.run();
    const std::size_t base = s.slots.size();
    s.block_first_slot.push_back(base);
    s.block_slot_count.push_back(words.size());
    for (std::size_t n = 0; n < scheduler.nodes().size(); ++n) {
      const Node& node = scheduler.nodes()[n];
      s.placement[block.first + n] = {base + node.slot, node.pipe};
      s.per_pipe_isa[static_cast<std::size_t>(node.pipe)].insert(program.instrs[block.first + n].kind);
    }
    for (LongWord& w : words) s.slots.push_back(std::move(w));
  }
  return s;
}

CodeSize code_sizes(const Schedule& s) {
  CodeSize size;
  size.words = s.slots.size();
  for (const LongWord& w : s.slots)
    for (const auto& entry : w)
      if (entry) ++size.instrs;
  size.bytes = size.words * static_cast<std::size_t>(s.config.n_pipes) * kInstrBytes;
  return size;
}

std::string render_schedule(const Schedule& s) {
  std::string out;
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const std::size_t first = s.block_first_slot[b];
    std::vector<std::string> names = s.program.labels_at(s.blocks[b].first);
    out += fmt::format("; block {}{}\n", b, names.empty() ? "" : " (" + fmt::format("{}", fmt::join(names, ", ")) + ")");
    for (std::size_t t = first; t < first + s.block_slot_count[b]; ++t) {
      out += fmt::format("{:5} |", t);
      for (const auto& entry : s.slots[t]) out += fmt::format(" {:<22}|", entry ? render(s.program.instrs[*entry]) : "-");
      out += '\n';
    }
  }
  return out;
}

}  // namespace pipeforge
