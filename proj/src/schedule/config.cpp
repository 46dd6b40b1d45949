#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "pipeforge/schedule.hpp"

namespace pipeforge {

PipelineConfig PipelineConfig::with_pipes(int n) {
  if (n < 1) throw ConfigError(fmt::format("pipe count must be at least 1, got {}", n));
  PipelineConfig config;
  config.n_pipes = n;
  config.fu_sets.clear();
  if (n == 1) {
    config.fu_sets.push_back({FUClass::Alu, FUClass::Bru, FUClass::Dmau});
    return config;
  }
  config.fu_sets.push_back({FUClass::Alu, FUClass::Bru});
  config.fu_sets.push_back({FUClass::Alu, FUClass::Dmau});
  for (int p = 2; p < n; ++p) config.fu_sets.push_back({FUClass::Alu});
  return config;
}

void validate(const PipelineConfig& c) {
  if (c.n_pipes < 1) throw ConfigError("pipes must be at least 1");
  if (c.fu_sets.size() != static_cast<std::size_t>(c.n_pipes))
    throw ConfigError(fmt::format("{} pipes but {} functional-unit sets", c.n_pipes, c.fu_sets.size()));
  for (int p = 0; p < c.n_pipes; ++p) {
    const FUSet& set = c.fu_sets[static_cast<std::size_t>(p)];
    if (set.empty()) throw ConfigError(fmt::format("pipe {} has no functional units", p + 1));
    if (p != 0 && set.contains(FUClass::Bru)) throw ConfigError(fmt::format("BRU is only allowed on pipe 1 (found on pipe {})", p + 1));
    const int dmau_pipe = c.n_pipes == 1 ? 0 : 1;
    if (p != dmau_pipe && set.contains(FUClass::Dmau))
      throw ConfigError(fmt::format("DMAU is only allowed on pipe {} (found on pipe {})", dmau_pipe + 1, p + 1));
  }
  const FUSet& first = c.fu_sets[0];
  if (!first.contains(FUClass::Alu) || !first.contains(FUClass::Bru))
    throw ConfigError("pipe 1 must contain ALU and BRU");
  const FUSet& mem_pipe = c.fu_sets[c.n_pipes == 1 ? 0 : 1];
  if (!mem_pipe.contains(FUClass::Dmau))
    throw ConfigError(c.n_pipes == 1 ? "a single pipe must also contain DMAU" : "pipe 2 must contain DMAU");
  if (c.alu_latency < 1 || c.load_latency < 1) throw ConfigError("latencies must be at least 1");
  if (c.branch_flush_penalty < 0) throw ConfigError("flush penalty must be non-negative");
  if (c.cond_branch_range_bytes < kInstrBytes || c.uncond_branch_range_bytes < kInstrBytes)
    throw ConfigError("branch ranges must cover at least one instruction");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int to_int(std::string_view value, std::string_view key, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(fmt::format("line {}: '{}' expects an integer, got '{}'", line, key, value));
  return v;
}

FUSet to_fu_set(std::string_view value, std::string_view key, int line) {
  FUSet set;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    std::string name(trim(value.substr(start, comma - start)));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    auto fu = parse_fu_class(name);
    if (!fu) throw ConfigError(fmt::format("line {}: '{}' has unknown unit '{}'", line, key, name));
    set.insert(*fu);
    start = comma + 1;
  }
  return set;
}

}  // namespace

PipelineConfig parse_machine_config(std::string_view text) {
  std::map<std::string, std::pair<std::string, int>> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (entries.contains(key)) throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
    entries.emplace(std::move(key), std::make_pair(std::move(value), line_no));
  }

  int pipes = 2;
  if (auto it = entries.find("pipes"); it != entries.end()) pipes = to_int(it->second.first, "pipes", it->second.second);
  PipelineConfig config = PipelineConfig::with_pipes(pipes);

  for (const auto& [key, entry] : entries) {
    const auto& [value, line] = entry;
    if (key == "pipes") continue;
    if (key.starts_with("fu.")) {
      int p = to_int(std::string_view(key).substr(3), key, line);
      if (p < 1 || p > pipes) throw ConfigError(fmt::format("line {}: '{}' names a pipe outside 1..{}", line, key, pipes));
      config.fu_sets[static_cast<std::size_t>(p - 1)] = to_fu_set(value, key, line);
    } else if (key == "latency.alu") {
      config.alu_latency = to_int(value, key, line);
    } else if (key == "latency.load") {
      config.load_latency = to_int(value, key, line);
    } else if (key == "flush_penalty") {
      config.branch_flush_penalty = to_int(value, key, line);
    } else if (key == "cond_branch_range") {
      config.cond_branch_range_bytes = to_int(value, key, line);
    } else if (key == "uncond_branch_range") {
      config.uncond_branch_range_bytes = to_int(value, key, line);
    } else {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line, key));
    }
  }
  validate(config);
  return config;
}

std::string render_machine_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "pipes = " << c.n_pipes << '\n';
  for (int p = 0; p < c.n_pipes; ++p) {
    out << "fu." << p + 1 << " = ";
    bool first = true;
    for (FUClass fu : c.fu_sets[static_cast<std::size_t>(p)]) {
      out << (first ? "" : ",") << fu_class_name(fu);
      first = false;
    }
    out << '\n';
  }
  out << "latency.alu = " << c.alu_latency << '\n'
      << "latency.load = " << c.load_latency << '\n'
      << "flush_penalty = " << c.branch_flush_penalty << '\n'
      << "cond_branch_range = " << c.cond_branch_range_bytes << '\n'
      << "uncond_branch_range = " << c.uncond_branch_range_bytes << '\n';
  return out.str();
}

}  // namespace pipeforge
