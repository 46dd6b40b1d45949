#include "pipeforge/corpus.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pipeforge/frontend.hpp"

#ifndef PIPEFORGE_CORPUS_DIR
#define PIPEFORGE_CORPUS_DIR "corpus"
#endif

namespace pipeforge {

std::filesystem::path corpus_dir() {
  if (const char* env = std::getenv("PIPEFORGE_CORPUS_DIR"); env && *env) return env;
  return PIPEFORGE_CORPUS_DIR;
}

namespace {

CorpusEntry entry(std::string name, std::string description) {
  CorpusEntry e;
  e.asm_path = corpus_dir() / (name + ".s");
  e.name = std::move(name);
  e.description = std::move(description);
  return e;
}

const std::vector<CorpusEntry>& all_entries() {
  static const std::vector<CorpusEntry> entries = {
      entry("bubble_sort", "bubble sort of 16 words, branch-free compare-exchange"),
      entry("bit_string", "4 words rendered as ASCII bit strings"),
      entry("bit_count", "population count over 32 words"),
      entry("bit_shifter", "rotate-left-by-3 over 32 words"),
      entry("encryption", "16-word encryption kernel, XOR with key low byte"),
      entry("crc32", "CRC-32 of a 16-byte message"),
      entry("nibble_swap", "encryption variant that swaps nibbles of a[i] ^ key"),
  };
  return entries;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> benchmarks(all_entries().begin(), all_entries().begin() + 6);
  return benchmarks;
}

const CorpusEntry& find_corpus(const std::string& name) {
  for (const CorpusEntry& e : all_entries())
    if (e.name == name) return e;
  throw Error("unknown corpus program '" + name + "'");
}

Program load_program(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.stem().string());
}

Program load_corpus(const CorpusEntry& entry) { return load_program(entry.asm_path); }

}  // namespace pipeforge
