// Bundled benchmark kernels.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pipeforge/isa.hpp"
#include "pipeforge/sim.hpp"

namespace pipeforge {

struct CorpusEntry {
  std::string name;
  std::filesystem::path asm_path;
  MachineInit default_init;
  std::string description;
};

// $PIPEFORGE_CORPUS_DIR if set, else the source tree's corpus/.
std::filesystem::path corpus_dir();

// The six benchmarks, in a fixed order.
const std::vector<CorpusEntry>& corpus();

// Benchmarks plus variants (nibble_swap). Throws Error for unknown names.
const CorpusEntry& find_corpus(const std::string& name);

Program load_program(const std::filesystem::path& path);
Program load_corpus(const CorpusEntry& entry);

}  // namespace pipeforge
