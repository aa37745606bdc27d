#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sbnn/data.hpp"
#include "sbnn/elicit.hpp"

namespace sbnn {

struct CsvRef {
  std::string train;
  std::string test;
  std::string validation;  // optional, may be empty
};

// Dataset reference: exactly one of generator / csv.
struct DataRef {
  std::optional<GeneratorSpec> generator;
  std::optional<CsvRef> csv;
};

struct RunConfig {
  Arch arch;
  PriorHyper prior;
  SgdConfig train;
  SgdConfig refine;
  int tries = 10;
  SelectionMode selection_mode = SelectionMode::kBic;
  bool second_sparsify_pass = false;
  std::int64_t evidence_dim_cap = 5000;
  DataRef data;
  int replicates = 1;
  std::uint64_t base_seed = 0;
  int workers = 0;  // 0 = hardware concurrency
  std::string output_dir = "runs/out";

  // Structural validation plus invariants of every nested type. With
  // `check_files`, referenced CSV paths must exist.
  void validate(bool check_files = false) const;
};

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);  // stable formatting
RunConfig config_from_json(const std::string& text);

}  // namespace sbnn
