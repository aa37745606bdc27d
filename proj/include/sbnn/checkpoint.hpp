#pragma once

#include <filesystem>

#include "sbnn/net.hpp"

namespace sbnn {

// Self-describing text checkpoint. Layout (line oriented):
//   sbnn_checkpoint v1
//   layers <L0> <L1> ... <LH>
//   activation tanh|relu
//   task regression|classification
//   seed <uint64>
//   beta                   (then ceil(K/8) lines of 8 shortest-round-trip
//                           decimal values, canonical flat order)
//   gamma                  (then lines of '0'/'1' characters, 100 per line)
//   end
// Values round-trip bit-exactly.
struct Checkpoint {
  Arch arch;
  ParamVector beta;
  Mask gamma;
  std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sbnn
