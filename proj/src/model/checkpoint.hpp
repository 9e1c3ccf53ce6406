#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model/config.hpp"
#include "tensor/adam.hpp"
#include "tensor/tensor.hpp"

namespace mg::model {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Optimizer and trainer bookkeeping stored with resumable checkpoints.
struct OptimizerSection {
  AdamState adam;
  std::map<std::string, std::string> counters;  // exact text encodings
};

// Binary container: magic, version, config text, parameter records,
// optional optimizer section, seed. All numbers little-endian.
struct Checkpoint {
  std::string magic = "MGLT";
  std::string config;  // serialized configuration
  std::vector<NamedTensor> params;
  std::optional<OptimizerSection> optimizer;
  uint64_t seed = 0;

  std::string encode() const;
  static Checkpoint decode(const std::string& bytes, const std::string& expected_magic = "MGLT");

  // Atomic write through a temporary file.
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path, const std::string& expected_magic = "MGLT");
};

constexpr uint32_t kCheckpointVersion = 1;

// Exact text encoding of a double for the counters map.
std::string exact(double v);
double parse_exact(const std::string& s);

}  // namespace mg::model
