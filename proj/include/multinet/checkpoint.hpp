// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "multinet/module.hpp"
#include "multinet/optim.hpp"

namespace multinet {

/// File layout: 8-byte magic, u32 format version, u64 header length, UTF-8
/// JSON header, then the little-endian IEEE-754 payload at the offsets the
/// header lists.
inline constexpr char kCheckpointMagic[8] = {'M', 'N', 'V', 'I', 'T', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;  // widened; `dtype` says how it is stored on disk
};

struct CheckpointData {
  std::uint32_t version = kCheckpointVersion;
  std::string pairing;
  std::string dtype = "f32";  // f32 | f64
  nlohmann::json config = nlohmann::json::object();
  std::vector<StoredTensor> tensors;    // model parameters
  std::vector<StoredTensor> optimizer;  // "m/<name>" and "v/<name>"
  std::uint64_t optimizer_step = 0;
  bool has_optimizer = false;

  const StoredTensor* find(const std::string& name) const;
};

template <typename T>
CheckpointData make_checkpoint(const ParameterList<T>& params, const OptimizerState<T>* state,
                               const std::string& pairing, const nlohmann::json& config);

/// Throws CheckpointError on I/O failure.
void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data);
std::vector<std::uint8_t> serialize_checkpoint(const CheckpointData& data);

/// Throws CheckpointError for a bad magic, an unsupported version or a truncated payload.
CheckpointData read_checkpoint(const std::filesystem::path& path);
CheckpointData deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

struct LoadOptions {
  /// Strict loads require every parameter to be present; otherwise missing
  /// names are left untouched.
  bool strict = true;
  /// Only checkpoint tensors starting with `source_prefix` are considered;
  /// the prefix is replaced by `target_prefix` before matching.
  std::string source_prefix;
  std::string target_prefix;
};

/// Copies stored values into matching parameters and returns the names that
/// were written. A shape mismatch throws ShapeError naming the tensor.
template <typename T>
std::vector<std::string> load_parameters(const CheckpointData& data, ParameterList<T>& params,
                                         const LoadOptions& options = {});

/// Rebuilds optimizer moments for `params` from the checkpoint.
template <typename T>
OptimizerState<T> load_optimizer_state(const CheckpointData& data, const ParameterList<T>& params);

}  // namespace multinet
