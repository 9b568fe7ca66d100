// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "multinet/model.hpp"

namespace multinet {

/// Branch names accepted in a pairing, after alias resolution.
inline constexpr const char* kBranchNames[] = {"vit", "deit", "multinet", "resnet-style", "efficient-style"};

/// "vit+multinet" → {"vit", "multinet"}. Accepts the aliases "resnet" and
/// "efficientnet". Throws ConfigError for unknown names or more than two branches.
std::vector<std::string> parse_pairing(const std::string& pairing);

/// Canonical form of a pairing string, e.g. "ViT + EfficientNet" → "vit+efficient-style".
std::string canonical_pairing(const std::string& pairing);

/// The fused pairings compared in the evaluation grid.
std::vector<std::string> evaluation_pairings();

struct ModelSpec {
  std::string pairing = "vit+multinet";
  std::string preset = "tiny";  // tiny | base | micro
  std::size_t image_size = 224;
  std::size_t patch = 16;
  std::size_t num_classes = 8;
  double dropout = 0.1;
};

/// Builds the named model. Fused models prefix their branches "branch_a." and
/// "branch_b." and the joint classifier "fusion.".
template <typename T>
std::unique_ptr<Classifier<T>> build_model(const ModelSpec& spec, std::mt19937_64& rng);

template <typename T>
std::unique_ptr<Classifier<T>> build_branch(const std::string& name, const ModelSpec& spec, std::mt19937_64& rng);

}  // namespace multinet
