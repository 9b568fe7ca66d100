// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/models.hpp"

#include <algorithm>
#include <cctype>

#include "multinet/errors.hpp"
#include "multinet/multinet.hpp"
#include "multinet/vit.hpp"

namespace multinet {

namespace {

std::string trim_lower(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string resolve_alias(const std::string& name) {
  if (name == "resnet" || name == "resnet-style" || name == "residual") return "resnet-style";
  if (name == "efficientnet" || name == "efficient-style" || name == "efficient") return "efficient-style";
  if (name == "vit" || name == "deit" || name == "multinet") return name;
  std::string known;
  for (const char* b : kBranchNames) known += std::string(known.empty() ? "" : ", ") + b;
  throw ConfigError("unknown model branch '" + name + "' (known: " + known + ")");
}

void check_preset(const std::string& preset) {
  if (preset != "tiny" && preset != "base" && preset != "micro") {
    throw ConfigError("unknown preset '" + preset + "' (known: tiny, base, micro)");
  }
}

BackboneConfig backbone_preset(BackboneKind kind, const std::string& preset) {
  if (preset == "micro") return {kind, {2, 3}, 1, 3, 2};
  if (preset == "base") return {kind, {64, 128, 256, 512}, 2, 3, 4};
  return {kind, {16, 32, 32}, 1, 3, 2};
}

}  // namespace

std::vector<std::string> parse_pairing(const std::string& pairing) {
  const std::string s = trim_lower(pairing);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t plus = s.find('+', start);
    parts.push_back(s.substr(start, plus == std::string::npos ? std::string::npos : plus - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  if (parts.size() > 2) throw ConfigError("fused pairing '" + pairing + "' must name exactly two branches");
  for (auto& p : parts) {
    if (p.empty()) throw ConfigError("pairing '" + pairing + "' has an empty branch name");
    p = resolve_alias(p);
  }
  return parts;
}

std::string canonical_pairing(const std::string& pairing) {
  auto parts = parse_pairing(pairing);
  return parts.size() == 1 ? parts[0] : parts[0] + "+" + parts[1];
}

std::vector<std::string> evaluation_pairings() {
  return {"vit+multinet",  "vit+resnet-style",  "vit+efficient-style", "deit+multinet",
          "deit+resnet-style", "deit+efficient-style", "vit+deit"};
}

template <typename T>
std::unique_ptr<Classifier<T>> build_branch(const std::string& name, const ModelSpec& spec, std::mt19937_64& rng) {
  check_preset(spec.preset);
  const std::string branch = resolve_alias(trim_lower(name));
  if (branch == "vit" || branch == "deit") {
    VitConfig cfg;
    if (spec.preset == "base") {
      cfg = VitConfig::base(spec.image_size, spec.patch);
    } else if (spec.preset == "tiny") {
      cfg = VitConfig::tiny(spec.image_size, spec.patch);
    } else {
      cfg.patch = {spec.image_size, spec.image_size, spec.patch, 3, 8};
      cfg.encoder = {1, 2, 8, 16, 0.1};
    }
    cfg.encoder.dropout = spec.dropout;
    cfg.num_classes = spec.num_classes;
    cfg.distillation = branch == "deit";
    return std::make_unique<VisionTransformer<T>>(cfg, rng);
  }
  if (branch == "multinet") {
    MultiNetConfig cfg;
    if (spec.preset == "base") {
      cfg = MultiNetConfig::full(spec.image_size);
    } else if (spec.preset == "tiny") {
      cfg = MultiNetConfig::reduced(spec.image_size);
    } else {
      cfg.image_size = spec.image_size;
      cfg.vgg = backbone_preset(BackboneKind::kVgg, "micro");
      cfg.residual = backbone_preset(BackboneKind::kResidual, "micro");
      cfg.head.cascade_wide = 4;
      cfg.head.cascade_narrow = 3;
      cfg.head.mlp_hidden = 6;
      cfg.head.feature_dim = 5;
    }
    cfg.head.num_classes = spec.num_classes;
    cfg.head.dropout = spec.dropout;
    cfg.validate();
    return std::make_unique<MultiNet<T>>(cfg, rng);
  }
  BackboneClassifierConfig cfg;
  cfg.image_size = spec.image_size;
  cfg.num_classes = spec.num_classes;
  cfg.backbone =
      backbone_preset(branch == "resnet-style" ? BackboneKind::kResidual : BackboneKind::kEfficient, spec.preset);
  return std::make_unique<BackboneClassifier<T>>(cfg, rng);
}

template <typename T>
std::unique_ptr<Classifier<T>> build_model(const ModelSpec& spec, std::mt19937_64& rng) {
  auto parts = parse_pairing(spec.pairing);
  if (parts.size() == 1) return build_branch<T>(parts[0], spec, rng);
  auto a = build_branch<T>(parts[0], spec, rng);
  auto b = build_branch<T>(parts[1], spec, rng);
  return std::make_unique<FusedModel<T>>(std::move(a), std::move(b), spec.num_classes, rng);
}

template std::unique_ptr<Classifier<float>> build_model(const ModelSpec&, std::mt19937_64&);
template std::unique_ptr<Classifier<double>> build_model(const ModelSpec&, std::mt19937_64&);
template std::unique_ptr<Classifier<float>> build_branch(const std::string&, const ModelSpec&, std::mt19937_64&);
template std::unique_ptr<Classifier<double>> build_branch(const std::string&, const ModelSpec&, std::mt19937_64&);

}  // namespace multinet
