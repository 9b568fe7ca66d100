// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/classes.hpp"

#include <cctype>

namespace multinet {

namespace {

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == ' ') c = '_';
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::optional<std::size_t> class_index(std::string_view name) {
  const std::string key = normalize(name);
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (key == normalize(kClassNames[i]) || key == kClassFullNames[i]) return i;
  }
  return std::nullopt;
}

std::string_view class_group(std::size_t index) {
  switch (index) {
    case 0: case 2: case 6: case 7: return "benign";
    default: return "malignant";
  }
}

std::optional<std::size_t> magnification_index(std::string_view token) {
  std::string key = normalize(token);
  if (!key.empty() && key.back() == 'x') key.pop_back();
  for (std::size_t i = 0; i < kMagnifications.size(); ++i) {
    std::string_view m = kMagnifications[i];
    if (key == m.substr(0, m.size() - 1)) return i;
  }
  return std::nullopt;
}

}  // namespace multinet
