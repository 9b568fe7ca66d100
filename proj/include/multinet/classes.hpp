// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace multinet {

/// Label order used for every tensor, matrix axis and report row.
inline constexpr std::array<std::string_view, 8> kClassNames = {"A", "DC", "F", "LC", "MC", "PC", "PT", "TA"};

inline constexpr std::array<std::string_view, 8> kClassFullNames = {
    "adenosis",          "ductal_carcinoma",   "fibroadenoma",    "lobular_carcinoma",
    "mucinous_carcinoma", "papillary_carcinoma", "phyllodes_tumor", "tubular_adenoma"};

inline constexpr std::array<std::string_view, 4> kMagnifications = {"40X", "100X", "200X", "400X"};

/// Accepts the abbreviation or the full name, any case, '-' or '_' or ' ' as separator.
std::optional<std::size_t> class_index(std::string_view name);
/// "benign" or "malignant".
std::string_view class_group(std::size_t index);
/// Accepts "40x", "40X", "40".
std::optional<std::size_t> magnification_index(std::string_view token);

}  // namespace multinet
