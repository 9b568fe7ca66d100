// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <system_error>

#include "multinet/classes.hpp"
#include "multinet/data.hpp"
#include "multinet/errors.hpp"

namespace fs = std::filesystem;

namespace multinet {

void SyntheticSpec::validate() const {
  if (images_per_class == 0) throw ConfigError("images per class must be at least 1");
  if (resolution < 4) throw ConfigError("synthetic resolution must be at least 4 pixels");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("synthetic noise must be a finite value >= 0");
}

TextureParams texture_for_class(std::size_t label) {
  // Frequencies and orientations chosen so no two classes share both.
  static const TextureParams table[8] = {
      {2.0, 0.0, {0.95, 0.55, 0.70}},
      {3.0, std::numbers::pi / 4, {0.55, 0.35, 0.75}},
      {4.0, std::numbers::pi / 2, {0.90, 0.70, 0.80}},
      {5.0, 3 * std::numbers::pi / 4, {0.60, 0.45, 0.65}},
      {2.5, std::numbers::pi / 3, {0.80, 0.60, 0.90}},
      {6.0, std::numbers::pi / 6, {0.70, 0.40, 0.55}},
      {3.5, 2 * std::numbers::pi / 3, {0.85, 0.50, 0.60}},
      {4.5, 5 * std::numbers::pi / 6, {0.65, 0.60, 0.85}},
  };
  if (label >= 8) throw ConfigError("synthetic class index " + std::to_string(label) + " is out of range");
  return table[label];
}

Image render_synthetic(const SyntheticSpec& spec, std::size_t label, std::size_t index) {
  spec.validate();
  const TextureParams tex = texture_for_class(label);
  const std::size_t res = spec.resolution;
  std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);
  const double c = std::cos(tex.orientation), s = std::sin(tex.orientation);
  Image img{res, res, std::vector<std::uint8_t>(res * res * 3)};
  for (std::size_t y = 0; y < res; ++y) {
    for (std::size_t x = 0; x < res; ++x) {
      const double u = (static_cast<double>(x) * c + static_cast<double>(y) * s) / static_cast<double>(res);
      const double wave = std::sin(2.0 * std::numbers::pi * tex.frequency * u);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double v = tex.color[ch] * (0.6 + 0.4 * wave);
        if (spec.noise > 0.0) v += noise(rng);
        img.rgb[(y * res + x) * 3 + ch] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      }
    }
  }
  return img;
}

std::vector<std::string> generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir) {
  spec.validate();
  std::vector<std::string> written;
  for (std::size_t label = 0; label < kClassNames.size(); ++label) {
    const fs::path class_dir = out_dir / std::string(class_group(label)) / std::string(kClassFullNames[label]);
    for (std::size_t i = 0; i < spec.images_per_class; ++i) {
      const std::string mag(kMagnifications[i % kMagnifications.size()]);
      const fs::path dir = class_dir / mag;
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
      char name[64];
      std::snprintf(name, sizeof(name), "SYN_%s_%04zu-%s.png", std::string(kClassNames[label]).c_str(), i,
                    mag.c_str());
      const fs::path file = dir / name;
      write_png(file, render_synthetic(spec, label, i));
      written.push_back(file.string());
    }
  }
  return written;
}

}  // namespace multinet
