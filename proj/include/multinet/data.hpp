// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "multinet/tensor.hpp"

namespace multinet {

// --- images -----------------------------------------------------------------

/// 8-bit interleaved RGB.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
};

/// Any PNG colour type / bit depth, converted to 8-bit RGB. Throws DataError with the path.
Image decode_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);
bool has_png_signature(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centres and edge clamping, scaled to [0,1]; (3,H,W).
Tensor<float> to_tensor(const Image& image, std::size_t height, std::size_t width);

// --- samples ----------------------------------------------------------------

struct SampleDescriptor {
  std::string path;
  std::size_t label = 0;
  std::string class_name;
  std::string magnification;
};

struct Sample {
  Tensor<float> image;  // (3,H,W) in [0,1]
  std::size_t label = 0;
  std::string class_name;
  std::string magnification;
  std::string source_path;
};

enum class Layout { kBreakhisTree, kManifest };
Layout parse_layout(const std::string& name);

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct ScanResult {
  std::vector<SampleDescriptor> samples;  // sorted by path
  std::vector<SkippedFile> skipped;
  std::vector<std::string> warnings;
  std::array<std::array<std::size_t, 4>, 8> counts{};  // [class][magnification]

  std::size_t count_magnification(std::size_t m) const;
  std::size_t count_class(std::size_t c) const;
};

/// breakhis-tree: `{benign|malignant}/{sub-class}/.../{40X|100X|200X|400X}/*.png`,
/// sub-class given as abbreviation or full name. manifest: CSV `path,class_name,magnification`
/// (root may be the CSV itself or a directory holding manifest.csv). Files whose
/// PNG signature is missing are listed in `skipped`. Throws DataError for a missing
/// root or an unknown class directory.
ScanResult scan_dataset(const std::filesystem::path& root, Layout layout);

/// Keeps samples of one magnification; throws ConfigError for an unknown token.
std::vector<SampleDescriptor> filter_magnification(const std::vector<SampleDescriptor>& samples,
                                                   const std::string& token);

Sample load_sample(const SampleDescriptor& d, std::size_t resolution);
/// Parallel decode, result in input order. Thread count is capped by MULTINET_THREADS.
std::vector<Sample> load_samples(const std::vector<SampleDescriptor>& ds, std::size_t resolution);
std::size_t decode_threads();

// --- splits -----------------------------------------------------------------

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

/// "70/15/15", "0.7,0.15,0.15" or "0.7:0.15:0.15". Throws ConfigError unless the ratios sum to 1.
SplitRatios parse_ratios(const std::string& text);

struct DatasetSplit {
  std::vector<SampleDescriptor> train, val, test;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

/// Per class, largest-remainder counts (within ±1 of the ratio), spread evenly
/// over magnifications; order within each cell shuffled by `seed`.
DatasetSplit split_dataset(const std::vector<SampleDescriptor>& samples, const SplitRatios& ratios,
                           std::uint64_t seed);

nlohmann::json split_record(const DatasetSplit& split);

// --- synthetic data ---------------------------------------------------------

struct SyntheticSpec {
  std::size_t images_per_class = 8;
  std::size_t resolution = 64;
  double noise = 0.05;  // std-dev of additive Gaussian noise, [0,1] intensity units
  std::uint64_t seed = 0;

  void validate() const;
};

struct TextureParams {
  double frequency;    // cycles per image side
  double orientation;  // radians
  std::array<double, 3> color;
};

TextureParams texture_for_class(std::size_t label);

/// Renders one image of class `label`; `index` selects the noise stream.
Image render_synthetic(const SyntheticSpec& spec, std::size_t label, std::size_t index);

/// Writes a breakhis-tree of PNGs, magnifications assigned round-robin. Returns
/// the written paths. Throws DataError when the directory is not writable.
std::vector<std::string> generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace multinet
