// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "multinet/data.hpp"
#include "multinet/errors.hpp"

namespace multinet {

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Image decode_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw DataError("cannot decode " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out;
  out.width = img.width;
  out.height = img.height;
  out.rgb.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    std::string message = img.message;
    png_image_free(&img);
    throw DataError("cannot decode " + path.string() + ": " + message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.rgb.size() != image.width * image.height * 3 || image.width == 0 || image.height == 0) {
    throw DataError("write_png: image buffer does not match " + std::to_string(image.width) + "x" +
                    std::to_string(image.height) + " RGB");
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.rgb.data(), 0, nullptr)) {
    throw DataError("cannot write " + path.string() + ": " + img.message);
  }
}

Tensor<float> to_tensor(const Image& image, std::size_t height, std::size_t width) {
  if (image.width == 0 || image.height == 0 || height == 0 || width == 0) {
    throw DataError("cannot resize an empty image");
  }
  std::vector<float> out(3 * height * width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const auto max_y = static_cast<double>(image.height - 1), max_x = static_cast<double>(image.width - 1);
  for (std::size_t oy = 0; oy < height; ++oy) {
    const double fy = std::clamp((static_cast<double>(oy) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < width; ++ox) {
      const double fx = std::clamp((static_cast<double>(ox) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        auto px = [&](std::size_t y, std::size_t x) { return static_cast<double>(image.rgb[(y * image.width + x) * 3 + c]); };
        const double top = px(y0, x0) * (1 - wx) + px(y0, x1) * wx;
        const double bottom = px(y1, x0) * (1 - wx) + px(y1, x1) * wx;
        out[(c * height + oy) * width + ox] = static_cast<float>((top * (1 - wy) + bottom * wy) / 255.0);
      }
    }
  }
  return Tensor<float>({3, height, width}, std::move(out));
}

}  // namespace multinet
