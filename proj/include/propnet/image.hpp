#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "propnet/numerics/tensor.hpp"

namespace propnet {

// Decoded 8-bit raster, channels interleaved per pixel. channels is 1
// (gray) or 3 (RGB); alpha is dropped on load.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
};

// Single-channel raster of intensities in [0, 1], row-major.
struct GrayRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  GrayRaster() = default;
  GrayRaster(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
  double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

// PNG (any bit depth / colour type) or binary PGM (P5, maxval ≤ 255).
Image load_image(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& gray);
void write_pgm(const std::filesystem::path& path, const GrayRaster& raster);
void write_png(const std::filesystem::path& path, const Image& image);

// ITU-R 601 luma, scaled to [0, 1].
GrayRaster to_grayscale(const Image& image);
GrayRaster tensor_to_grayscale(const Tensor& rgb);

// Bilinear resampling of planes[C×H×W] with half-pixel centres and
// clamped borders.
Tensor resize_bilinear(const Tensor& planes, std::size_t out_h, std::size_t out_w);

// Image as a [3×size×size] tensor in [0, 1]; gray input is replicated.
Tensor image_to_tensor(const Image& image, std::size_t size);

}  // namespace propnet
