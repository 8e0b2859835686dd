#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace uaweight {

/// 8-bit interleaved RGB, row-major.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  std::uint8_t* at(std::size_t x, std::size_t y) { return &pixels[(y * width + x) * 3]; }
  const std::uint8_t* at(std::size_t x, std::size_t y) const { return &pixels[(y * width + x) * 3]; }

  bool operator==(const RgbImage&) const = default;
};

/// Grayscale plane in [0, 255], row-major.
struct LumaPlane {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

struct DecodedLuma {
  LumaPlane luma;
  std::array<double, 3> channel_means{};  // R, G, B
};

/// Decodes PNG or JPEG bytes (sniffed from the signature). Transparent PNG
/// pixels are composited onto black.
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image(const std::filesystem::path& path);

/// BT.601 luma (0.299 R + 0.587 G + 0.114 B) plus per-channel means.
DecodedLuma luma_from_rgb(const RgbImage& image);
DecodedLuma decode_luma(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace uaweight
