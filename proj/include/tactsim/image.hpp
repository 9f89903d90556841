#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tactsim::img {

// Interleaved 8-bit image, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  static Image8 make(int width, int height, int channels);

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const Image8&) const = default;
};

// PNG encoding with pinned filter and compression settings, so identical
// pixels always produce identical bytes.
std::vector<std::uint8_t> encode_png(const Image8& image);
Image8 decode_png(const std::uint8_t* bytes, std::size_t size);

// Write is atomic: bytes land in a sibling temp file first, then rename.
void write_png(const std::string& path, const Image8& image);
Image8 read_png(const std::string& path);

void write_file_atomic(const std::string& path, const void* bytes, std::size_t size);

// Box (area-average) downsample; deterministic rounding.
Image8 resample_area(const Image8& src, int out_width, int out_height);

double mean_abs_diff(const Image8& a, const Image8& b);

}  // namespace tactsim::img
