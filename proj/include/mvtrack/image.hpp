#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace mvtrack {

/// 8-bit interleaved RGB, row-major, top-left origin.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, std::array<std::uint8_t, 3> rgb) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = rgb[0];
    data[i + 1] = rgb[1];
    data[i + 2] = rgb[2];
  }

  bool operator==(const RgbImage&) const = default;
};

}  // namespace mvtrack
