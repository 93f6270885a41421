#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ganeye {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kMarkerRed{255, 0, 0};
inline constexpr Rgb kMarkerBlue{0, 0, 255};

/// Packed 8-bit RGB raster, row-major, top row first.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
      pixels[i] = fill[0];
      pixels[i + 1] = fill[1];
      pixels[i + 2] = fill[2];
    }
  }

  Rgb at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }

  void set(int x, int y, Rgb c) {
    const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c[0];
    pixels[i + 1] = c[1];
    pixels[i + 2] = c[2];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// PNG codec (libpng). Decoding converts any PNG color type to 8-bit RGB.
std::vector<std::uint8_t> encode_png(const RgbImage& img);
RgbImage decode_png(std::span<const std::uint8_t> bytes);
void write_png(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Media type guessed from magic bytes, falling back to the file extension.
std::string sniff_media_type(std::span<const std::uint8_t> head, const std::filesystem::path& path);

}  // namespace ganeye
