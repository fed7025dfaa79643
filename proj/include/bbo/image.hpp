#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bbo {

/// Row-major, channel-interleaved image with values in [0, 1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> pixels;

  std::size_t size() const { return width * height * channels; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }
};

/// Throws std::invalid_argument on inconsistent dimensions or values outside [0, 1].
void validate(const Image& image);

/// Binary PPM (P6, maxval 255). Samples map to [0, 1] by /255.
Image read_ppm(const std::filesystem::path& path);
Image decode_ppm(const std::string& bytes);
/// Quantizes with round-half-to-even of v * 255. Needs 3 channels.
std::string encode_ppm(const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Deterministic 64x64x3 smooth random Fourier fields rescaled to [0, 1].
/// Image i depends only on (seed, i), so prefixes agree across counts.
std::vector<Image> generate_synthetic_fakes(std::size_t count, std::uint64_t seed);
Image synthetic_fake(std::uint64_t seed, std::size_t index);

}  // namespace bbo
