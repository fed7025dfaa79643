#include "bbo/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bbo/rng.hpp"

namespace bbo {

void validate(const Image& image) {
  if (image.width == 0 || image.height == 0 || image.channels == 0)
    throw std::invalid_argument("image dimensions must be positive");
  if (image.pixels.size() != image.size()) throw std::invalid_argument("pixel count does not match dimensions");
  for (double v : image.pixels)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("pixel value outside [0, 1]");
}

namespace {

struct PpmCursor {
  const std::string& bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t header_number() {
    skip_space_and_comments();
    std::size_t value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      any = true;
      if (value > (1u << 24)) throw std::runtime_error("PPM header value too large");
    }
    if (!any) throw std::runtime_error("malformed PPM header");
    return value;
  }
};

}  // namespace

Image decode_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw std::runtime_error("not a binary PPM (P6)");
  PpmCursor reader{bytes, 2};
  Image image;
  image.width = reader.header_number();
  image.height = reader.header_number();
  const std::size_t maxval = reader.header_number();
  if (maxval == 0 || maxval > 255) throw std::runtime_error("unsupported PPM maxval " + std::to_string(maxval));
  if (reader.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos])))
    throw std::runtime_error("malformed PPM header");
  ++reader.pos;
  image.channels = 3;
  if (image.width == 0 || image.height == 0) throw std::runtime_error("empty PPM image");
  if (bytes.size() - reader.pos < image.size()) throw std::runtime_error("truncated PPM pixel data");
  image.pixels.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i)
    image.pixels[i] = static_cast<double>(static_cast<unsigned char>(bytes[reader.pos + i])) /
                      static_cast<double>(maxval);
  return image;
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

std::string encode_ppm(const Image& image) {
  validate(image);
  if (image.channels != 3) throw std::invalid_argument("PPM output needs 3 channels");
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (double v : image.pixels) {
    // nearbyint follows the default round-to-nearest-even mode.
    const double q = std::clamp(std::nearbyint(v * 255.0), 0.0, 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = encode_ppm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Image synthetic_fake(std::uint64_t seed, std::size_t index) {
  constexpr std::size_t side = 64, channels = 3, max_freq = 4;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng(derive_seed(seed, "synthetic-fake", index));

  // One shared field and one per channel, each a sum of low-frequency
  // cosines with amplitudes decaying in the frequency norm.
  struct Wave {
    double fx, fy, amplitude, phase;
  };
  auto draw_field = [&] {
    std::vector<Wave> waves;
    for (std::size_t ky = 0; ky < max_freq; ++ky)
      for (std::size_t kx = 0; kx < max_freq; ++kx) {
        if (kx == 0 && ky == 0) continue;
        const double norm = std::hypot(static_cast<double>(kx), static_cast<double>(ky));
        waves.push_back({static_cast<double>(kx), static_cast<double>(ky), rng.normal() / norm,
                         rng.uniform(0.0, two_pi)});
      }
    return waves;
  };
  const std::vector<Wave> shared = draw_field();
  std::vector<std::vector<Wave>> own;
  for (std::size_t c = 0; c < channels; ++c) own.push_back(draw_field());

  auto eval = [&](const std::vector<Wave>& waves, std::size_t y, std::size_t x) {
    double v = 0.0;
    for (const auto& w : waves)
      v += w.amplitude * std::cos(two_pi * (w.fx * static_cast<double>(x) + w.fy * static_cast<double>(y)) /
                                      static_cast<double>(side) +
                                  w.phase);
    return v;
  };

  Image image{side, side, channels, std::vector<double>(side * side * channels)};
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      const double base = eval(shared, y, x);
      for (std::size_t c = 0; c < channels; ++c)
        image.pixels[(y * side + x) * channels + c] = 0.7 * base + 0.3 * eval(own[c], y, x);
    }
  const auto [lo, hi] = std::minmax_element(image.pixels.begin(), image.pixels.end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : image.pixels) v = range > 0.0 ? std::clamp((v - min) / range, 0.0, 1.0) : 0.5;
  return image;
}

std::vector<Image> generate_synthetic_fakes(std::size_t count, std::uint64_t seed) {
  std::vector<Image> images;
  images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) images.push_back(synthetic_fake(seed, i));
  return images;
}

}  // namespace bbo
