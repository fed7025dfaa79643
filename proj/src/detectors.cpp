#include "bbo/detectors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "bbo/rng.hpp"

namespace bbo {

namespace {

constexpr char kMagic[4] = {'B', 'B', 'A', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::string encode_request(const Image& image) {
  validate(image);
  std::string out(kMagic, 4);
  out.reserve(kRequestHeaderSize + 4 * image.size());
  put_u32(out, static_cast<std::uint32_t>(image.width));
  put_u32(out, static_cast<std::uint32_t>(image.height));
  put_u32(out, static_cast<std::uint32_t>(image.channels));
  for (double v : image.pixels) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Image decode_request(std::string_view frame) {
  if (frame.size() < kRequestHeaderSize || std::memcmp(frame.data(), kMagic, 4) != 0)
    throw ProtocolError("request frame lacks the BBAT header");
  const auto* p = reinterpret_cast<const unsigned char*>(frame.data());
  Image image{get_u32(p + 4), get_u32(p + 8), get_u32(p + 12), {}};
  if (frame.size() != kRequestHeaderSize + 4 * image.size())
    throw ProtocolError("request frame length does not match its dimensions");
  image.pixels.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) image.pixels[i] = get_f32(p + kRequestHeaderSize + 4 * i);
  return image;
}

std::string encode_response(float score) {
  std::string out;
  put_u32(out, std::bit_cast<std::uint32_t>(score));
  return out;
}

double decode_response(std::span<const unsigned char> bytes) {
  auto hex = [&] {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (unsigned char b : bytes) {
      if (!s.empty()) s.push_back(' ');
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xf]);
    }
    return s;
  };
  if (bytes.size() != 4) throw ProtocolError("expected a 4-byte response, got bytes [" + hex() + "]");
  const float v = get_f32(bytes.data());
  if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
    throw ProtocolError("response is not a score in [0, 1], bytes [" + hex() + "]");
  return static_cast<double>(v);
}

ToyDetector::ToyDetector(std::uint64_t seed) : weights_(kGrid * kGrid) {
  Rng rng(derive_seed(seed, "toy-weights"));
  for (double& w : weights_) w = rng.normal();

  Rng noise(derive_seed(seed, "toy-calibration"));
  std::vector<double> logits;
  Image image{64, 64, 3, std::vector<double>(64 * 64 * 3)};
  for (std::size_t i = 0; i < kCalibrationImages; ++i) {
    for (double& v : image.pixels) v = noise.uniform01();
    logits.push_back(logit(image));
  }
  auto mid = logits.begin() + static_cast<std::ptrdiff_t>(logits.size() / 2);
  std::nth_element(logits.begin(), mid, logits.end());
  bias_ = -*mid;
}

std::vector<double> ToyDetector::features(const Image& image) {
  if (image.width < kGrid || image.height < kGrid)
    throw std::invalid_argument("toy detector needs images of at least 8x8 pixels");
  if (image.pixels.size() != image.size()) throw std::invalid_argument("pixel count does not match dimensions");

  const std::size_t c = image.channels;
  auto luma = [&](const double* px) {
    if (c == 3) return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += px[k];
    return sum / static_cast<double>(c);
  };

  std::vector<double> out(kGrid * kGrid);
  for (std::size_t gy = 0; gy < kGrid; ++gy) {
    const std::size_t y0 = gy * image.height / kGrid, y1 = (gy + 1) * image.height / kGrid;
    for (std::size_t gx = 0; gx < kGrid; ++gx) {
      const std::size_t x0 = gx * image.width / kGrid, x1 = (gx + 1) * image.width / kGrid;
      double sum = 0.0;
      for (std::size_t y = y0; y < y1; ++y) {
        const double* px = &image.pixels[(y * image.width + x0) * c];
        for (std::size_t x = x0; x < x1; ++x, px += c) sum += luma(px);
      }
      out[gy * kGrid + gx] = sum / static_cast<double>((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

double ToyDetector::logit(const Image& image) const {
  const auto f = features(image);
  double z = bias_;
  for (std::size_t i = 0; i < f.size(); ++i) z += weights_[i] * f[i];
  return z;
}

double ToyDetector::evaluate(const Image& image) { return logistic(logit(image)); }

DetectorFactory parse_detector_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "builtin") {
    std::uint64_t seed = 0;
    if (!arg.empty()) {
      std::size_t used = 0;
      try {
        seed = std::stoull(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != arg.size() || arg.front() == '-')
        throw std::invalid_argument("builtin detector seed must be a non-negative integer: '" + arg + "'");
    }
    return [seed] { return std::make_unique<ToyDetector>(seed); };
  }
  if (kind == "subprocess") {
    if (arg.empty()) throw std::invalid_argument("subprocess detector needs a command");
    return [arg] { return std::make_unique<SubprocessDetector>(arg); };
  }
  throw std::invalid_argument("unknown detector '" + spec + "' (expected builtin:<seed> or subprocess:<command>)");
}

}  // namespace bbo
