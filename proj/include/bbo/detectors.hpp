#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include "bbo/image.hpp"

namespace bbo {

/// Query failure (crash, timeout, I/O). Attacks hit by one are reported as
/// errored rather than failed.
class DetectorError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed transport carrying a malformed response.
class ProtocolError : public DetectorError {
public:
  using DetectorError::DetectorError;
};

/// Black-box fake detector: probability in [0, 1] that an image is fake.
/// Scores are deterministic. Instances are not thread-safe.
class Detector {
public:
  virtual ~Detector() = default;

  double score(const Image& image) {
    ++queries_;
    return evaluate(image);
  }
  std::size_t query_count() const { return queries_; }

protected:
  virtual double evaluate(const Image& image) = 0;

private:
  std::size_t queries_ = 0;
};

using DetectorFactory = std::function<std::unique_ptr<Detector>()>;

class FunctionDetector final : public Detector {
public:
  explicit FunctionDetector(std::function<double(const Image&)> fn) : fn_(std::move(fn)) {}

protected:
  double evaluate(const Image& image) override { return fn_(image); }

private:
  std::function<double(const Image&)> fn_;
};

/// Seeded stand-in for a learned detector: grayscale, average pooling onto
/// an 8x8 grid (64 features), logistic(w . f + b) with w ~ N(0, 1). The bias
/// puts the median logit of uniform-noise images at 0.
class ToyDetector final : public Detector {
public:
  static constexpr std::size_t kGrid = 8;
  static constexpr std::size_t kCalibrationImages = 257;

  explicit ToyDetector(std::uint64_t seed);

  /// 64 pooled grayscale means, row-major over the grid.
  static std::vector<double> features(const Image& image);
  double logit(const Image& image) const;

  std::span<const double> weights() const { return weights_; }
  double bias() const { return bias_; }

protected:
  double evaluate(const Image& image) override;

private:
  std::vector<double> weights_;
  double bias_ = 0.0;
};

// Wire protocol, one request/response pair per query:
//   request  = "BBAT", u32 width, u32 height, u32 channels (little-endian),
//              then width*height*channels little-endian f32, row-major,
//              channel-interleaved
//   response = one little-endian f32 in [0, 1]

inline constexpr std::size_t kRequestHeaderSize = 16;

std::string encode_request(const Image& image);
/// Inverse of encode_request; throws ProtocolError on a malformed frame.
Image decode_request(std::string_view frame);
std::string encode_response(float score);
/// Throws ProtocolError unless `bytes` holds exactly one finite f32 in [0, 1].
double decode_response(std::span<const unsigned char> bytes);

/// Runs `command` through /bin/sh with stdin/stdout connected to a socket and
/// speaks the wire protocol over it. The child is started lazily and
/// restarted on the next query after a failure.
class SubprocessDetector final : public Detector {
public:
  explicit SubprocessDetector(std::string command,
                              std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~SubprocessDetector() override;

  SubprocessDetector(const SubprocessDetector&) = delete;
  SubprocessDetector& operator=(const SubprocessDetector&) = delete;

  bool running() const { return pid_ > 0; }
  std::size_t restarts() const { return spawns_ > 0 ? spawns_ - 1 : 0; }

protected:
  double evaluate(const Image& image) override;

private:
  void spawn();
  void shutdown(bool force);
  [[noreturn]] void fail(const std::string& what, bool protocol = false);

  std::string command_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  pid_t pid_ = -1;
  std::size_t spawns_ = 0;
};

/// "builtin:<seed>" or "subprocess:<command>". Throws std::invalid_argument.
DetectorFactory parse_detector_spec(const std::string& spec);

}  // namespace bbo
