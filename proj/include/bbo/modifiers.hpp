#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbo/evaluator.hpp"
#include "bbo/optimizers.hpp"
#include "bbo/rng.hpp"

namespace bbo {

// ---------------------------------------------------------------------------
// Smooth family: periodic tentative replacement of the incumbent by a locally
// averaged copy, accepted only on strict improvement.
// ---------------------------------------------------------------------------

enum class SmoothLevel { Default, Super, Ultra, Zeta };

/// Attempts per iteration: Default 1/55, Super 1/9, Ultra 1/3, Zeta 1/2.
double smooth_frequency(SmoothLevel level);

struct SmoothConfig {
  SmoothLevel level = SmoothLevel::Default;
  double keep_prob = 0.75;
  static constexpr std::size_t kWindow = 3;

  double frequency() const { return smooth_frequency(level); }
};

/// Each cell keeps its value with probability `keep_prob`, otherwise takes the
/// mean of the cells at Chebyshev distance <= 1 over all tensor axes (center
/// included, truncated at the borders). Means read the unmodified input.
std::vector<double> smooth_tensor(std::span<const double> values, std::span<const std::size_t> shape, Rng& rng,
                                  double keep_prob = 0.75);

/// Neighborhood mean of one cell, as used by smooth_tensor.
double neighborhood_mean(std::span<const double> values, std::span<const std::size_t> shape, std::size_t cell);

/// Wraps any optimizer: after each inner iteration, with probability
/// `frequency`, evaluates Smooth(parent) and replaces the inner parent when
/// the loss is strictly lower. Uses its own random stream so the wrapped
/// optimizer sees exactly the draws it would see unwrapped.
class SmoothModifier final : public Optimizer {
public:
  SmoothModifier(const SearchSpace& space, std::unique_ptr<Optimizer> inner, SmoothConfig config,
                 std::uint64_t seed);

  void start(Evaluator& ev, Rng& rng, const std::optional<std::vector<double>>& initial) override;
  void step(Evaluator& ev, Rng& rng) override;

  const Candidate& parent() const override { return inner_->parent(); }
  void replace_parent(Candidate c) override { inner_->replace_parent(std::move(c)); }

  std::size_t attempts() const { return attempts_; }
  std::size_t accepted() const { return accepted_; }
  const Optimizer& inner() const { return *inner_; }

private:
  std::unique_ptr<Optimizer> inner_;
  SmoothConfig config_;
  std::vector<std::size_t> shape_;
  Rng rng_;
  std::size_t attempts_ = 0;
  std::size_t accepted_ = 0;
};

// ---------------------------------------------------------------------------
// Loss transforms for bounded tensor attacks: G, SM and GSM.
// ---------------------------------------------------------------------------

enum class LossModifier { None, G, SM, GSM };

struct LossWrapperConfig {
  double amplitude = 0.03;
  /// Blur standard deviation in pixels; defaults to width / 8.
  std::optional<double> kernel_sigma;
};

/// sign(0) = 0, so untouched coordinates stay at zero.
double sign(double v);

std::vector<double> sign_scale(std::span<const double> x, double amplitude);

/// Sampled Gaussian exp(-d^2 / (2 sigma^2)) for |d| <= ceil(3 sigma), normalized to sum 1.
std::vector<double> gaussian_kernel(double sigma);

/// Blur width used when no sigma is configured: image width / 8.
double default_kernel_sigma(std::span<const std::size_t> shape);

/// Separable Gaussian blur over the two spatial axes of a {height, width} or
/// {height, width, channels} tensor, channels blurred independently. Near the
/// borders the truncated kernel is renormalized to sum 1.
class GaussianBlur {
public:
  GaussianBlur(std::span<const std::size_t> shape, double sigma);

  std::vector<double> operator()(std::span<const double> x) const;

  double sigma() const { return sigma_; }
  std::size_t radius() const { return kernel_.size() / 2; }
  std::size_t size() const { return height_ * width_ * channels_; }

  /// Adds the blur of delta * (unit impulse at `index`) to `out`.
  void add_impulse(std::span<double> out, std::size_t index, double delta) const;

private:
  std::size_t height_, width_, channels_;
  double sigma_;
  std::vector<double> kernel_;     // unnormalized, length 2R+1
  std::vector<double> row_norm_;   // 1 / sum of in-bounds weights, per column index
  std::vector<double> col_norm_;   // same, per row index
};

/// Blur that remembers the lowest-loss input reported through observe()
/// (latest among ties) together with its blurred image. An input differing
/// from it in few coordinates is blurred by adding impulses for those
/// coordinates only; otherwise, or after kMaxChain consecutive incremental
/// updates, the full blur runs. Not thread-safe.
class CachedBlur {
public:
  static constexpr std::size_t kMaxChain = 256;

  CachedBlur(std::span<const std::size_t> shape, double sigma);

  const std::vector<double>& operator()(std::span<const double> x);
  /// Reports the loss of the most recent input.
  void observe(double loss);

  std::size_t full_blurs() const { return full_; }
  std::size_t incremental_blurs() const { return incremental_; }

private:
  GaussianBlur blur_;
  std::size_t max_changed_;
  std::vector<double> anchor_in_, anchor_out_, last_in_, last_out_;
  std::optional<double> anchor_loss_;
  std::size_t anchor_chain_ = 0, last_chain_ = 0;
  bool last_valid_ = false;
  std::vector<std::size_t> changed_;
  std::size_t full_ = 0, incremental_ = 0;
};

std::vector<double> gaussian_blur(std::span<const double> x, std::span<const std::size_t> shape, double sigma);

/// loss_G(x) = loss(amplitude * sign(x))
LossFn wrap_loss_g(LossFn loss, double amplitude);
/// loss_SM(x) = loss(blur(x))
LossFn wrap_loss_sm(LossFn loss, double kernel_sigma, std::span<const std::size_t> shape);
/// loss_GSM(x) = loss(amplitude * sign(blur(x)))
LossFn wrap_loss_gsm(LossFn loss, double amplitude, double kernel_sigma, std::span<const std::size_t> shape);

using PointTransform = std::function<std::vector<double>(std::span<const double>)>;

/// The map from optimizer coordinates to the point the wrapped loss actually
/// evaluates. Empty for LossModifier::None. Throws when SM/GSM meet a space
/// without a 2D (or 2D x channels) shape.
PointTransform make_point_transform(LossModifier modifier, const LossWrapperConfig& config,
                                    std::span<const std::size_t> shape);

/// Objectives wrapped with SM or GSM keep a CachedBlur, so a wrapped
/// objective must not be called from several threads at once.
Objective apply_loss_modifier(const Objective& objective, LossModifier modifier, const LossWrapperConfig& config);

}  // namespace bbo
