#include "bbo/modifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbo {

double smooth_frequency(SmoothLevel level) {
  switch (level) {
    case SmoothLevel::Default: return 1.0 / 55.0;
    case SmoothLevel::Super: return 1.0 / 9.0;
    case SmoothLevel::Ultra: return 1.0 / 3.0;
    case SmoothLevel::Zeta: return 1.0 / 2.0;
  }
  throw std::invalid_argument("unknown smooth level");
}

namespace {

void check_shape(std::span<const double> values, std::span<const std::size_t> shape) {
  if (shape.empty()) throw std::invalid_argument("tensor operator needs a shaped search space");
  std::size_t product = 1;
  for (std::size_t e : shape) product *= e;
  if (product != values.size()) throw std::invalid_argument("tensor shape does not match the value count");
}

}  // namespace

double neighborhood_mean(std::span<const double> values, std::span<const std::size_t> shape, std::size_t cell) {
  const std::size_t dims = shape.size();
  // Row-major strides and the multi-index of `cell`.
  std::vector<std::size_t> stride(dims), index(dims), lo(dims), hi(dims);
  std::size_t s = 1;
  for (std::size_t d = dims; d-- > 0;) {
    stride[d] = s;
    s *= shape[d];
  }
  std::size_t rest = cell;
  for (std::size_t d = 0; d < dims; ++d) {
    index[d] = rest / stride[d];
    rest %= stride[d];
    lo[d] = index[d] == 0 ? 0 : index[d] - 1;
    hi[d] = std::min(index[d] + 1, shape[d] - 1);
  }
  // Odometer over the clipped box [lo, hi]. Summing deviations from the center
  // keeps constant neighborhoods exact.
  const double center = values[cell];
  std::vector<std::size_t> at = lo;
  double sum = 0.0;
  std::size_t count = 0;
  while (true) {
    std::size_t offset = 0;
    for (std::size_t d = 0; d < dims; ++d) offset += at[d] * stride[d];
    sum += values[offset] - center;
    ++count;
    std::size_t d = dims;
    while (d-- > 0) {
      if (at[d] < hi[d]) {
        ++at[d];
        break;
      }
      at[d] = lo[d];
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  return center + sum / static_cast<double>(count);
}

std::vector<double> smooth_tensor(std::span<const double> values, std::span<const std::size_t> shape, Rng& rng,
                                  double keep_prob) {
  check_shape(values, shape);
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!rng.bernoulli(keep_prob)) out[i] = neighborhood_mean(values, shape, i);
  return out;
}

SmoothModifier::SmoothModifier(const SearchSpace& space, std::unique_ptr<Optimizer> inner, SmoothConfig config,
                               std::uint64_t seed)
    : inner_(std::move(inner)), config_(config), rng_(seed) {
  if (!space.has_shape()) throw std::invalid_argument("smooth modifier needs a shaped search space");
  if (!space.all_real()) throw std::invalid_argument("smooth modifier needs real coordinates");
  shape_.assign(space.shape().begin(), space.shape().end());
}

void SmoothModifier::start(Evaluator& ev, Rng& rng, const std::optional<std::vector<double>>& initial) {
  inner_->start(ev, rng, initial);
}

void SmoothModifier::step(Evaluator& ev, Rng& rng) {
  inner_->step(ev, rng);
  ++iterations_;
  if (ev.exhausted() || !rng_.bernoulli(config_.frequency())) return;
  ++attempts_;
  const Candidate& current = inner_->parent();
  Candidate smoothed{smooth_tensor(current.values, shape_, rng_, config_.keep_prob), std::nullopt};
  ev.evaluate(smoothed);
  if (current.loss && *smoothed.loss < *current.loss) {
    inner_->replace_parent(std::move(smoothed));
    ++accepted_;
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<double> sign_scale(std::span<const double> x, double amplitude) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = amplitude * sign(x[i]);
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("blur sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
    const double w = std::exp(-static_cast<double>(d * d) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(d + radius)] = w;
    total += w;
  }
  for (double& w : k) w /= total;
  return k;
}

double default_kernel_sigma(std::span<const std::size_t> shape) {
  if (shape.size() < 2) throw std::invalid_argument("blur needs a {height, width[, channels]} shape");
  return static_cast<double>(shape[1]) / 8.0;
}

namespace {

// 1 / (sum of kernel weights that land inside [0, length)), per position.
std::vector<double> border_norms(const std::vector<double>& kernel, std::size_t length) {
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto len = static_cast<std::ptrdiff_t>(length);
  std::vector<double> norms(length);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    double total = 0.0;
    for (std::ptrdiff_t d = -radius; d <= radius; ++d)
      if (i + d >= 0 && i + d < len) total += kernel[static_cast<std::size_t>(d + radius)];
    norms[static_cast<std::size_t>(i)] = 1.0 / total;
  }
  return norms;
}

}  // namespace

GaussianBlur::GaussianBlur(std::span<const std::size_t> shape, double sigma) : sigma_(sigma) {
  if (shape.size() != 2 && shape.size() != 3)
    throw std::invalid_argument("blur needs a {height, width[, channels]} shape");
  height_ = shape[0];
  width_ = shape[1];
  channels_ = shape.size() == 3 ? shape[2] : 1;
  kernel_ = gaussian_kernel(sigma);
  row_norm_ = border_norms(kernel_, width_);
  col_norm_ = border_norms(kernel_, height_);
}

std::vector<double> GaussianBlur::operator()(std::span<const double> x) const {
  const std::size_t row = width_ * channels_;
  if (x.size() != height_ * row) throw std::invalid_argument("blur input does not match its shape");
  const auto radius = static_cast<std::ptrdiff_t>(kernel_.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(width_);
  const auto h = static_cast<std::ptrdiff_t>(height_);
  const auto c = static_cast<std::ptrdiff_t>(channels_);

  // Horizontal pass: shifted accumulation keeps the inner loop contiguous.
  std::vector<double> tmp(x.size(), 0.0);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    const double* in = x.data() + y * w * c;
    double* out = tmp.data() + y * w * c;
    for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
      const double k = kernel_[static_cast<std::size_t>(d + radius)];
      const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -d);
      const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w, w - d);
      for (std::ptrdiff_t j = x0 * c; j < x1 * c; ++j) out[j] += k * in[j + d * c];
    }
    for (std::ptrdiff_t xi = 0; xi < w; ++xi)
      for (std::ptrdiff_t ch = 0; ch < c; ++ch) out[xi * c + ch] *= row_norm_[static_cast<std::size_t>(xi)];
  }

  // Vertical pass.
  std::vector<double> result(x.size(), 0.0);
  const auto stride = static_cast<std::ptrdiff_t>(row);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    double* out = result.data() + y * stride;
    for (std::ptrdiff_t d = std::max(-radius, -y); d <= std::min(radius, h - 1 - y); ++d) {
      const double k = kernel_[static_cast<std::size_t>(d + radius)];
      const double* in = tmp.data() + (y + d) * stride;
      for (std::ptrdiff_t j = 0; j < stride; ++j) out[j] += k * in[j];
    }
    const double norm = col_norm_[static_cast<std::size_t>(y)];
    for (std::ptrdiff_t j = 0; j < stride; ++j) out[j] *= norm;
  }
  return result;
}

std::vector<double> gaussian_blur(std::span<const double> x, std::span<const std::size_t> shape, double sigma) {
  return GaussianBlur(shape, sigma)(x);
}

void GaussianBlur::add_impulse(std::span<double> out, std::size_t index, double delta) const {
  const auto radius = static_cast<std::ptrdiff_t>(kernel_.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(width_);
  const auto h = static_cast<std::ptrdiff_t>(height_);
  const auto c = static_cast<std::ptrdiff_t>(channels_);
  const auto i = static_cast<std::ptrdiff_t>(index);
  const std::ptrdiff_t ch = i % c, x = (i / c) % w, y = i / (c * w);

  const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, x - radius), x1 = std::min(w - 1, x + radius);
  const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, y - radius), y1 = std::min(h - 1, y + radius);
  double across[64 * 2 + 1];
  std::vector<double> wide;
  double* weights = across;
  if (x1 - x0 + 1 > static_cast<std::ptrdiff_t>(std::size(across))) {
    wide.resize(static_cast<std::size_t>(x1 - x0 + 1));
    weights = wide.data();
  }
  for (std::ptrdiff_t xi = x0; xi <= x1; ++xi)
    weights[xi - x0] = kernel_[static_cast<std::size_t>(xi - x + radius)] * row_norm_[static_cast<std::size_t>(xi)];
  for (std::ptrdiff_t yi = y0; yi <= y1; ++yi) {
    const double a =
        delta * kernel_[static_cast<std::size_t>(yi - y + radius)] * col_norm_[static_cast<std::size_t>(yi)];
    double* row = out.data() + (yi * w + x0) * c + ch;
    for (std::ptrdiff_t xi = 0; xi <= x1 - x0; ++xi) row[xi * c] += a * weights[xi];
  }
}

CachedBlur::CachedBlur(std::span<const std::size_t> shape, double sigma)
    : blur_(shape, sigma),
      // An impulse touches (2R+1)^2 cells, a full pass about 2 (2R+1) per cell.
      max_changed_(2 * blur_.size() / (2 * blur_.radius() + 1)) {}

const std::vector<double>& CachedBlur::operator()(std::span<const double> x) {
  if (x.size() != blur_.size()) throw std::invalid_argument("blur input does not match its shape");
  last_valid_ = false;
  bool incremental = anchor_loss_.has_value() && anchor_chain_ < kMaxChain;
  if (incremental) {
    changed_.clear();
    for (std::size_t i = 0; i < x.size() && incremental; ++i)
      if (x[i] != anchor_in_[i]) {
        changed_.push_back(i);
        incremental = changed_.size() <= max_changed_;
      }
  }
  last_in_.assign(x.begin(), x.end());
  if (incremental) {
    last_out_ = anchor_out_;
    for (std::size_t i : changed_) blur_.add_impulse(last_out_, i, x[i] - anchor_in_[i]);
    last_chain_ = anchor_chain_ + 1;
    ++incremental_;
  } else {
    last_out_ = blur_(x);
    last_chain_ = 0;
    ++full_;
  }
  last_valid_ = true;
  return last_out_;
}

void CachedBlur::observe(double loss) {
  if (!last_valid_ || std::isnan(loss)) return;
  if (anchor_loss_ && !(loss <= *anchor_loss_)) return;
  std::swap(anchor_in_, last_in_);
  std::swap(anchor_out_, last_out_);
  anchor_loss_ = loss;
  anchor_chain_ = last_chain_;
  last_valid_ = false;
}

LossFn wrap_loss_g(LossFn loss, double amplitude) {
  if (!(amplitude > 0.0)) throw std::invalid_argument("G amplitude must be positive");
  return [loss = std::move(loss), amplitude](std::span<const double> x) { return loss(sign_scale(x, amplitude)); };
}

LossFn wrap_loss_sm(LossFn loss, double kernel_sigma, std::span<const std::size_t> shape) {
  auto blur = std::make_shared<CachedBlur>(shape, kernel_sigma);
  return [loss = std::move(loss), blur](std::span<const double> x) {
    const double value = loss((*blur)(x));
    blur->observe(value);
    return value;
  };
}

LossFn wrap_loss_gsm(LossFn loss, double amplitude, double kernel_sigma, std::span<const std::size_t> shape) {
  if (!(amplitude > 0.0)) throw std::invalid_argument("G amplitude must be positive");
  auto blur = std::make_shared<CachedBlur>(shape, kernel_sigma);
  return [loss = std::move(loss), blur, amplitude](std::span<const double> x) {
    const double value = loss(sign_scale((*blur)(x), amplitude));
    blur->observe(value);
    return value;
  };
}

PointTransform make_point_transform(LossModifier modifier, const LossWrapperConfig& config,
                                    std::span<const std::size_t> shape) {
  if (modifier == LossModifier::None) return {};
  if (modifier == LossModifier::G) {
    if (!(config.amplitude > 0.0)) throw std::invalid_argument("G amplitude must be positive");
    const double amplitude = config.amplitude;
    return [amplitude](std::span<const double> x) { return sign_scale(x, amplitude); };
  }
  if (shape.empty()) throw std::invalid_argument("SM/GSM modifiers need a shaped search space");
  const double sigma = config.kernel_sigma.value_or(default_kernel_sigma(shape));
  auto blur = std::make_shared<const GaussianBlur>(shape, sigma);
  if (modifier == LossModifier::SM) return [blur](std::span<const double> x) { return (*blur)(x); };
  if (!(config.amplitude > 0.0)) throw std::invalid_argument("G amplitude must be positive");
  const double amplitude = config.amplitude;
  return [blur, amplitude](std::span<const double> x) { return sign_scale((*blur)(x), amplitude); };
}

Objective apply_loss_modifier(const Objective& objective, LossModifier modifier, const LossWrapperConfig& config) {
  const auto shape = objective.space.shape();
  switch (modifier) {
    case LossModifier::None:
      return objective;
    case LossModifier::G:
      return Objective{objective.space, wrap_loss_g(objective.loss, config.amplitude)};
    case LossModifier::SM:
    case LossModifier::GSM:
      if (shape.empty()) throw std::invalid_argument("SM/GSM modifiers need a shaped search space");
      const double sigma = config.kernel_sigma.value_or(default_kernel_sigma(shape));
      return Objective{objective.space, modifier == LossModifier::SM
                                            ? wrap_loss_sm(objective.loss, sigma, shape)
                                            : wrap_loss_gsm(objective.loss, config.amplitude, sigma, shape)};
  }
  return objective;
}

}  // namespace bbo
