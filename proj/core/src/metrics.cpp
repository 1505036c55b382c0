#include "bgmatte/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bgmatte/error.hpp"

namespace bgmatte {
namespace {

void require_same(int w, int h, int ew, int eh, const char* what) {
  if (w != ew || h != eh) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(what) + ": " + std::to_string(w) + "x" + std::to_string(h) +
                    " vs " + std::to_string(ew) + "x" + std::to_string(eh));
  }
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::contract, "epsilon must be positive");
}

double charbonnier(double d, double epsilon) { return std::sqrt(d * d + epsilon * epsilon); }

// Sum of gamma * charbonnier(p - g) over pixels and `channels` channels.
double weighted_sum(std::span<const double> p, std::span<const double> g, int channels,
                    const BoundaryWeightMask& gamma, double epsilon) {
  double total = 0.0;
  for (std::size_t i = 0; i < gamma.weights.size(); ++i) {
    double px = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t k = i * channels + c;
      px += charbonnier(p[k] - g[k], epsilon);
    }
    total += gamma.weights[i] * px;
  }
  return total;
}

double frames_loss(std::span<const Frame> predicted, std::span<const Frame> truth,
                   std::span<const BoundaryWeightMask> gammas, double epsilon, bool mean) {
  require_epsilon(epsilon);
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "loss_bg: " + std::to_string(predicted.size()) + " predicted frames vs " +
                    std::to_string(truth.size()) + " ground-truth frames");
  }
  if (gammas.size() != 1 && gammas.size() != predicted.size()) {
    throw Error(ErrorKind::dimension_mismatch, "loss_bg: need one gamma or one per frame");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const Frame& p = predicted[t];
    const Frame& g = truth[t];
    const BoundaryWeightMask& gamma = gammas.size() == 1 ? gammas[0] : gammas[t];
    require_same(p.width(), p.height(), g.width(), g.height(), "loss_bg frame");
    require_same(gamma.width, gamma.height, g.width(), g.height(), "loss_bg gamma");
    const double s = weighted_sum(p.samples(), g.samples(), 3, gamma, epsilon);
    total += mean ? s / static_cast<double>(p.samples().size()) : s;
  }
  return total;
}

}  // namespace

double BoundaryWeightMask::mean() const {
  if (weights.empty()) return 0.0;
  return std::accumulate(weights.begin(), weights.end(), 0.0) /
         static_cast<double>(weights.size());
}

BoundaryWeightMask boundary_mask(const AlphaMatte& truth, int radius) {
  if (radius < 1) throw Error(ErrorKind::contract, "boundary radius must be >= 1");
  const int w = truth.width();
  const int h = truth.height();
  Mask some(w, h);
  Mask solid(w, h);
  const auto a = truth.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    some.values[i] = a[i] > 0.05 ? 1 : 0;
    solid.values[i] = a[i] > 0.95 ? 1 : 0;
  }
  const Mask outer = dilate(some, radius);
  const Mask inner = erode(solid, radius);
  BoundaryWeightMask gamma{w, h, std::vector<double>(a.size(), 1.0)};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (outer.values[i] && !inner.values[i]) gamma.weights[i] = 4.0;
  }
  return gamma;
}

BoundaryWeightMask uniform_weights(int width, int height, double weight) {
  return {width, height,
          std::vector<double>(static_cast<std::size_t>(width) * height, weight)};
}

double loss_bg(std::span<const Frame> predicted, std::span<const Frame> truth,
               const BoundaryWeightMask& gamma, double epsilon) {
  return frames_loss(predicted, truth, std::span(&gamma, 1), epsilon, true);
}

double loss_bg(std::span<const Frame> predicted, std::span<const Frame> truth,
               std::span<const BoundaryWeightMask> gammas, double epsilon) {
  return frames_loss(predicted, truth, gammas, epsilon, true);
}

double loss_bg_raw_sum(std::span<const Frame> predicted, std::span<const Frame> truth,
                       std::span<const BoundaryWeightMask> gammas, double epsilon) {
  return frames_loss(predicted, truth, gammas, epsilon, false);
}

double loss_alpha_hr(const AlphaMatte& predicted, const AlphaMatte& truth,
                     const BoundaryWeightMask& gamma, double epsilon) {
  return loss_alpha_hr_raw_sum(predicted, truth, gamma, epsilon) /
         static_cast<double>(truth.pixel_count());
}

double loss_alpha_hr_raw_sum(const AlphaMatte& predicted, const AlphaMatte& truth,
                             const BoundaryWeightMask& gamma, double epsilon) {
  require_epsilon(epsilon);
  require_same(predicted.width(), predicted.height(), truth.width(), truth.height(),
               "loss_alpha_hr matte");
  require_same(gamma.width, gamma.height, truth.width(), truth.height(), "loss_alpha_hr gamma");
  return weighted_sum(predicted.values(), truth.values(), 1, gamma, epsilon);
}

double mad(const AlphaMatte& predicted, const AlphaMatte& truth) {
  require_same(predicted.width(), predicted.height(), truth.width(), truth.height(), "mad");
  const auto p = predicted.values();
  const auto g = truth.values();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - g[i]);
  return total / static_cast<double>(p.size());
}

double mse(const AlphaMatte& predicted, const AlphaMatte& truth) {
  require_same(predicted.width(), predicted.height(), truth.width(), truth.height(), "mse");
  const auto p = predicted.values();
  const auto g = truth.values();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] - g[i]) * (p[i] - g[i]);
  return total / static_cast<double>(p.size());
}

double mad_over(const AlphaMatte& predicted, const AlphaMatte& truth, const Mask& region) {
  require_same(predicted.width(), predicted.height(), truth.width(), truth.height(), "mad");
  require_same(region.width, region.height, truth.width(), truth.height(), "mad region");
  const auto p = predicted.values();
  const auto g = truth.values();
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!region.values[i]) continue;
    total += std::abs(p[i] - g[i]);
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

namespace {

AlphaMatte filter_middle(const AlphaMatte& prev, const AlphaMatte& cur, const AlphaMatte& next,
                         const OfdParams& params, std::size_t& corrected) {
  require_same(prev.width(), prev.height(), cur.width(), cur.height(), "ofd_filter");
  require_same(next.width(), next.height(), cur.width(), cur.height(), "ofd_filter");
  const auto a = prev.values();
  const auto b = cur.values();
  const auto c = next.values();
  std::vector<double> out(b.begin(), b.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (is_flicker(a[i], b[i], c[i], params)) {
      out[i] = (a[i] + c[i]) / 2.0;
      ++corrected;
    }
  }
  return AlphaMatte(cur.width(), cur.height(), std::move(out), cur.resolution());
}

}  // namespace

OfdResult ofd_filter(std::span<const AlphaMatte> mattes, const OfdParams& params) {
  OfdResult result;
  result.mattes.assign(mattes.begin(), mattes.end());
  if (mattes.size() < 3) {
    result.warning = "ofd_filter needs at least 3 frames, got " +
                     std::to_string(mattes.size()) + "; passing through unchanged";
    return result;
  }
  for (std::size_t t = 1; t + 1 < mattes.size(); ++t) {
    result.mattes[t] =
        filter_middle(mattes[t - 1], mattes[t], mattes[t + 1], params, result.corrected_pixels);
  }
  return result;
}

std::optional<AlphaMatte> OfdStream::push(AlphaMatte matte) {
  if (!pending_) {
    pending_ = std::move(matte);
    return std::nullopt;
  }
  if (!before_) {
    AlphaMatte first = *pending_;
    before_ = std::move(pending_);
    pending_ = std::move(matte);
    return first;
  }
  AlphaMatte filtered = filter_middle(*before_, *pending_, matte, params_, corrected_);
  before_ = std::move(pending_);
  pending_ = std::move(matte);
  return filtered;
}

std::optional<AlphaMatte> OfdStream::finish() {
  std::optional<AlphaMatte> last = std::move(pending_);
  pending_.reset();
  before_.reset();
  return last;
}

}  // namespace bgmatte
