#pragma once

// Evaluation functionals: boundary-weighted Charbonnier losses, MAD/MSE and
// the one-frame-delay flicker filter.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgmatte/image.hpp"

namespace bgmatte {

/// Per-pixel weights: 4 on the ground-truth boundary band, 1 elsewhere.
struct BoundaryWeightMask {
  int width = 0;
  int height = 0;
  std::vector<double> weights;

  double mean() const;
};

/// band = dilate(alpha > 0.05, r) and not erode(alpha > 0.95, r).
BoundaryWeightMask boundary_mask(const AlphaMatte& truth, int radius = 2);

BoundaryWeightMask uniform_weights(int width, int height, double weight = 1.0);

/// Mean over pixels and channels of gamma * sqrt((p - g)^2 + eps^2), summed
/// over frames. One gamma is shared by every frame.
double loss_bg(std::span<const Frame> predicted, std::span<const Frame> truth,
               const BoundaryWeightMask& gamma, double epsilon = 1e-6);

/// Same form as loss_bg with per-frame gammas.
double loss_bg(std::span<const Frame> predicted, std::span<const Frame> truth,
               std::span<const BoundaryWeightMask> gammas, double epsilon = 1e-6);

/// Un-normalised variant (sum over pixels and channels instead of mean).
double loss_bg_raw_sum(std::span<const Frame> predicted, std::span<const Frame> truth,
                       std::span<const BoundaryWeightMask> gammas, double epsilon = 1e-6);

double loss_alpha_hr(const AlphaMatte& predicted, const AlphaMatte& truth,
                     const BoundaryWeightMask& gamma, double epsilon = 1e-6);

double loss_alpha_hr_raw_sum(const AlphaMatte& predicted, const AlphaMatte& truth,
                             const BoundaryWeightMask& gamma, double epsilon = 1e-6);

double mad(const AlphaMatte& predicted, const AlphaMatte& truth);
double mse(const AlphaMatte& predicted, const AlphaMatte& truth);

/// MAD restricted to pixels where `region` is 1.
double mad_over(const AlphaMatte& predicted, const AlphaMatte& truth, const Mask& region);

/// Reporting scale for MAD/MSE (units of 1e-4).
constexpr double kMetricScale = 1e4;

struct OfdParams {
  double close_tol = 0.1;
  double flicker_tol = 0.3;

  friend bool operator==(const OfdParams&, const OfdParams&) = default;
};

struct OfdResult {
  std::vector<AlphaMatte> mattes;
  std::size_t corrected_pixels = 0;
  std::optional<std::string> warning;
};

/// For interior frames a pixel flickers when its neighbours in time agree
/// within close_tol and it differs from both by more than flicker_tol; it is
/// replaced by the neighbours' mean. The first and last frames pass through.
OfdResult ofd_filter(std::span<const AlphaMatte> mattes, const OfdParams& params = {});

/// Single-pixel form of the flicker rule; shared by the batch and streaming
/// filters.
inline bool is_flicker(double prev, double cur, double next, const OfdParams& p) {
  return std::abs(prev - next) <= p.close_tol && std::abs(cur - prev) > p.flicker_tol &&
         std::abs(cur - next) > p.flicker_tol;
}

/// Streaming form with one frame of delay: push() returns the filtered matte
/// of the previous frame once its successor is known; finish() drains.
class OfdStream {
 public:
  explicit OfdStream(OfdParams params = {}) : params_(params) {}

  std::optional<AlphaMatte> push(AlphaMatte matte);
  std::optional<AlphaMatte> finish();

  std::size_t corrected_pixels() const { return corrected_; }

 private:
  OfdParams params_;
  std::optional<AlphaMatte> before_;   // already emitted, kept as left neighbour
  std::optional<AlphaMatte> pending_;  // waiting for its right neighbour
  std::size_t corrected_ = 0;
};

}  // namespace bgmatte
