#pragma once

// Background restoration: accumulates background content seen across frames
// into a feature field plus a binary "restored" mask, one update per frame.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bgmatte/image.hpp"

namespace bgmatte {

/// Restored background at the working resolution (frame / 4 per dimension).
///
/// `feature` holds interleaved RGB background content (bgF); `mask` holds the
/// restored flags (bgM), exactly 0 or 1. `version` counts applied updates and
/// lets callers check which state a computation was derived from.
class BackgroundState {
 public:
  BackgroundState(int width, int height, std::vector<double> feature,
                  std::vector<std::uint8_t> mask, std::uint64_t version = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint64_t version() const { return version_; }

  std::span<const double> feature() const { return feature_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  Rgb feature_at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {feature_[i], feature_[i + 1], feature_[i + 2]};
  }
  std::uint8_t mask_at(int x, int y) const {
    return mask_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::size_t restored_count() const;

  friend bool operator==(const BackgroundState&, const BackgroundState&) = default;

 private:
  int width_;
  int height_;
  std::vector<double> feature_;
  std::vector<std::uint8_t> mask_;
  std::uint64_t version_;
};

/// Per-step masks: background that appeared for the first time, and
/// background seen both in the stored feature and the current frame.
struct BrmUpdateTrace {
  Mask newly_restored;
  Mask averaged;
};

struct BrmStep {
  BackgroundState state;
  BrmUpdateTrace trace;
};

/// Zero feature, zero mask.
BackgroundState init_state(int width, int height);

/// bgI = (1 - s_p) * frame_4x, per pixel and channel.
RgbField extract_bg_info(const Frame& frame_4x, const SemanticMap& semantic);

/// One literal step of the restoration recurrence:
///
///   new  = (bgM == 0) & ((1 - s_p) > 0.5)
///   avg  = (bgM == 1) & ((1 - s_p) > 0.5)
///   tmp  = bgF + new * bgI
///   bgF' = (1 - avg) * tmp + avg * ((tmp + bgI) / 2)
///   bgM' = bgM + new
BrmStep update(const BackgroundState& state, const RgbField& bg_info,
               const SemanticMap& semantic);

struct RenderedBackground {
  Frame frame;             // bgF clamped to [0,1]; unrestored pixels black
  Mask restored;           // copy of bgM
  std::size_t clamped = 0; // samples that were outside [0,1] before clamping
};

RenderedBackground render_background(const BackgroundState& state, int frame_index = 0);

}  // namespace bgmatte
