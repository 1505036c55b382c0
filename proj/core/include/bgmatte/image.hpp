#pragma once

// Shared image and sequence value types. All sample math is done in double
// precision; quantization only happens at file I/O.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bgmatte {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Axis-aligned pixel rectangle, half-open on the right and bottom.
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const { return x + width; }
  int bottom() const { return y + height; }
  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// One RGB video frame. Channels are interleaved row-major and lie in [0,1].
class Frame {
 public:
  Frame(int index, int width, int height, std::vector<double> pixels);

  static Frame filled(int index, int width, int height, Rgb color);

  int index() const { return index_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const double> samples() const { return pixels_; }
  double at(int x, int y, int channel) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }
  Rgb rgb(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }

  Frame with_index(int index) const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int index_;
  int width_;
  int height_;
  std::vector<double> pixels_;
};

enum class Resolution { coarse, full };

/// Per-pixel opacity in [0,1].
class AlphaMatte {
 public:
  AlphaMatte(int width, int height, std::vector<double> values,
             Resolution tag = Resolution::full);

  static AlphaMatte filled(int width, int height, double value,
                           Resolution tag = Resolution::full);

  int width() const { return width_; }
  int height() const { return height_; }
  Resolution resolution() const { return tag_; }
  std::size_t pixel_count() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  AlphaMatte retagged(Resolution tag) const;

  friend bool operator==(const AlphaMatte&, const AlphaMatte&) = default;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
  Resolution tag_;
};

/// Foreground probability at the background-restoration working resolution.
class SemanticMap {
 public:
  SemanticMap(int width, int height, std::vector<double> values);

  static SemanticMap filled(int width, int height, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const double> values() const { return values_; }
  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  /// View as a coarse alpha matte (same samples).
  AlphaMatte as_matte() const;

  friend bool operator==(const SemanticMap&, const SemanticMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

/// Unconstrained interleaved RGB reals. Used for background information and
/// restored-background content, which are not range-checked.
struct RgbField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  RgbField() = default;
  RgbField(int w, int h);
  RgbField(int w, int h, std::vector<double> v);

  Rgb rgb(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {values[i], values[i + 1], values[i + 2]};
  }

  friend bool operator==(const RgbField&, const RgbField&) = default;
};

/// Binary mask with values exactly 0 or 1.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

/// Frames 1..N of equal size, with optional per-frame ground truth.
class VideoSequence {
 public:
  VideoSequence() = default;
  explicit VideoSequence(std::vector<Frame> frames,
                         std::vector<AlphaMatte> alpha_truth = {},
                         std::vector<Frame> background_truth = {},
                         std::vector<Frame> foreground_truth = {});

  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().height(); }

  const std::vector<Frame>& frames() const { return frames_; }
  const std::vector<AlphaMatte>& alpha_truth() const { return alpha_truth_; }
  const std::vector<Frame>& background_truth() const { return background_truth_; }
  const std::vector<Frame>& foreground_truth() const { return foreground_truth_; }

  const Frame& operator[](std::size_t i) const { return frames_[i]; }

 private:
  std::vector<Frame> frames_;
  std::vector<AlphaMatte> alpha_truth_;
  std::vector<Frame> background_truth_;
  std::vector<Frame> foreground_truth_;
};

/// 4x4 box average to (floor(w/4), floor(h/4)). Keeps the frame index.
Frame downsample4x(const Frame& frame);

/// Bilinear upsample with half-pixel-center alignment, clamped to [0,1].
AlphaMatte upsample(const AlphaMatte& matte, int target_width, int target_height);

/// Generic bilinear resize of interleaved samples with half-pixel-center
/// alignment and edge clamping. No range clamping.
std::vector<double> resize_bilinear(std::span<const double> src, int width, int height,
                                    int channels, int target_width, int target_height);

/// Bilinear sample at continuous pixel coordinates (u, v), where pixel (i, j)
/// has its center at (i, j). Coordinates are clamped to the image.
double sample_bilinear(std::span<const double> src, int width, int height, int channels,
                       double u, double v, int channel);

/// Square-element morphology on binary masks; only in-image neighbours count.
Mask dilate(const Mask& mask, int radius);
Mask erode(const Mask& mask, int radius);

/// Pixels whose value lies strictly inside (lo, hi).
Mask threshold_open_interval(std::span<const double> values, int width, int height,
                             double lo, double hi);

}  // namespace bgmatte
