#include "bgmatte/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bgmatte/error.hpp"

namespace bgmatte {
namespace {

void require_dims(int width, int height, const char* what) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::contract, std::string(what) + ": dimensions must be >= 1, got " +
                                         std::to_string(width) + "x" + std::to_string(height));
  }
}

void require_size(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(what) + ": expected " + std::to_string(expected) +
                    " samples, got " + std::to_string(actual));
  }
}

void require_unit_range(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    // Written so NaN fails as well.
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::out_of_range, std::string(what) + ": sample " + std::to_string(i) +
                                               " = " + std::to_string(v) + " outside [0,1]");
    }
  }
}

std::size_t area(int w, int h) {
  return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
}

}  // namespace

Frame::Frame(int index, int width, int height, std::vector<double> pixels)
    : index_(index), width_(width), height_(height), pixels_(std::move(pixels)) {
  if (index < 0) {
    throw Error(ErrorKind::contract, "frame index must be non-negative");
  }
  require_dims(width, height, "frame");
  require_size(pixels_.size(), area(width, height) * 3, "frame");
  require_unit_range(pixels_, "frame");
}

Frame Frame::filled(int index, int width, int height, Rgb color) {
  require_dims(width, height, "frame");
  std::vector<double> px(area(width, height) * 3);
  for (std::size_t i = 0; i < px.size(); i += 3) {
    px[i] = color.r;
    px[i + 1] = color.g;
    px[i + 2] = color.b;
  }
  return Frame(index, width, height, std::move(px));
}

Frame Frame::with_index(int index) const {
  Frame copy = *this;
  if (index < 0) {
    throw Error(ErrorKind::contract, "frame index must be non-negative");
  }
  copy.index_ = index;
  return copy;
}

AlphaMatte::AlphaMatte(int width, int height, std::vector<double> values, Resolution tag)
    : width_(width), height_(height), values_(std::move(values)), tag_(tag) {
  require_dims(width, height, "alpha matte");
  require_size(values_.size(), area(width, height), "alpha matte");
  require_unit_range(values_, "alpha matte");
}

AlphaMatte AlphaMatte::filled(int width, int height, double value, Resolution tag) {
  require_dims(width, height, "alpha matte");
  return AlphaMatte(width, height, std::vector<double>(area(width, height), value), tag);
}

AlphaMatte AlphaMatte::retagged(Resolution tag) const {
  AlphaMatte copy = *this;
  copy.tag_ = tag;
  return copy;
}

SemanticMap::SemanticMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  require_dims(width, height, "semantic map");
  require_size(values_.size(), area(width, height), "semantic map");
  require_unit_range(values_, "semantic map");
}

SemanticMap SemanticMap::filled(int width, int height, double value) {
  require_dims(width, height, "semantic map");
  return SemanticMap(width, height, std::vector<double>(area(width, height), value));
}

AlphaMatte SemanticMap::as_matte() const {
  return AlphaMatte(width_, height_, values_, Resolution::coarse);
}

RgbField::RgbField(int w, int h) : width(w), height(h), values(area(w, h) * 3, 0.0) {
  require_dims(w, h, "rgb field");
}

RgbField::RgbField(int w, int h, std::vector<double> v)
    : width(w), height(h), values(std::move(v)) {
  require_dims(w, h, "rgb field");
  require_size(values.size(), area(w, h) * 3, "rgb field");
}

Mask::Mask(int w, int h, std::uint8_t fill) : width(w), height(h), values(area(w, h), fill) {
  require_dims(w, h, "mask");
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

VideoSequence::VideoSequence(std::vector<Frame> frames, std::vector<AlphaMatte> alpha_truth,
                             std::vector<Frame> background_truth,
                             std::vector<Frame> foreground_truth)
    : frames_(std::move(frames)),
      alpha_truth_(std::move(alpha_truth)),
      background_truth_(std::move(background_truth)),
      foreground_truth_(std::move(foreground_truth)) {
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const Frame& f = frames_[i];
    if (f.index() != static_cast<int>(i) + 1) {
      throw Error(ErrorKind::sequence_gap, "frame at position " + std::to_string(i) +
                                               " has index " + std::to_string(f.index()) +
                                               ", expected " + std::to_string(i + 1));
    }
    if (f.width() != frames_.front().width() || f.height() != frames_.front().height()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "frame " + std::to_string(f.index()) + " differs in size from frame 1");
    }
  }
  auto check_truth = [&](std::size_t n, auto&& dims_of, const char* what) {
    if (n == 0) return;
    if (n != frames_.size()) {
      throw Error(ErrorKind::dimension_mismatch,
                  std::string(what) + " count " + std::to_string(n) +
                      " does not match frame count " + std::to_string(frames_.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto [w, h] = dims_of(i);
      if (w != width() || h != height()) {
        throw Error(ErrorKind::dimension_mismatch,
                    std::string(what) + " " + std::to_string(i + 1) + " has wrong dimensions");
      }
    }
  };
  check_truth(alpha_truth_.size(),
              [&](std::size_t i) { return std::pair{alpha_truth_[i].width(), alpha_truth_[i].height()}; },
              "alpha truth");
  check_truth(background_truth_.size(),
              [&](std::size_t i) {
                return std::pair{background_truth_[i].width(), background_truth_[i].height()};
              },
              "background truth");
  check_truth(foreground_truth_.size(),
              [&](std::size_t i) {
                return std::pair{foreground_truth_[i].width(), foreground_truth_[i].height()};
              },
              "foreground truth");
}

Frame downsample4x(const Frame& frame) {
  if (frame.width() < 4 || frame.height() < 4) {
    throw Error(ErrorKind::degenerate_input,
                "downsample4x needs at least 4x4 input, got " + std::to_string(frame.width()) +
                    "x" + std::to_string(frame.height()));
  }
  const int ow = frame.width() / 4;
  const int oh = frame.height() / 4;
  const auto src = frame.samples();
  const std::size_t stride = static_cast<std::size_t>(frame.width()) * 3;
  std::vector<double> out(area(ow, oh) * 3, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int dy = 0; dy < 4; ++dy) {
        const double* row = src.data() + (static_cast<std::size_t>(4 * y + dy)) * stride +
                            static_cast<std::size_t>(4 * x) * 3;
        for (int dx = 0; dx < 4; ++dx) {
          acc[0] += row[dx * 3];
          acc[1] += row[dx * 3 + 1];
          acc[2] += row[dx * 3 + 2];
        }
      }
      double* o = out.data() + (static_cast<std::size_t>(y) * ow + x) * 3;
      o[0] = acc[0] / 16.0;
      o[1] = acc[1] / 16.0;
      o[2] = acc[2] / 16.0;
    }
  }
  return Frame(frame.index(), ow, oh, std::move(out));
}

std::vector<double> resize_bilinear(std::span<const double> src, int width, int height,
                                    int channels, int target_width, int target_height) {
  require_dims(width, height, "resize source");
  require_dims(target_width, target_height, "resize target");
  require_size(src.size(), area(width, height) * channels, "resize source");

  struct Tap {
    int i0, i1;
    double f;
  };
  auto taps = [](int src_n, int dst_n) {
    std::vector<Tap> t(dst_n);
    const double scale = static_cast<double>(src_n) / static_cast<double>(dst_n);
    for (int i = 0; i < dst_n; ++i) {
      double u = (i + 0.5) * scale - 0.5;
      u = std::clamp(u, 0.0, static_cast<double>(src_n - 1));
      const int i0 = static_cast<int>(std::floor(u));
      const int i1 = std::min(i0 + 1, src_n - 1);
      t[i] = {i0, i1, u - i0};
    }
    return t;
  };
  const auto tx = taps(width, target_width);
  const auto ty = taps(height, target_height);

  std::vector<double> out(area(target_width, target_height) * channels);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < target_height; ++y) {
    const double* r0 = src.data() + ty[y].i0 * stride;
    const double* r1 = src.data() + ty[y].i1 * stride;
    const double fy = ty[y].f;
    double* o = out.data() + static_cast<std::size_t>(y) * target_width * channels;
    for (int x = 0; x < target_width; ++x) {
      const Tap& t = tx[x];
      for (int c = 0; c < channels; ++c) {
        const double top = (1.0 - t.f) * r0[t.i0 * channels + c] + t.f * r0[t.i1 * channels + c];
        const double bot = (1.0 - t.f) * r1[t.i0 * channels + c] + t.f * r1[t.i1 * channels + c];
        o[x * channels + c] = (1.0 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

double sample_bilinear(std::span<const double> src, int width, int height, int channels,
                       double u, double v, int channel) {
  u = std::clamp(u, 0.0, static_cast<double>(width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  auto px = [&](int x, int y) {
    return src[(static_cast<std::size_t>(y) * width + x) * channels + channel];
  };
  const double top = (1.0 - fx) * px(x0, y0) + fx * px(x1, y0);
  const double bot = (1.0 - fx) * px(x0, y1) + fx * px(x1, y1);
  return (1.0 - fy) * top + fy * bot;
}

AlphaMatte upsample(const AlphaMatte& matte, int target_width, int target_height) {
  if (target_width < matte.width() || target_height < matte.height()) {
    throw Error(ErrorKind::contract,
                "upsample target " + std::to_string(target_width) + "x" +
                    std::to_string(target_height) + " is smaller than source " +
                    std::to_string(matte.width()) + "x" + std::to_string(matte.height()));
  }
  auto out = resize_bilinear(matte.values(), matte.width(), matte.height(), 1, target_width,
                             target_height);
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return AlphaMatte(target_width, target_height, std::move(out), Resolution::full);
}

namespace {

// Row pass then column pass. For square elements restricted to in-image
// neighbours the 2-D window factorises exactly.
Mask morphology(const Mask& mask, int radius, bool dilation) {
  if (radius < 0) {
    throw Error(ErrorKind::contract, "morphology radius must be >= 0");
  }
  if (radius == 0) return mask;
  const int w = mask.width;
  const int h = mask.height;
  auto pass = [&](const std::vector<std::uint8_t>& in, bool horizontal) {
    std::vector<std::uint8_t> out(in.size());
    const int n = horizontal ? w : h;
    const int lines = horizontal ? h : w;
    std::vector<int> prefix(n + 1);
    for (int line = 0; line < lines; ++line) {
      auto idx = [&](int i) {
        return horizontal ? static_cast<std::size_t>(line) * w + i
                          : static_cast<std::size_t>(i) * w + line;
      };
      prefix[0] = 0;
      for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[idx(i)];
      for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - radius);
        const int hi = std::min(n - 1, i + radius);
        const int count = prefix[hi + 1] - prefix[lo];
        const bool on = dilation ? count > 0 : count == hi - lo + 1;
        out[idx(i)] = on ? 1 : 0;
      }
    }
    return out;
  };
  Mask result = mask;
  result.values = pass(pass(mask.values, true), false);
  return result;
}

}  // namespace

Mask dilate(const Mask& mask, int radius) { return morphology(mask, radius, true); }

Mask erode(const Mask& mask, int radius) { return morphology(mask, radius, false); }

Mask threshold_open_interval(std::span<const double> values, int width, int height, double lo,
                             double hi) {
  Mask m(width, height);
  require_size(values.size(), m.values.size(), "threshold input");
  for (std::size_t i = 0; i < values.size(); ++i) {
    m.values[i] = (values[i] > lo && values[i] < hi) ? 1 : 0;
  }
  return m;
}

}  // namespace bgmatte
