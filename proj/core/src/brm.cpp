#include "bgmatte/brm.hpp"

#include <algorithm>
#include <string>

#include "bgmatte/error.hpp"

namespace bgmatte {
namespace {

void require_same_dims(int w, int h, int ew, int eh, const char* what) {
  if (w != ew || h != eh) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(what) + ": got " + std::to_string(w) + "x" + std::to_string(h) +
                    ", expected " + std::to_string(ew) + "x" + std::to_string(eh));
  }
}

}  // namespace

BackgroundState::BackgroundState(int width, int height, std::vector<double> feature,
                                 std::vector<std::uint8_t> mask, std::uint64_t version)
    : width_(width),
      height_(height),
      feature_(std::move(feature)),
      mask_(std::move(mask)),
      version_(version) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::contract, "background state dimensions must be >= 1");
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (feature_.size() != n * 3 || mask_.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "background state buffers do not match " +
                                                   std::to_string(width) + "x" +
                                                   std::to_string(height));
  }
  for (auto m : mask_) {
    if (m > 1) throw Error(ErrorKind::out_of_range, "background mask values must be 0 or 1");
  }
}

std::size_t BackgroundState::restored_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

BackgroundState init_state(int width, int height) {
  const std::size_t n = static_cast<std::size_t>(std::max(width, 0)) *
                        static_cast<std::size_t>(std::max(height, 0));
  return BackgroundState(width, height, std::vector<double>(n * 3, 0.0),
                         std::vector<std::uint8_t>(n, 0));
}

RgbField extract_bg_info(const Frame& frame_4x, const SemanticMap& semantic) {
  require_same_dims(semantic.width(), semantic.height(), frame_4x.width(), frame_4x.height(),
                    "extract_bg_info semantic map");
  RgbField out(frame_4x.width(), frame_4x.height());
  const auto px = frame_4x.samples();
  const auto s = semantic.values();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double keep = 1.0 - s[i];
    out.values[3 * i] = keep * px[3 * i];
    out.values[3 * i + 1] = keep * px[3 * i + 1];
    out.values[3 * i + 2] = keep * px[3 * i + 2];
  }
  return out;
}

BrmStep update(const BackgroundState& state, const RgbField& bg_info,
               const SemanticMap& semantic) {
  const int w = state.width();
  const int h = state.height();
  require_same_dims(bg_info.width, bg_info.height, w, h, "brm update background info");
  require_same_dims(semantic.width(), semantic.height(), w, h, "brm update semantic map");

  const auto prev_f = state.feature();
  const auto prev_m = state.mask();
  const auto s = semantic.values();
  const auto& bgi = bg_info.values;
  const std::size_t n = prev_m.size();

  std::vector<double> next_f(n * 3);
  std::vector<std::uint8_t> next_m(n);
  BrmUpdateTrace trace{Mask(w, h), Mask(w, h)};

  for (std::size_t i = 0; i < n; ++i) {
    const bool is_background = (1.0 - s[i]) > 0.5;
    const std::uint8_t m_new = (prev_m[i] == 0 && is_background) ? 1 : 0;
    const std::uint8_t m_avg = (prev_m[i] == 1 && is_background) ? 1 : 0;
    const double new_w = m_new;
    const double avg_w = m_avg;
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t k = 3 * i + c;
      const double tmp = prev_f[k] + new_w * bgi[k];
      next_f[k] = (1.0 - avg_w) * tmp + avg_w * ((tmp + bgi[k]) / 2.0);
    }
    next_m[i] = static_cast<std::uint8_t>(prev_m[i] + m_new);
    trace.newly_restored.values[i] = m_new;
    trace.averaged.values[i] = m_avg;
  }

  return {BackgroundState(w, h, std::move(next_f), std::move(next_m), state.version() + 1),
          std::move(trace)};
}

RenderedBackground render_background(const BackgroundState& state, int frame_index) {
  const auto f = state.feature();
  const auto m = state.mask();
  std::vector<double> px(f.size());
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = f[3 * i + c];
      if (!(v >= 0.0 && v <= 1.0)) ++clamped;
      // NaN renders as black.
      px[3 * i + c] = m[i] == 1 && v == v ? std::clamp(v, 0.0, 1.0) : 0.0;
    }
  }
  Mask restored(state.width(), state.height());
  std::copy(m.begin(), m.end(), restored.values.begin());
  return {Frame(frame_index, state.width(), state.height(), std::move(px)), std::move(restored),
          clamped};
}

}  // namespace bgmatte
