#include "bgmatte/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bgmatte/error.hpp"

namespace bgmatte {
namespace {

double uniform_symmetric(std::mt19937_64& rng, double half_width) {
  return half_width * (2.0 * unit_uniform(rng) - 1.0);
}

void config_error(const std::string& msg) { throw Error(ErrorKind::config, "synth: " + msg); }

// Block means in the same summation order as downsample4x.
template <typename AlphaAt>
void for_each_block_mean(int w, int h, AlphaAt alpha_at, auto&& sink) {
  const int bw = w / 4;
  const int bh = h / 4;
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      double sum = 0.0;
      double peak = 0.0;
      for (int dy = 0; dy < 4; ++dy) {
        for (int dx = 0; dx < 4; ++dx) {
          const double a = alpha_at(4 * bx + dx, 4 * by + dy);
          sum += a;
          peak = std::max(peak, a);
        }
      }
      sink(bx, by, sum / 16.0, peak);
    }
  }
}

}  // namespace

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate(const SynthConfig& c) {
  if (c.width < 4 || c.height < 4) config_error("frame size must be at least 4x4");
  if (c.clip_length < 1) config_error("clip_length must be >= 1");
  if (c.margin < 0) config_error("margin must be >= 0");
  const MotionConfig& m = c.motion;
  if (m.jitter_translation < 0 || m.jitter_rotation < 0 || m.jitter_scale < 0) {
    config_error("motion jitter ranges must be non-negative");
  }
  if (m.jitter_scale >= 1.0) config_error("jitter_scale must be < 1");
  for (const ShapeSpec& s : c.shapes) {
    if (s.radius < 0 || s.feather < 0) config_error("shape radius and feather must be >= 0");
    if (s.radius > 0 && s.feather < 2.0) {
      config_error("shapes with a positive radius need feather >= 2 px");
    }
  }
  if (c.provided) {
    const auto& p = *c.provided;
    if (p.colors.size() != static_cast<std::size_t>(c.clip_length) ||
        p.alphas.size() != static_cast<std::size_t>(c.clip_length)) {
      config_error("provided foreground must hold clip_length colours and mattes");
    }
    for (std::size_t i = 0; i < p.colors.size(); ++i) {
      if (p.colors[i].width() != c.width || p.colors[i].height() != c.height ||
          p.alphas[i].width() != c.width || p.alphas[i].height() != c.height) {
        config_error("provided foreground frame " + std::to_string(i + 1) + " has wrong size");
      }
    }
  }
  if (c.background && (c.background->width() < c.width || c.background->height() < c.height)) {
    config_error("background image is smaller than the frame");
  }
}

std::vector<AffineView> background_motion(const SynthConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::vector<AffineView> views;
  views.reserve(config.clip_length);
  AffineView v;
  views.push_back(v);
  const MotionConfig& m = config.motion;
  for (int t = 2; t <= config.clip_length; ++t) {
    // Draw all four deltas every step so the stream does not depend on
    // which ranges are zero.
    const double jx = uniform_symmetric(rng, m.jitter_translation);
    const double jy = uniform_symmetric(rng, m.jitter_translation);
    const double jr = uniform_symmetric(rng, m.jitter_rotation);
    const double js = uniform_symmetric(rng, m.jitter_scale);
    v.shift_x += m.drift_x + jx;
    v.shift_y += m.drift_y + jy;
    v.rotation += jr;
    v.scale += js;
    views.push_back(v);
  }
  return views;
}

Frame procedural_background(int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1) config_error("background size must be positive");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
  const Rgb c0{in(0.06, 0.14), in(0.22, 0.30), in(0.55, 0.65)};
  const Rgb c1{in(0.16, 0.24), in(0.38, 0.46), in(0.70, 0.80)};
  const double angle = in(0.0, 2.0 * std::numbers::pi);
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double ripple_len = in(0.6, 1.0) * std::max(width, height);
  const double ripple_angle = in(0.0, 2.0 * std::numbers::pi);
  const double rx = std::cos(ripple_angle) / ripple_len;
  const double ry = std::sin(ripple_angle) / ripple_len;
  const double phase = in(0.0, 2.0 * std::numbers::pi);

  // Project the corners to normalise the gradient parameter into [0,1].
  const double extent = std::abs(dx) * (width - 1) + std::abs(dy) * (height - 1);
  const double offset = std::min(0.0, dx * (width - 1)) + std::min(0.0, dy * (height - 1));

  std::vector<double> px(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = extent > 0 ? (dx * x + dy * y - offset) / extent : 0.0;
      const double ripple =
          0.03 * std::sin(2.0 * std::numbers::pi * (rx * x + ry * y) + phase);
      double* o = px.data() + (static_cast<std::size_t>(y) * width + x) * 3;
      o[0] = std::clamp(c0.r + (c1.r - c0.r) * t + ripple, 0.0, 1.0);
      o[1] = std::clamp(c0.g + (c1.g - c0.g) * t + ripple, 0.0, 1.0);
      o[2] = std::clamp(c0.b + (c1.b - c0.b) * t - ripple, 0.0, 1.0);
    }
  }
  return Frame(0, width, height, std::move(px));
}

VideoSequence gen_dynamic_background(const Frame& base, const SynthConfig& config) {
  validate(config);
  const int w = config.width;
  const int h = config.height;
  if (base.width() < w || base.height() < h) config_error("background image is smaller than the frame");

  const double off_x = (base.width() - w) / 2;
  const double off_y = (base.height() - h) / 2;
  const double fcx = (w - 1) / 2.0;
  const double fcy = (h - 1) / 2.0;
  const double bcx = off_x + fcx;
  const double bcy = off_y + fcy;
  const double max_u = base.width() - 1;
  const double max_v = base.height() - 1;

  const auto views = background_motion(config);
  std::vector<Frame> frames;
  frames.reserve(views.size());
  for (std::size_t t = 0; t < views.size(); ++t) {
    const AffineView& a = views[t];
    const double c = std::cos(a.rotation) * a.scale;
    const double s = std::sin(a.rotation) * a.scale;
    auto map = [&](double x, double y) {
      const double px = x - fcx;
      const double py = y - fcy;
      return std::pair{bcx + a.shift_x + (c * px - s * py), bcy + a.shift_y + (s * px + c * py)};
    };
    for (auto [cx, cy] : {std::pair{0.0, 0.0}, std::pair{w - 1.0, 0.0},
                          std::pair{0.0, h - 1.0}, std::pair{w - 1.0, h - 1.0}}) {
      auto [u, v] = map(cx, cy);
      if (u < 0.0 || v < 0.0 || u > max_u || v > max_v) {
        config_error("background view escapes the base image at frame " +
                     std::to_string(t + 1));
      }
    }
    std::vector<double> px(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        auto [u, v] = map(x, y);
        double* o = px.data() + (static_cast<std::size_t>(y) * w + x) * 3;
        for (int ch = 0; ch < 3; ++ch) {
          o[ch] = std::clamp(
              sample_bilinear(base.samples(), base.width(), base.height(), 3, u, v, ch), 0.0,
              1.0);
        }
      }
    }
    frames.emplace_back(static_cast<int>(t) + 1, w, h, std::move(px));
  }
  return VideoSequence(std::move(frames));
}

double shape_distance(const ShapeSpec& shape, int t, double px, double py) {
  const double cx = shape.center_x + shape.velocity_x * (t - 1);
  const double cy = shape.center_y + shape.velocity_y * (t - 1);
  if (shape.kind == ShapeKind::disc) return std::hypot(px - cx, py - cy);
  const double len2 = shape.axis_x * shape.axis_x + shape.axis_y * shape.axis_y;
  double u = 0.0;
  if (len2 > 0.0) {
    u = std::clamp(((px - cx) * shape.axis_x + (py - cy) * shape.axis_y) / len2, 0.0, 1.0);
  }
  return std::hypot(px - (cx + u * shape.axis_x), py - (cy + u * shape.axis_y));
}

double shape_alpha(const ShapeSpec& shape, int t, double px, double py) {
  const double d = shape_distance(shape, t, px, py);
  if (shape.feather <= 0.0) return d < shape.radius ? 1.0 : 0.0;
  return std::clamp((shape.radius + shape.feather - d) / (2.0 * shape.feather), 0.0, 1.0);
}

namespace {

// Max-alpha union of the shapes; the colour is that of the strongest shape
// (first one on ties).
std::pair<double, Rgb> shapes_at(const std::vector<ShapeSpec>& shapes, int t, double px,
                                 double py) {
  double best = 0.0;
  Rgb color{0.0, 0.0, 0.0};
  bool any = false;
  for (const ShapeSpec& s : shapes) {
    const double a = shape_alpha(s, t, px, py);
    if (!any || a > best) {
      best = a;
      color = s.color;
      any = true;
    }
  }
  return {best, color};
}

}  // namespace

ForegroundClip gen_foreground(const SynthConfig& config) {
  validate(config);
  if (config.provided) return {config.provided->colors, config.provided->alphas};
  const int w = config.width;
  const int h = config.height;
  ForegroundClip clip;
  for (int t = 1; t <= config.clip_length; ++t) {
    std::vector<double> colors(static_cast<std::size_t>(w) * h * 3);
    std::vector<double> alpha(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto [a, c] = shapes_at(config.shapes, t, x + 0.5, y + 0.5);
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        alpha[i] = a;
        colors[3 * i] = c.r;
        colors[3 * i + 1] = c.g;
        colors[3 * i + 2] = c.b;
      }
    }
    clip.colors.emplace_back(t, w, h, std::move(colors));
    clip.alphas.emplace_back(w, h, std::move(alpha), Resolution::full);
  }
  return clip;
}

Frame composite(const Frame& fg, const AlphaMatte& alpha, const Frame& bg) {
  if (fg.width() != bg.width() || fg.height() != bg.height() || alpha.width() != bg.width() ||
      alpha.height() != bg.height()) {
    throw Error(ErrorKind::dimension_mismatch, "composite: inputs differ in size");
  }
  const auto f = fg.samples();
  const auto b = bg.samples();
  const auto a = alpha.values();
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t k = 3 * i + c;
      out[k] = std::clamp(a[i] * f[k] + (1.0 - a[i]) * b[k], 0.0, 1.0);
    }
  }
  return Frame(bg.index(), bg.width(), bg.height(), std::move(out));
}

VideoSequence build_clip(const SynthConfig& config) {
  validate(config);
  const Frame base = config.background
                         ? *config.background
                         : procedural_background(config.width + 2 * config.margin,
                                                 config.height + 2 * config.margin, config.seed);
  VideoSequence backgrounds = gen_dynamic_background(base, config);
  ForegroundClip fg = gen_foreground(config);

  std::vector<Frame> frames;
  std::vector<Frame> fg_frames;
  std::vector<Frame> bg_frames = backgrounds.frames();
  for (int t = 0; t < config.clip_length; ++t) {
    const Frame& bg = bg_frames[t];
    frames.push_back(composite(fg.colors[t], fg.alphas[t], bg));
    fg_frames.push_back(fg.colors[t].with_index(t + 1));
  }
  return VideoSequence(std::move(frames), std::move(fg.alphas), std::move(bg_frames),
                       std::move(fg_frames));
}

Mask visibility_union(const SynthConfig& config) {
  validate(config);
  const int w = config.width;
  const int h = config.height;
  Mask seen(w, h);
  for (int t = 1; t <= config.clip_length; ++t) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bool visible = true;
        if (config.provided) {
          visible = config.provided->alphas[t - 1].at(x, y) < 0.5;
        } else {
          for (const ShapeSpec& s : config.shapes) {
            const double d = shape_distance(s, t, x + 0.5, y + 0.5);
            // alpha < 0.5 exactly when the pixel centre lies outside radius r
            // (at or outside for unfeathered shapes).
            const bool covered = s.feather > 0.0 ? d <= s.radius : d < s.radius;
            if (covered) {
              visible = false;
              break;
            }
          }
        }
        if (visible) seen.at(x, y) = 1;
      }
    }
  }
  return seen;
}

namespace {

Mask block_union(const SynthConfig& config, bool require_clear) {
  validate(config);
  const int w = config.width;
  const int h = config.height;
  Mask blocks(w / 4, h / 4);
  for (int t = 1; t <= config.clip_length; ++t) {
    auto alpha_at = [&](int x, int y) {
      if (config.provided) return config.provided->alphas[t - 1].at(x, y);
      return shapes_at(config.shapes, t, x + 0.5, y + 0.5).first;
    };
    for_each_block_mean(w, h, alpha_at, [&](int bx, int by, double mean, double peak) {
      const bool hit = require_clear ? peak == 0.0 : mean < 0.5;
      if (hit) blocks.at(bx, by) = 1;
    });
  }
  return blocks;
}

}  // namespace

SemanticMap truth_semantic(const AlphaMatte& alpha) {
  if (alpha.width() < 4 || alpha.height() < 4) {
    throw Error(ErrorKind::degenerate_input, "truth_semantic needs at least 4x4 input");
  }
  std::vector<double> s(static_cast<std::size_t>(alpha.width() / 4) * (alpha.height() / 4));
  const int bw = alpha.width() / 4;
  for_each_block_mean(alpha.width(), alpha.height(),
                      [&](int x, int y) { return alpha.at(x, y); },
                      [&](int bx, int by, double mean, double) {
                        s[static_cast<std::size_t>(by) * bw + bx] = std::clamp(mean, 0.0, 1.0);
                      });
  return SemanticMap(bw, alpha.height() / 4, std::move(s));
}

Mask restorable_blocks(const SynthConfig& config) { return block_union(config, false); }

Mask clear_blocks(const SynthConfig& config) { return block_union(config, true); }

std::vector<ShapeSpec> walk_in_portrait(int width, int height, double start_x, double start_y,
                                        double speed_x, double speed_y, double radius,
                                        double feather, bool body) {
  const double r = radius * std::min(width, height);
  ShapeSpec head;
  head.kind = ShapeKind::disc;
  head.center_x = start_x * width;
  head.center_y = start_y * height;
  head.velocity_x = speed_x * width;
  head.velocity_y = speed_y * height;
  head.radius = r;
  head.feather = feather;
  std::vector<ShapeSpec> shapes{head};
  if (body) {
    ShapeSpec torso = head;
    torso.kind = ShapeKind::capsule;
    torso.center_y = head.center_y + 1.9 * r;
    torso.axis_x = 0.0;
    torso.axis_y = 6.0 * r;
    torso.radius = 1.3 * r;
    shapes.push_back(torso);
  }
  return shapes;
}

}  // namespace bgmatte
