#include "bgmatte/matting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include "bgmatte/error.hpp"

namespace bgmatte {
namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double mean_abs_diff(const double* a, const double* b) {
  return (std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2])) / 3.0;
}

void require_dims(int w, int h, int ew, int eh, const char* what) {
  if (w != ew || h != eh) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(what) + ": got " + std::to_string(w) + "x" + std::to_string(h) +
                    ", expected " + std::to_string(ew) + "x" + std::to_string(eh));
  }
}

// Squared Euclidean distance transform (lower envelope of parabolas, one
// dimension at a time). Non-site cells start at `kFar`.
constexpr double kFar = 1e20;

void distance_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + static_cast<double>(q) * q) -
                (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = static_cast<double>(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& sites, int w,
                                               int h) {
  std::vector<double> grid(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) grid[i] = sites[i] ? 0.0 : kFar;
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    distance_1d(f.data(), h, d.data(), v.data(), z.data());
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    double* row = grid.data() + static_cast<std::size_t>(y) * w;
    std::copy(row, row + w, f.begin());
    distance_1d(f.data(), w, d.data(), v.data(), z.data());
    std::copy(d.begin(), d.begin() + w, row);
  }
  return grid;
}

// Finds the site at squared distance exactly `dist2`, preferring the lowest
// row-major index. Coordinates are context-local.
bool nearest_site_at(const std::vector<std::uint8_t>& sites, int w, int h, int x, int y,
                     long long dist2, int& out_x, int& out_y) {
  const long long reach = static_cast<long long>(std::sqrt(static_cast<double>(dist2)));
  long long r = reach;
  while (r * r > dist2) --r;
  while ((r + 1) * (r + 1) <= dist2) ++r;
  for (long long dy = -r; dy <= r; ++dy) {
    const long long yy = y + dy;
    if (yy < 0 || yy >= h) continue;
    const long long rem = dist2 - dy * dy;
    long long dx = static_cast<long long>(std::sqrt(static_cast<double>(rem)));
    while (dx * dx > rem) --dx;
    while ((dx + 1) * (dx + 1) <= rem) ++dx;
    if (dx * dx != rem) continue;
    for (long long xx : {x - dx, x + dx}) {
      if (xx < 0 || xx >= w) continue;
      if (sites[static_cast<std::size_t>(yy) * w + xx]) {
        out_x = static_cast<int>(xx);
        out_y = static_cast<int>(yy);
        return true;
      }
    }
  }
  return false;
}

// Exhaustive fallback; only reached if the transform and the exact-distance
// enumeration ever disagree.
bool nearest_site_brute(const std::vector<std::uint8_t>& sites, int w, int h, int x, int y,
                        int& out_x, int& out_y) {
  long long best = std::numeric_limits<long long>::max();
  for (int yy = 0; yy < h; ++yy) {
    for (int xx = 0; xx < w; ++xx) {
      if (!sites[static_cast<std::size_t>(yy) * w + xx]) continue;
      const long long d2 = static_cast<long long>(xx - x) * (xx - x) +
                           static_cast<long long>(yy - y) * (yy - y);
      if (d2 < best) {
        best = d2;
        out_x = xx;
        out_y = yy;
      }
    }
  }
  return best != std::numeric_limits<long long>::max();
}

bool rect_inside(const Rect& r, int w, int h) {
  return r.x >= 0 && r.y >= 0 && r.width >= 0 && r.height >= 0 && r.right() <= w &&
         r.bottom() <= h;
}

}  // namespace

SemanticMap semantic_estimate(const SemanticInput& input, const SemanticParams& params) {
  const Frame& f4 = input.frame_4x;
  const BackgroundState& state = input.state;
  require_dims(f4.width(), f4.height(), state.width(), state.height(),
               "semantic_estimate frame");
  if (input.previous_frame_4x != nullptr) {
    require_dims(input.previous_frame_4x->width(), input.previous_frame_4x->height(),
                 state.width(), state.height(), "semantic_estimate previous frame");
  }
  if (input.previous_semantic != nullptr) {
    require_dims(input.previous_semantic->width(), input.previous_semantic->height(),
                 state.width(), state.height(), "semantic_estimate previous semantic");
  }
  if (!(params.sigma > 0.0)) {
    throw Error(ErrorKind::contract, "semantic sigma must be positive");
  }

  const auto px = f4.samples();
  const auto feature = state.feature();
  const auto mask = state.mask();
  const std::size_t n = mask.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* cur = px.data() + 3 * i;
    if (mask[i] == 1) {
      const double d = mean_abs_diff(cur, feature.data() + 3 * i);
      s[i] = logistic((d - params.theta) / params.sigma);
    } else if (input.previous_frame_4x != nullptr) {
      const double d = mean_abs_diff(cur, input.previous_frame_4x->samples().data() + 3 * i);
      s[i] = logistic((d - params.theta) / params.sigma);
    } else if (input.previous_semantic != nullptr) {
      s[i] = input.previous_semantic->values()[i];
    } else {
      s[i] = params.initial;
    }
  }
  return SemanticMap(state.width(), state.height(), std::move(s));
}

TransitionBand make_band(const AlphaMatte& coarse_full, const BandParams& params) {
  Mask raw = threshold_open_interval(coarse_full.values(), coarse_full.width(),
                                     coarse_full.height(), params.lo, params.hi);
  return {dilate(raw, params.radius)};
}

BackgroundPrior background_prior(const BackgroundState& state, int width, int height) {
  RenderedBackground rendered = render_background(state);
  auto bg = resize_bilinear(rendered.frame.samples(), state.width(), state.height(), 3, width,
                            height);
  for (double& v : bg) v = std::clamp(v, 0.0, 1.0);

  std::vector<double> restored(rendered.restored.values.begin(),
                               rendered.restored.values.end());
  auto coverage = resize_bilinear(restored, state.width(), state.height(), 1, width, height);
  Mask valid(width, height);
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    valid.values[i] = coverage[i] >= 1.0 - 1e-9 ? 1 : 0;
  }
  return {Frame(0, width, height, std::move(bg)), std::move(valid)};
}

DetailCounters detail_solve_region(const Frame& frame, const AlphaMatte& coarse_full,
                                   const Mask& band, const BackgroundPrior& prior,
                                   const DetailParams& params, const Rect& write,
                                   const Rect& context, std::span<double> out) {
  const int w = frame.width();
  const int h = frame.height();
  require_dims(coarse_full.width(), coarse_full.height(), w, h, "detail_solve coarse matte");
  require_dims(band.width, band.height, w, h, "detail_solve band");
  require_dims(prior.background.width(), prior.background.height(), w, h,
               "detail_solve background");
  require_dims(prior.valid.width, prior.valid.height, w, h, "detail_solve background mask");
  if (out.size() != frame.pixel_count()) {
    throw Error(ErrorKind::dimension_mismatch, "detail_solve output buffer has wrong size");
  }
  if (!rect_inside(write, w, h) || !rect_inside(context, w, h) || write.x < context.x ||
      write.y < context.y || write.right() > context.right() ||
      write.bottom() > context.bottom()) {
    throw Error(ErrorKind::contract, "detail_solve write region must lie inside its context");
  }

  const auto coarse = coarse_full.values();
  const int cw = context.width;
  const int ch = context.height;
  std::vector<std::uint8_t> sites(static_cast<std::size_t>(cw) * ch);
  bool any_site = false;
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const bool s =
          coarse[static_cast<std::size_t>(y + context.y) * w + (x + context.x)] >= params.confident;
      sites[static_cast<std::size_t>(y) * cw + x] = s ? 1 : 0;
      any_site = any_site || s;
    }
  }

  DetailCounters counters;
  bool band_in_write = false;
  std::vector<double> dist2;
  if (any_site) dist2 = squared_distance_transform(sites, cw, ch);

  for (int y = write.y; y < write.bottom(); ++y) {
    for (int x = write.x; x < write.right(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!band.values[i]) {
        out[i] = coarse[i] >= 0.5 ? 1.0 : 0.0;
        continue;
      }
      band_in_write = true;
      if (!any_site || !prior.valid.values[i]) {
        out[i] = coarse[i];
        ++counters.fallback_pixels;
        continue;
      }
      const int lx = x - context.x;
      const int ly = y - context.y;
      const auto d2 = static_cast<long long>(dist2[static_cast<std::size_t>(ly) * cw + lx]);
      int fx = 0;
      int fy = 0;
      if (!nearest_site_at(sites, cw, ch, lx, ly, d2, fx, fy)) {
        nearest_site_brute(sites, cw, ch, lx, ly, fx, fy);
      }
      const Rgb fg = frame.rgb(fx + context.x, fy + context.y);
      const Rgb bg = prior.background.rgb(x, y);
      const Rgb in = frame.rgb(x, y);
      const double fb[3] = {fg.r - bg.r, fg.g - bg.g, fg.b - bg.b};
      const double ib[3] = {in.r - bg.r, in.g - bg.g, in.b - bg.b};
      const double norm2 = fb[0] * fb[0] + fb[1] * fb[1] + fb[2] * fb[2];
      const double dot = ib[0] * fb[0] + ib[1] * fb[1] + ib[2] * fb[2];
      if (norm2 < params.delta) ++counters.degenerate_pixels;
      out[i] = std::clamp(dot / std::max(norm2, params.delta), 0.0, 1.0);
    }
  }
  counters.no_confident_foreground = band_in_write && !any_site;
  return counters;
}

DetailResult detail_solve(const Frame& frame, const AlphaMatte& coarse_full,
                          const TransitionBand& band, const BackgroundPrior& prior,
                          const DetailParams& params) {
  const Rect all{0, 0, frame.width(), frame.height()};
  std::vector<double> out(frame.pixel_count());
  const DetailCounters c =
      detail_solve_region(frame, coarse_full, band.mask, prior, params, all, all, out);
  return {AlphaMatte(frame.width(), frame.height(), std::move(out), Resolution::full), band,
          c.fallback_pixels, c.degenerate_pixels, c.no_confident_foreground};
}

AlphaMatte fuse(const SemanticMap& semantic, const AlphaMatte& detail,
                const TransitionBand& band) {
  require_dims(band.mask.width, band.mask.height, detail.width(), detail.height(), "fuse band");
  const AlphaMatte up = upsample(semantic.as_matte(), detail.width(), detail.height());
  const auto s = up.values();
  const auto d = detail.values();
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = band.mask.values[i] ? d[i] : (s[i] >= 0.5 ? 1.0 : 0.0);
  }
  return AlphaMatte(detail.width(), detail.height(), std::move(out), Resolution::full);
}

Predictor classical_predictor(const ClassicalParams& params) {
  Predictor p;
  p.name = "classical";
  p.semantic = [params](const SemanticInput& in) {
    return semantic_estimate(in, params.semantic);
  };
  p.detail = [params](const Frame& frame, const SemanticMap& semantic,
                      const BackgroundState& state) {
    const AlphaMatte coarse = upsample(semantic.as_matte(), frame.width(), frame.height());
    const TransitionBand band = make_band(coarse, params.band);
    const BackgroundPrior prior = background_prior(state, frame.width(), frame.height());
    return detail_solve(frame, coarse, band, prior, params.detail);
  };
  p.fusion = [](const SemanticMap& semantic, const DetailResult& detail) {
    return fuse(semantic, detail.alpha, detail.band);
  };
  return p;
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, PredictorFactory> factories{
      {"classical", [](const ClassicalParams& p) { return classical_predictor(p); }}};
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_predictor(const std::string& name, PredictorFactory factory) {
  if (name.empty() || !factory) {
    throw Error(ErrorKind::contract, "predictor registration needs a name and a factory");
  }
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.factories[name] = std::move(factory);
}

bool has_predictor(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  return r.factories.contains(name);
}

Predictor make_predictor(const std::string& name, const ClassicalParams& params) {
  PredictorFactory factory;
  {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.factories.find(name);
    if (it == r.factories.end()) {
      throw Error(ErrorKind::config, "unknown predictor '" + name + "'");
    }
    factory = it->second;
  }
  return factory(params);
}

StreamState init_stream(int frame_width, int frame_height) {
  if (frame_width < 4 || frame_height < 4) {
    throw Error(ErrorKind::degenerate_input, "frames must be at least 4x4");
  }
  return {init_state(frame_width / 4, frame_height / 4), std::nullopt, std::nullopt};
}

FrameOutput process_frame(const Frame& frame, const StreamState& stream,
                          const Predictor& predictor) {
  Frame frame_4x = downsample4x(frame);
  require_dims(stream.background.width(), stream.background.height(), frame_4x.width(),
               frame_4x.height(), "process_frame background state");

  // 1. prior: bgF from the previous step, untouched until step 5.
  BackgroundPrior prior = background_prior(stream.background, frame.width(), frame.height());
  // 2. semantic
  const SemanticInput input{frame_4x, stream.background,
                            stream.previous_semantic ? &*stream.previous_semantic : nullptr,
                            stream.previous_frame_4x ? &*stream.previous_frame_4x : nullptr};
  SemanticMap semantic = predictor.semantic(input);
  require_dims(semantic.width(), semantic.height(), frame_4x.width(), frame_4x.height(),
               "predictor semantic output");
  // 3. detail
  DetailResult detail = predictor.detail(frame, semantic, stream.background);
  // 4. fusion
  AlphaMatte matte = predictor.fusion(semantic, detail);
  require_dims(matte.width(), matte.height(), frame.width(), frame.height(),
               "predictor fusion output");
  // 5. background restoration with this frame's semantic map
  const RgbField bg_info = extract_bg_info(frame_4x, semantic);
  BrmStep step = update(stream.background, bg_info, semantic);

  StreamState next{std::move(step.state), std::move(frame_4x), semantic};
  return {std::move(matte),  std::move(semantic),   std::move(prior),
          std::move(detail), std::move(step.trace), std::move(next)};
}

}  // namespace bgmatte
