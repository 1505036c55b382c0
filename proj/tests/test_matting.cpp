#include <doctest.h>

#include <cmath>

#include "bgmatte/error.hpp"
#include "bgmatte/matting.hpp"
#include "bgmatte/synth.hpp"
#include "support/oracles.hpp"

using namespace bgmatte;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

BackgroundState restored_state(const Frame& f4) {
  return BackgroundState(f4.width(), f4.height(),
                         std::vector<double>(f4.samples().begin(), f4.samples().end()),
                         std::vector<std::uint8_t>(f4.pixel_count(), 1));
}

BackgroundPrior exact_prior(const Frame& background) {
  return {background, Mask(background.width(), background.height(), 1)};
}

// Brute-force detail solve for comparison: linear scan for the nearest site.
std::vector<double> detail_reference(const Frame& frame, const AlphaMatte& coarse,
                                     const Mask& band, const BackgroundPrior& prior,
                                     double confident, double delta) {
  const int w = frame.width();
  const int h = frame.height();
  std::vector<std::uint8_t> sites(frame.pixel_count());
  bool any = false;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    sites[i] = coarse.values()[i] >= confident;
    any = any || sites[i];
  }
  std::vector<double> out(frame.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!band.values[i]) {
        out[i] = coarse.values()[i] >= 0.5 ? 1.0 : 0.0;
        continue;
      }
      if (!any || !prior.valid.values[i]) {
        out[i] = coarse.values()[i];
        continue;
      }
      const long j = oracle::nearest_site(sites, w, h, x, y);
      const double in[3] = {frame.at(x, y, 0), frame.at(x, y, 1), frame.at(x, y, 2)};
      const double fg[3] = {frame.samples()[3 * j], frame.samples()[3 * j + 1],
                            frame.samples()[3 * j + 2]};
      const double bg[3] = {prior.background.at(x, y, 0), prior.background.at(x, y, 1),
                            prior.background.at(x, y, 2)};
      out[i] = oracle::project_alpha(in, fg, bg, delta);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("matting") {

TEST_CASE("semantic of a frame equal to the restored background is near zero") {
  oracle::Gen g(31);
  const Frame f4 = oracle::random_frame(g, 1, 6, 5);
  const SemanticMap s = semantic_estimate({f4, restored_state(f4), nullptr, nullptr});
  const double bound = logistic(-0.1 / 0.02);
  for (double v : s.values()) CHECK(v <= bound);
}

TEST_CASE("semantic of a pixel far from the background is near one") {
  const Frame black = Frame::filled(1, 1, 1, {0, 0, 0});
  const Frame white = Frame::filled(1, 1, 1, {1, 1, 1});
  const SemanticMap s = semantic_estimate({white, restored_state(black), nullptr, nullptr});
  CHECK(s.values()[0] >= 0.99);
  CHECK(s.values()[0] == doctest::Approx(logistic(0.9 / 0.02)));
}

TEST_CASE("semantic fallbacks for unrestored pixels") {
  oracle::Gen g(32);
  const Frame f4 = oracle::random_frame(g, 1, 4, 4);
  const BackgroundState empty = init_state(4, 4);
  const SemanticMap first = semantic_estimate({f4, empty, nullptr, nullptr});
  for (double v : first.values()) CHECK(v == 0.5);

  const SemanticMap prev = SemanticMap(4, 4, oracle::random_unit(g, 16));
  const SemanticMap carried = semantic_estimate({f4, empty, &prev, nullptr});
  CHECK(carried.values()[7] == prev.values()[7]);

  // With a previous frame, an unchanged pixel reads as background.
  const SemanticMap temporal = semantic_estimate({f4, empty, &prev, &f4});
  for (double v : temporal.values()) CHECK(v == logistic(-0.1 / 0.02));
}

TEST_CASE("semantic rejects mismatched inputs") {
  const Frame f4 = Frame::filled(1, 4, 4, {0, 0, 0});
  CHECK_THROWS_AS(semantic_estimate({f4, init_state(3, 4), nullptr, nullptr}), Error);
  CHECK_THROWS_AS(semantic_estimate({f4, init_state(4, 4), nullptr, nullptr}, {0.1, 0.0, 0.5}),
                  Error);
}

TEST_CASE("band is the dilated open interval") {
  oracle::Gen g(33);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = g.integer(4, 30);
    const int h = g.integer(4, 30);
    std::vector<double> a(static_cast<std::size_t>(w) * h);
    for (double& v : a) v = g.coin(0.8) ? (g.coin() ? 0.0 : 1.0) : g.uniform();
    const TransitionBand band = make_band(AlphaMatte(w, h, a));
    std::vector<std::uint8_t> raw(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) raw[i] = a[i] > 0.05 && a[i] < 0.95;
    CHECK(band.mask.values == oracle::morph(raw, w, h, 2, true));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (raw[i]) CHECK(band.mask.values[i] == 1);
    }
  }
}

TEST_CASE("projection examples") {
  // One confident pixel at (0,0) supplies F; band pixel at (1,0).
  const AlphaMatte coarse(2, 1, {1.0, 0.5});
  const Mask band(2, 1, 1);
  auto solve = [&](Rgb in) {
    const Frame frame(1, 2, 1, {1, 0, 0, in.r, in.g, in.b});
    const Frame bg = Frame::filled(0, 2, 1, {0, 0, 1});
    return detail_solve(frame, coarse, {band}, exact_prior(bg)).alpha.at(1, 0);
  };
  CHECK(solve({0, 0, 1}) == 0.0);
  CHECK(solve({1, 0, 0}) == 1.0);
  CHECK(solve({0.5, 0, 0.5}) == 0.5);
}

TEST_CASE("detail solve matches the brute-force nearest-foreground oracle") {
  oracle::Gen g(34);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = g.integer(2, 24);
    const int h = g.integer(2, 24);
    const Frame frame = oracle::random_frame(g, 1, w, h);
    const Frame bg = oracle::random_frame(g, 0, w, h);
    std::vector<double> a(frame.pixel_count());
    const double p_site = trial % 5 == 0 ? 0.02 : 0.2;
    for (double& v : a) v = g.coin(p_site) ? g.uniform(0.95, 1.0) : g.uniform(0.0, 0.949);
    const AlphaMatte coarse(w, h, a);
    Mask band(w, h);
    for (auto& v : band.values) v = g.coin(0.7);
    Mask valid(w, h);
    for (auto& v : valid.values) v = g.coin(0.9);
    const BackgroundPrior prior{bg, valid};
    const DetailResult r = detail_solve(frame, coarse, {band}, prior);
    const auto expect = detail_reference(frame, coarse, band, prior, 0.95, 1e-4);
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(oracle::same_bits(r.alpha.values()[i], expect[i]));
    }
  }
}

TEST_CASE("nearest-foreground ties go to the lower row-major index") {
  // Sites at (0,1) and (2,1) are both at distance 1 from (1,1); so are (1,0)
  // and (1,2). The lowest index, (1,0), must win.
  const int w = 3;
  const int h = 3;
  std::vector<double> px(27, 0.0);
  auto put = [&](int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
    px[i] = c.r;
    px[i + 1] = c.g;
    px[i + 2] = c.b;
  };
  put(1, 0, {1, 0, 0});
  put(0, 1, {0, 1, 0});
  put(2, 1, {0, 1, 0});
  put(1, 2, {0, 1, 0});
  put(1, 1, {0.5, 0, 0});
  std::vector<double> a(9, 0.0);
  a[1] = a[3] = a[5] = a[7] = 1.0;
  Mask band(w, h);
  band.at(1, 1) = 1;
  const DetailResult r =
      detail_solve(Frame(1, w, h, px), AlphaMatte(w, h, a), {band},
                   exact_prior(Frame::filled(0, w, h, {0, 0, 0})));
  CHECK(r.alpha.at(1, 1) == 0.5);
}

TEST_CASE("no confident foreground keeps the coarse value and flags it") {
  const AlphaMatte coarse = AlphaMatte::filled(4, 4, 0.4);
  const DetailResult r =
      detail_solve(Frame::filled(1, 4, 4, {0.3, 0.3, 0.3}), coarse, {Mask(4, 4, 1)},
                   exact_prior(Frame::filled(0, 4, 4, {0, 0, 0})));
  CHECK(r.no_confident_foreground);
  CHECK(r.fallback_pixels == 16);
  for (double v : r.alpha.values()) CHECK(v == 0.4);
}

TEST_CASE("coincident foreground and background colours are counted as degenerate") {
  const AlphaMatte coarse(2, 1, {1.0, 0.5});
  const Frame frame(1, 2, 1, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  const DetailResult r = detail_solve(frame, coarse, {Mask(2, 1, 1)},
                                      exact_prior(Frame::filled(0, 2, 1, {0.5, 0.5, 0.5})));
  CHECK(r.degenerate_pixels == 2);
  CHECK(r.alpha.at(1, 0) == 0.0);
}

TEST_CASE("compositing then solving recovers alpha when F is given exactly") {
  oracle::Gen g(35);
  const int w = 32;
  const int h = 8;
  const Rgb fg{0.9, 0.2, 0.1};
  std::vector<double> truth(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) truth[y * w + x] = x < 4 ? 1.0 : g.uniform(0.0, 0.9);
  }
  const Frame bg = oracle::random_frame(g, 1, w, h);
  const Frame f = composite(Frame::filled(1, w, h, fg), AlphaMatte(w, h, truth), bg);
  Mask band(w, h, 1);
  const DetailResult r = detail_solve(f, AlphaMatte(w, h, truth), {band}, exact_prior(bg));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double dr = fg.r - bg.samples()[3 * i];
    const double dg = fg.g - bg.samples()[3 * i + 1];
    const double db = fg.b - bg.samples()[3 * i + 2];
    if (dr * dr + dg * dg + db * db >= 0.04) {
      CHECK(std::abs(r.alpha.values()[i] - truth[i]) <= 1e-6);
    }
  }
}

TEST_CASE("fusion selects detail in the band and thresholded semantics elsewhere") {
  oracle::Gen g(36);
  const SemanticMap s(1, 1, {0.7});
  const AlphaMatte detail(4, 4, oracle::random_unit(g, 16));
  CHECK(fuse(s, detail, {Mask(4, 4, 0)}).values()[5] == 1.0);
  const AlphaMatte all = fuse(s, detail, {Mask(4, 4, 1)});
  CHECK(std::equal(all.values().begin(), all.values().end(), detail.values().begin()));

  const SemanticMap mixed(2, 2, {0.1, 0.6, 0.4, 0.9});
  Mask band(8, 8);
  for (auto& v : band.values) v = g.coin();
  const AlphaMatte d8(8, 8, oracle::random_unit(g, 64));
  const AlphaMatte out = fuse(mixed, d8, {band});
  const std::vector<double> sv(mixed.values().begin(), mixed.values().end());
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const double up = oracle::bilinear_at(sv, 2, 2, 8, 8, x, y);
      const double expect = band.at(x, y) ? d8.at(x, y) : (up >= 0.5 ? 1.0 : 0.0);
      CHECK(out.at(x, y) == expect);
    }
  }
}

TEST_CASE("first frame restores exactly the pixels the semantic map calls background") {
  oracle::Gen g(37);
  const Frame frame = oracle::random_frame(g, 1, 16, 12);
  Predictor p = classical_predictor();
  SemanticMap forced(4, 3, oracle::random_semantic_values(g, 12));
  p.semantic = [&](const SemanticInput&) { return forced; };
  const FrameOutput out = process_frame(frame, init_stream(16, 12), p);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(out.next.background.mask()[i] == ((1.0 - forced.values()[i]) > 0.5 ? 1 : 0));
  }
}

TEST_CASE("static empty scene restores after the second frame") {
  oracle::Gen g(38);
  const Frame frame = oracle::random_frame(g, 1, 16, 16);
  const Predictor p = classical_predictor();
  StreamState stream = init_stream(16, 16);
  stream = process_frame(frame, stream, p).next;
  CHECK(stream.background.restored_count() == 0);
  stream = process_frame(frame.with_index(2), stream, p).next;
  CHECK(stream.background.restored_count() == 16);
  const Frame f4 = downsample4x(frame);
  const double keep = 1.0 - logistic(-0.1 / 0.02);
  for (std::size_t k = 0; k < f4.samples().size(); ++k) {
    CHECK(oracle::same_bits(stream.background.feature()[k], keep * f4.samples()[k]));
  }
}

TEST_CASE("semantics read the background state from before the update") {
  oracle::Gen g(39);
  Predictor p = classical_predictor();
  const auto inner = p.semantic;
  std::vector<std::uint64_t> seen;
  p.semantic = [&](const SemanticInput& in) {
    seen.push_back(in.state.version());
    return inner(in);
  };
  StreamState stream = init_stream(16, 16);
  for (int t = 1; t <= 5; ++t) {
    const FrameOutput out = process_frame(oracle::random_frame(g, t, 16, 16), stream, p);
    CHECK(out.next.background.version() == static_cast<std::uint64_t>(t));
    stream = out.next;
  }
  CHECK(seen == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("pipeline output is a valid matte and deterministic") {
  SynthConfig c;
  c.width = 64;
  c.height = 48;
  c.clip_length = 6;
  c.shapes = walk_in_portrait(64, 48, -0.2, 0.4, 0.15, 0.0, 0.2, 3.0, true);
  const VideoSequence clip = build_clip(c);
  auto run = [&] {
    std::vector<AlphaMatte> out;
    StreamState stream = init_stream(64, 48);
    const Predictor p = classical_predictor();
    for (const Frame& f : clip.frames()) {
      FrameOutput o = process_frame(f, stream, p);
      for (double v : o.matte.values()) CHECK((v >= 0.0 && v <= 1.0));
      out.push_back(o.matte);
      stream = o.next;
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("moving disc: blocks clear in two consecutive frames end up restored") {
  SynthConfig c;
  c.width = 96;
  c.height = 64;
  c.clip_length = 20;
  ShapeSpec disc;
  disc.center_x = 10;
  disc.center_y = 32;
  disc.velocity_x = 4;
  disc.radius = 12;
  disc.feather = 2;
  c.shapes = {disc};
  const VideoSequence clip = build_clip(c);
  const Predictor p = classical_predictor();
  StreamState stream = init_stream(c.width, c.height);
  for (const Frame& f : clip.frames()) stream = process_frame(f, stream, p).next;

  const int bw = c.width / 4;
  const int bh = c.height / 4;
  auto clear = [&](int t, int bx, int by) {
    for (int y = 4 * by; y < 4 * by + 4; ++y) {
      for (int x = 4 * bx; x < 4 * bx + 4; ++x) {
        if (shape_alpha(disc, t, x + 0.5, y + 0.5) > 0.0) return false;
      }
    }
    return true;
  };
  std::size_t expected = 0;
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      bool seen = false;
      for (int t = 2; t <= c.clip_length && !seen; ++t) seen = clear(t - 1, bx, by) && clear(t, bx, by);
      if (!seen) continue;
      ++expected;
      CHECK(stream.background.mask_at(bx, by) == 1);
    }
  }
  CHECK(expected > 0);
}

TEST_CASE("predictor registry") {
  CHECK(has_predictor("classical"));
  CHECK_FALSE(has_predictor("no-such-predictor"));
  CHECK_THROWS_AS(make_predictor("no-such-predictor", {}), Error);
  register_predictor("flat-test", [](const ClassicalParams& params) {
    Predictor p = classical_predictor(params);
    p.name = "flat-test";
    return p;
  });
  CHECK(make_predictor("flat-test", {}).name == "flat-test");
}

}  // TEST_SUITE
