#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "bgmatte/error.hpp"
#include "bgmatte/metrics.hpp"
#include "support/oracles.hpp"

using namespace bgmatte;

namespace {

AlphaMatte vertical_edge(int w, int h, int edge) {
  std::vector<double> a(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) a[y * w + x] = x >= edge ? 1.0 : 0.0;
  }
  return AlphaMatte(w, h, a);
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("boundary mask examples") {
  for (double v : {0.0, 1.0, 0.03, 0.97}) {
    const BoundaryWeightMask g = boundary_mask(AlphaMatte::filled(9, 7, v));
    for (double w : g.weights) CHECK(w == 1.0);
  }
  const BoundaryWeightMask half = boundary_mask(AlphaMatte::filled(9, 7, 0.5));
  for (double w : half.weights) CHECK(w == 4.0);

  const BoundaryWeightMask edge = boundary_mask(vertical_edge(16, 5, 8), 2);
  for (int y = 0; y < 5; ++y) {
    int width = 0;
    for (int x = 0; x < 16; ++x) {
      const double w = edge.weights[y * 16 + x];
      CHECK((w == 1.0 || w == 4.0));
      if (w == 4.0) {
        ++width;
        CHECK(x >= 6);
        CHECK(x <= 9);
      }
    }
    CHECK(width >= 4);
    CHECK(width <= 5);
  }
  CHECK_THROWS_AS(boundary_mask(AlphaMatte::filled(2, 2, 0), 0), Error);
}

TEST_CASE("boundary mask matches brute-force morphology") {
  oracle::Gen g(51);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = g.integer(1, 20);
    const int h = g.integer(1, 20);
    const int r = g.integer(1, 3);
    std::vector<double> a(static_cast<std::size_t>(w) * h);
    for (double& v : a) v = g.coin(0.7) ? (g.coin() ? 0.0 : 1.0) : g.uniform();
    std::vector<std::uint8_t> some(a.size()), solid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      some[i] = a[i] > 0.05;
      solid[i] = a[i] > 0.95;
    }
    const auto outer = oracle::morph(some, w, h, r, true);
    const auto inner = oracle::morph(solid, w, h, r, false);
    const BoundaryWeightMask gm = boundary_mask(AlphaMatte(w, h, a), r);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(gm.weights[i] == (outer[i] && !inner[i] ? 4.0 : 1.0));
    }
  }
}

TEST_CASE("background loss examples") {
  oracle::Gen g(52);
  const Frame a = oracle::random_frame(g, 1, 6, 4);
  const BoundaryWeightMask ones = uniform_weights(6, 4);
  const double eps = 1e-6;
  CHECK(loss_bg(std::span(&a, 1), std::span(&a, 1), ones, eps) == doctest::Approx(eps));

  std::vector<double> px(a.samples().begin(), a.samples().end());
  px[3 * 5] = px[3 * 5] > 0.5 ? px[3 * 5] - 0.3 : px[3 * 5] + 0.3;
  const Frame b(1, 6, 4, px);
  BoundaryWeightMask gamma = ones;
  gamma.weights[5] = 4.0;
  const double tiny = 1e-12;
  // Per-channel mean: 72 samples, one off by 0.3.
  CHECK(loss_bg(std::span(&b, 1), std::span(&a, 1), gamma, tiny) ==
        doctest::Approx(4.0 * 0.3 / 72.0).epsilon(1e-9));

  const std::vector<Frame> two_p{b, b.with_index(2)};
  const std::vector<Frame> two_g{a, a.with_index(2)};
  const double once = loss_bg(std::span(&b, 1), std::span(&a, 1), ones, eps);
  CHECK(loss_bg(two_p, two_g, ones, eps) == doctest::Approx(2.0 * once).epsilon(1e-15));
  CHECK_THROWS_AS(loss_bg(two_p, std::span(&a, 1), ones, eps), Error);
  CHECK_THROWS_AS(loss_bg(two_p, two_g, ones, 0.0), Error);
}

TEST_CASE("alpha loss examples") {
  oracle::Gen g(53);
  const AlphaMatte a(5, 5, oracle::random_unit(g, 25));
  const BoundaryWeightMask ones = uniform_weights(5, 5);
  CHECK(loss_alpha_hr(a, a, ones, 1e-6) == doctest::Approx(1e-6));

  std::vector<double> bin(25), comp(25);
  for (int i = 0; i < 25; ++i) {
    bin[i] = g.coin() ? 1.0 : 0.0;
    comp[i] = 1.0 - bin[i];
  }
  CHECK(loss_alpha_hr(AlphaMatte(5, 5, comp), AlphaMatte(5, 5, bin), ones, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-9));

  BoundaryWeightMask band = ones;
  for (int i = 0; i < 10; ++i) band.weights[i] = 4.0;
  const AlphaMatte b(5, 5, oracle::random_unit(g, 25));
  const double eps = 1e-9;
  double expect = 0.0;
  for (int i = 0; i < 25; ++i) {
    const double d = b.values()[i] - a.values()[i];
    expect += (i < 10 ? 4.0 : 1.0) * std::sqrt(d * d + eps * eps);
  }
  CHECK(loss_alpha_hr(b, a, band, eps) == doctest::Approx(expect / 25.0).epsilon(1e-12));
  CHECK(loss_alpha_hr_raw_sum(b, a, band, eps) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("losses are bounded below by mean gamma times epsilon") {
  oracle::Gen g(54);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = g.integer(1, 12);
    const int h = g.integer(1, 12);
    const AlphaMatte p(w, h, oracle::random_unit(g, static_cast<std::size_t>(w) * h));
    const AlphaMatte t(w, h, oracle::random_unit(g, static_cast<std::size_t>(w) * h));
    const BoundaryWeightMask gm = boundary_mask(t, 1);
    const double eps = g.uniform(1e-6, 1e-2);
    CHECK(loss_alpha_hr(p, t, gm, eps) >= gm.mean() * eps * (1 - 1e-12));
    CHECK(loss_alpha_hr(t, t, gm, eps) == doctest::Approx(gm.mean() * eps).epsilon(1e-12));
  }
}

TEST_CASE("mad and mse examples") {
  oracle::Gen g(55);
  std::vector<double> base(100);
  for (double& v : base) v = g.uniform(0.0, 0.99);
  std::vector<double> shifted(base);
  for (double& v : shifted) v += 0.01;
  const AlphaMatte a(10, 10, base);
  const AlphaMatte b(10, 10, shifted);
  CHECK(mad(a, a) == 0.0);
  CHECK(mse(a, a) == 0.0);
  CHECK(mad(b, a) * kMetricScale == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(mse(b, a) * kMetricScale == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> one(100, 0.0);
  one[37] = 1.0;
  CHECK(mad(AlphaMatte(10, 10, one), AlphaMatte::filled(10, 10, 0.0)) == doctest::Approx(0.01));
  CHECK_THROWS_AS(mad(a, AlphaMatte::filled(5, 5, 0)), Error);
}

TEST_CASE("metric properties: symmetry, mse below mad, pixel permutation") {
  oracle::Gen g(56);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = g.integer(1, 64);
    auto pv = oracle::random_unit(g, n);
    auto tv = oracle::random_unit(g, n);
    const AlphaMatte p(n, 1, pv);
    const AlphaMatte t(n, 1, tv);
    CHECK(mad(p, t) == mad(t, p));
    CHECK(mse(p, t) <= mad(p, t));

    std::vector<double> weights(n);
    for (double& w : weights) w = g.coin() ? 4.0 : 1.0;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());
    std::vector<double> pp(n), tp(n), wp(n);
    for (int i = 0; i < n; ++i) {
      pp[i] = pv[perm[i]];
      tp[i] = tv[perm[i]];
      wp[i] = weights[perm[i]];
    }
    const BoundaryWeightMask gw{n, 1, weights};
    const BoundaryWeightMask gp{n, 1, wp};
    CHECK(mad(AlphaMatte(n, 1, pp), AlphaMatte(n, 1, tp)) == doctest::Approx(mad(p, t)));
    CHECK(loss_alpha_hr(AlphaMatte(n, 1, pp), AlphaMatte(n, 1, tp), gp, 1e-6) ==
          doctest::Approx(loss_alpha_hr(p, t, gw, 1e-6)));
  }
}

TEST_CASE("ofd examples") {
  auto seq = [](std::initializer_list<double> v) {
    std::vector<AlphaMatte> out;
    for (double x : v) out.push_back(AlphaMatte(1, 1, {x}));
    return out;
  };
  const auto constant = seq({0.3, 0.3, 0.3, 0.3});
  CHECK(ofd_filter(constant).mattes == constant);

  const OfdResult flick = ofd_filter(seq({0.0, 1.0, 0.0}));
  CHECK(flick.mattes[1].values()[0] == 0.0);
  CHECK(flick.corrected_pixels == 1);

  const auto calm = seq({0.0, 0.15, 0.1});
  CHECK(ofd_filter(calm).mattes == calm);

  const OfdResult short_seq = ofd_filter(seq({0.0, 1.0}));
  CHECK(short_seq.warning.has_value());
  CHECK(short_seq.mattes == seq({0.0, 1.0}));
}

TEST_CASE("ofd leaves pixels with disagreeing neighbours alone") {
  oracle::Gen g(57);
  std::vector<AlphaMatte> frames;
  for (int t = 0; t < 8; ++t) frames.push_back(AlphaMatte(16, 1, oracle::random_unit(g, 16)));
  const OfdResult r = ofd_filter(frames);
  for (std::size_t t = 1; t + 1 < frames.size(); ++t) {
    for (int i = 0; i < 16; ++i) {
      const double a = frames[t - 1].values()[i];
      const double c = frames[t + 1].values()[i];
      if (std::abs(a - c) > 0.1) CHECK(r.mattes[t].values()[i] == frames[t].values()[i]);
    }
  }
  CHECK(r.mattes.front() == frames.front());
  CHECK(r.mattes.back() == frames.back());
}

TEST_CASE("streaming ofd matches the batch filter") {
  oracle::Gen g(58);
  std::vector<AlphaMatte> frames;
  for (int t = 0; t < 9; ++t) {
    std::vector<double> v(20);
    for (double& x : v) x = g.coin(0.3) ? g.uniform() : (t % 2 ? 0.9 : 0.1);
    frames.push_back(AlphaMatte(20, 1, v));
  }
  const OfdResult batch = ofd_filter(frames);
  OfdStream stream;
  std::vector<AlphaMatte> streamed;
  for (const auto& f : frames) {
    if (auto out = stream.push(f)) streamed.push_back(*out);
  }
  if (auto out = stream.finish()) streamed.push_back(*out);
  CHECK(streamed == batch.mattes);
  CHECK(stream.corrected_pixels() == batch.corrected_pixels);
}

}  // TEST_SUITE
