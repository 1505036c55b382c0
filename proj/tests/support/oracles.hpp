#pragma once

// Reference implementations written independently of the library: plain
// scalar loops, brute-force searches and explicit formulas. Tests compare the
// library against these rather than against itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "bgmatte/image.hpp"

namespace oracle {

// Test-side generator; deliberately not the library's unit_uniform.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline bgmatte::Frame random_frame(Gen& g, int index, int w, int h) {
  std::vector<double> px(static_cast<std::size_t>(w) * h * 3);
  for (double& v : px) v = g.uniform();
  return bgmatte::Frame(index, w, h, std::move(px));
}

inline std::vector<double> random_unit(Gen& g, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = g.uniform();
  return v;
}

// Semantic values that hit the 0.5 boundary and the exact ends often.
inline std::vector<double> random_semantic_values(Gen& g, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) {
    const int pick = g.integer(0, 5);
    x = pick == 0 ? 0.0 : pick == 1 ? 1.0 : pick == 2 ? 0.5 : g.uniform();
  }
  return v;
}

inline std::vector<double> block_mean(const bgmatte::Frame& f) {
  const int ow = f.width() / 4;
  const int oh = f.height() / 4;
  std::vector<double> out;
  for (int by = 0; by < oh; ++by) {
    for (int bx = 0; bx < ow; ++bx) {
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int y = 4 * by; y < 4 * by + 4; ++y) {
          for (int x = 4 * bx; x < 4 * bx + 4; ++x) s += f.at(x, y, c);
        }
        out.push_back(s / 16.0);
      }
    }
  }
  return out;
}

// Direct interpolation formula for one target pixel, half-pixel centres.
inline double bilinear_at(const std::vector<double>& src, int w, int h, int tw, int th, int x,
                          int y) {
  auto coord = [](int i, int n, int tn) {
    double u = (i + 0.5) * n / tn - 0.5;
    if (u < 0) u = 0;
    if (u > n - 1) u = n - 1;
    return u;
  };
  const double u = coord(x, w, tw);
  const double v = coord(y, h, th);
  double acc = 0.0;
  for (int yy = 0; yy < h; ++yy) {
    for (int xx = 0; xx < w; ++xx) {
      const double wx = std::max(0.0, 1.0 - std::abs(u - xx));
      const double wy = std::max(0.0, 1.0 - std::abs(v - yy));
      acc += wx * wy * src[static_cast<std::size_t>(yy) * w + xx];
    }
  }
  return acc;
}

// One step of the background update written as per-pixel branches.
struct BrmPixel {
  double f[3];
  int m;
};

inline BrmPixel brm_step(const BrmPixel& prev, const double bgi[3], double s, bool& is_new,
                         bool& is_avg) {
  BrmPixel next = prev;
  const bool background = (1.0 - s) > 0.5;
  is_new = prev.m == 0 && background;
  is_avg = prev.m == 1 && background;
  for (int c = 0; c < 3; ++c) {
    if (is_new) {
      next.f[c] = prev.f[c] + bgi[c];
    } else if (is_avg) {
      next.f[c] = (prev.f[c] + bgi[c]) / 2.0;
    }
  }
  if (is_new) next.m = 1;
  return next;
}

inline bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

// Lowest row-major index among the nearest sites, or -1.
inline long nearest_site(const std::vector<std::uint8_t>& sites, int w, int h, int x, int y) {
  long best = -1;
  long long best_d = std::numeric_limits<long long>::max();
  for (int yy = 0; yy < h; ++yy) {
    for (int xx = 0; xx < w; ++xx) {
      if (!sites[static_cast<std::size_t>(yy) * w + xx]) continue;
      const long long d = 1LL * (xx - x) * (xx - x) + 1LL * (yy - y) * (yy - y);
      if (d < best_d) {
        best_d = d;
        best = static_cast<long>(yy) * w + xx;
      }
    }
  }
  return best;
}

inline double project_alpha(const double in[3], const double fg[3], const double bg[3],
                            double delta) {
  double dot = 0.0;
  double nn = 0.0;
  for (int c = 0; c < 3; ++c) {
    dot += (in[c] - bg[c]) * (fg[c] - bg[c]);
    nn += (fg[c] - bg[c]) * (fg[c] - bg[c]);
  }
  const double a = dot / (nn > delta ? nn : delta);
  return a < 0 ? 0 : a > 1 ? 1 : a;
}

// Brute-force window morphology, in-image neighbours only.
inline std::vector<std::uint8_t> morph(const std::vector<std::uint8_t>& m, int w, int h, int r,
                                       bool dilation) {
  std::vector<std::uint8_t> out(m.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool any = false;
      bool all = true;
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          const bool on = m[static_cast<std::size_t>(yy) * w + xx] != 0;
          any = any || on;
          all = all && on;
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = (dilation ? any : all) ? 1 : 0;
    }
  }
  return out;
}

// Top `cap` of the indices scoring above xi; ties go to the lower index.
inline std::vector<std::size_t> select_reference(const std::vector<double>& scores, double xi,
                                                 std::size_t cap) {
  std::vector<std::pair<double, std::size_t>> c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > xi) c.push_back({-scores[i], i});
  }
  std::sort(c.begin(), c.end());
  if (c.size() > cap) c.resize(cap);
  std::vector<std::size_t> out;
  for (auto& p : c) out.push_back(p.second);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::size_t ceil_cap(int k, double cap) {
  // Integer arithmetic for the usual percentage caps.
  const long long num = std::llround(cap * 10000.0) * k * k;
  return static_cast<std::size_t>((num + 9999) / 10000);
}

}  // namespace oracle
