#include "bgmatte/prm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bgmatte/error.hpp"
#include "bgmatte/parallel.hpp"

namespace bgmatte {
namespace {

constexpr int kMaxSideForSmallGrid = 4096;

// Leading `n % k` segments get one extra pixel.
std::vector<std::pair<int, int>> split(int n, int k) {
  std::vector<std::pair<int, int>> segs(k);
  const int base = n / k;
  const int extra = n % k;
  int pos = 0;
  for (int i = 0; i < k; ++i) {
    const int len = base + (i < extra ? 1 : 0);
    segs[i] = {pos, len};
    pos += len;
  }
  return segs;
}

}  // namespace

int grid_dimension_for(int width, int height) {
  return std::max(width, height) <= kMaxSideForSmallGrid ? 16 : 32;
}

PatchGrid::PatchGrid(int width, int height, int k) : width_(width), height_(height), k_(k) {
  if (k < 1) throw Error(ErrorKind::contract, "grid dimension must be >= 1");
  if (width < k || height < k) {
    throw Error(ErrorKind::degenerate_input,
                "image " + std::to_string(width) + "x" + std::to_string(height) +
                    " is smaller than a " + std::to_string(k) + "x" + std::to_string(k) +
                    " patch grid");
  }
  const auto cols = split(width, k);
  const auto rows = split(height, k);
  patches_.reserve(static_cast<std::size_t>(k) * k);
  for (const auto& [y, ph] : rows) {
    for (const auto& [x, pw] : cols) patches_.push_back({x, y, pw, ph});
  }
}

PatchGrid build_grid(int width, int height, int force_k) {
  if (force_k < 0) throw Error(ErrorKind::contract, "force_k must be >= 0");
  return PatchGrid(width, height, force_k > 0 ? force_k : grid_dimension_for(width, height));
}

FlawMap::FlawMap(int k, std::vector<double> scores) : k_(k), scores_(std::move(scores)) {
  if (k < 1 || scores_.size() != static_cast<std::size_t>(k) * k) {
    throw Error(ErrorKind::dimension_mismatch, "flaw map must hold k*k scores");
  }
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorKind::out_of_range, "flaw scores must lie in [0,1]");
    }
  }
}

FlawMap compute_flaw_map(const AlphaMatte& coarse_full, const PatchGrid& grid,
                         const FlawParams& params) {
  if (coarse_full.width() != grid.width() || coarse_full.height() != grid.height()) {
    throw Error(ErrorKind::dimension_mismatch, "flaw map: matte and grid sizes differ");
  }
  const int w = coarse_full.width();
  const int h = coarse_full.height();
  const auto a = coarse_full.values();
  std::vector<double> scores(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Rect& r = grid.patch(p);
    std::size_t transition = 0;
    double gradient = 0.0;
    for (int y = r.y; y < r.bottom(); ++y) {
      for (int x = r.x; x < r.right(); ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (a[i] > params.lo && a[i] < params.hi) ++transition;
        const double gx = x + 1 < w ? a[i + 1] - a[i] : 0.0;
        const double gy = y + 1 < h ? a[i + w] - a[i] : 0.0;
        gradient += std::sqrt(gx * gx + gy * gy);
      }
    }
    const double n = static_cast<double>(r.area());
    const double score = params.w_transition * (static_cast<double>(transition) / n) +
                         params.w_gradient * (gradient / n);
    scores[p] = std::clamp(score, 0.0, 1.0);
  }
  return FlawMap(grid.k(), std::move(scores));
}

std::size_t schedule_capacity(int k, double cap) {
  const double raw = cap * static_cast<double>(k) * static_cast<double>(k);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

PatchSchedule select_patches(const FlawMap& flaws, double xi, double cap) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw Error(ErrorKind::contract, "xi must lie in [0,1]");
  if (!(cap >= 0.0 && cap <= 1.0)) throw Error(ErrorKind::contract, "cap must lie in [0,1]");

  const auto& s = flaws.scores();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > xi) candidates.push_back(i);
  }
  const std::size_t capacity = schedule_capacity(flaws.k(), cap);
  if (candidates.size() > capacity) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    candidates.resize(capacity);
    std::sort(candidates.begin(), candidates.end());
  }
  return {flaws.k(), xi, cap, std::move(candidates)};
}

AlphaMatte refine(const Frame& frame, const AlphaMatte& coarse_full,
                  const PatchSchedule& schedule, const PatchGrid& grid,
                  const BackgroundPrior& prior, const RefineParams& params) {
  const int w = frame.width();
  const int h = frame.height();
  if (coarse_full.width() != w || coarse_full.height() != h || grid.width() != w ||
      grid.height() != h) {
    throw Error(ErrorKind::dimension_mismatch, "refine: frame, matte and grid sizes differ");
  }
  if (schedule.k != grid.k()) {
    throw Error(ErrorKind::contract, "refine: schedule was built for a different grid");
  }
  if (params.halo < 0) throw Error(ErrorKind::contract, "refine: halo must be >= 0");

  std::vector<double> out(coarse_full.values().begin(), coarse_full.values().end());
  if (schedule.selected.empty()) {
    return AlphaMatte(w, h, std::move(out), Resolution::full);
  }
  for (std::size_t idx : schedule.selected) {
    if (idx >= grid.size()) throw Error(ErrorKind::contract, "refine: patch index out of range");
  }

  const Mask transition = threshold_open_interval(coarse_full.values(), w, h, params.band.lo,
                                                  params.band.hi);
  const Mask band = dilate(transition, params.halo);

  parallel_for(schedule.selected.size(), params.threads, [&](std::size_t n) {
    const Rect& patch = grid.patch(schedule.selected[n]);
    const int x0 = std::max(0, patch.x - params.halo);
    const int y0 = std::max(0, patch.y - params.halo);
    const int x1 = std::min(w, patch.right() + params.halo);
    const int y1 = std::min(h, patch.bottom() + params.halo);
    const Rect context{x0, y0, x1 - x0, y1 - y0};
    detail_solve_region(frame, coarse_full, band, prior, params.detail, patch, context, out);
  });
  return AlphaMatte(w, h, std::move(out), Resolution::full);
}

std::size_t refined_pixel_count(const PatchSchedule& schedule, const PatchGrid& grid) {
  std::size_t total = 0;
  for (std::size_t idx : schedule.selected) total += grid.patch(idx).area();
  return total;
}

}  // namespace bgmatte
