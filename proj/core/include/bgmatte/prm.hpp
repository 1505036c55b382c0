#pragma once

// Patch refinement: tile the full-resolution matte into a fixed k x k grid,
// score each tile, and re-solve only the worst tiles at native resolution.

#include <cstddef>
#include <vector>

#include "bgmatte/image.hpp"
#include "bgmatte/matting.hpp"

namespace bgmatte {

/// k = 16 up to 4096 pixels on the longer side, 32 above.
int grid_dimension_for(int width, int height);

class PatchGrid {
 public:
  PatchGrid(int width, int height, int k);

  int k() const { return k_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return patches_.size(); }
  /// Row-major patch index: row * k + column.
  const Rect& patch(std::size_t index) const { return patches_[index]; }
  const std::vector<Rect>& patches() const { return patches_; }

 private:
  int width_;
  int height_;
  int k_;
  std::vector<Rect> patches_;
};

/// Exact tiling; when w or h is not a multiple of k the leading columns/rows
/// are one pixel wider/taller. `force_k` > 0 overrides the resolution rule.
PatchGrid build_grid(int width, int height, int force_k = 0);

struct FlawParams {
  double w_transition = 0.7;
  double w_gradient = 0.3;
  double lo = 0.05;
  double hi = 0.95;

  friend bool operator==(const FlawParams&, const FlawParams&) = default;
};

class FlawMap {
 public:
  FlawMap(int k, std::vector<double> scores);

  int k() const { return k_; }
  const std::vector<double>& scores() const { return scores_; }
  double at(std::size_t index) const { return scores_[index]; }

 private:
  int k_;
  std::vector<double> scores_;
};

/// score = w_t * (fraction of alpha in (lo, hi)) + w_g * (mean forward-
/// difference gradient magnitude), clamped to [0,1].
FlawMap compute_flaw_map(const AlphaMatte& coarse_full, const PatchGrid& grid,
                         const FlawParams& params = {});

struct PatchSchedule {
  int k = 0;
  double xi = 0.01;
  double cap = 0.15;
  std::vector<std::size_t> selected;  // ascending patch indices
};

/// ceil(cap * k^2).
std::size_t schedule_capacity(int k, double cap);

/// Patches scoring strictly above xi; if more than the capacity qualify, the
/// highest scores win with ties going to the lower index.
PatchSchedule select_patches(const FlawMap& flaws, double xi = 0.01, double cap = 0.15);

struct RefineParams {
  int halo = 8;
  DetailParams detail;
  BandParams band;  // lo/hi define the coarse transition; radius is unused here
  int threads = 1;

  friend bool operator==(const RefineParams&, const RefineParams&) = default;
};

/// Unselected patches are copied from the coarse matte unchanged. Each
/// selected patch is re-solved with detail_solve_region: the band is the
/// coarse transition dilated by `halo`, and the foreground search may read
/// `halo` pixels beyond the patch, which are never written.
AlphaMatte refine(const Frame& frame, const AlphaMatte& coarse_full,
                  const PatchSchedule& schedule, const PatchGrid& grid,
                  const BackgroundPrior& prior, const RefineParams& params = {});

/// Pixels covered by the selected patches.
std::size_t refined_pixel_count(const PatchSchedule& schedule, const PatchGrid& grid);

}  // namespace bgmatte
