#pragma once

// Per-frame matting with a restored-background prior: semantic estimation at
// the working resolution, a known-background detail solve inside the
// transition band, and fusion into a full-resolution matte.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgmatte/brm.hpp"
#include "bgmatte/image.hpp"

namespace bgmatte {

struct SemanticParams {
  double theta = 0.1;   // logistic centre on the mean absolute colour difference
  double sigma = 0.02;  // logistic width
  double initial = 0.5; // value used with no restored background and no history

  friend bool operator==(const SemanticParams&, const SemanticParams&) = default;
};

/// Inputs visible to a semantic estimator. The previous-frame fields are
/// empty on the first frame of a stream.
struct SemanticInput {
  const Frame& frame_4x;
  const BackgroundState& state;
  const SemanticMap* previous_semantic = nullptr;
  const Frame* previous_frame_4x = nullptr;
};

/// Classical stand-in for the semantic branch.
///
/// Restored pixels: s = logistic((d - theta) / sigma) with d the channel-mean
/// absolute difference to the restored background. Unrestored pixels use the
/// same logistic on the difference to the previous frame when one exists,
/// otherwise the previous semantic value, otherwise `initial`.
SemanticMap semantic_estimate(const SemanticInput& input, const SemanticParams& params = {});

struct BandParams {
  double lo = 0.05;
  double hi = 0.95;
  int radius = 2;  // 5x5 structuring element

  friend bool operator==(const BandParams&, const BandParams&) = default;
};

struct TransitionBand {
  Mask mask;
};

/// Pixels with lo < alpha < hi, dilated by a (2r+1)^2 square.
TransitionBand make_band(const AlphaMatte& coarse_full, const BandParams& params = {});

/// Restored background resampled to frame resolution. `valid` is 1 where
/// every contributing low-resolution sample was restored.
struct BackgroundPrior {
  Frame background;
  Mask valid;
};

BackgroundPrior background_prior(const BackgroundState& state, int width, int height);

struct DetailParams {
  double confident = 0.95;  // coarse alpha at or above this marks known foreground
  double delta = 1e-4;      // floor on |F - B|^2

  friend bool operator==(const DetailParams&, const DetailParams&) = default;
};

struct DetailResult {
  AlphaMatte alpha;
  TransitionBand band;
  std::size_t fallback_pixels = 0;    // band pixels that kept the coarse value
  std::size_t degenerate_pixels = 0;  // band pixels with |F - B|^2 < delta
  bool no_confident_foreground = false;
};

/// Known-background alpha solve.
///
/// Inside the band: F is the colour of the nearest pixel (Euclidean, ties to
/// the lower row-major index) with coarse alpha >= `confident`, and
/// alpha = clamp(dot(I - B, F - B) / max(|F - B|^2, delta), 0, 1).
/// Band pixels without a valid background, or a whole band without any
/// confident pixel, keep the coarse value and are counted as fallbacks.
/// Outside the band: 1 where coarse >= 0.5, else 0.
DetailResult detail_solve(const Frame& frame, const AlphaMatte& coarse_full,
                          const TransitionBand& band, const BackgroundPrior& prior,
                          const DetailParams& params = {});

struct DetailCounters {
  std::size_t fallback_pixels = 0;
  std::size_t degenerate_pixels = 0;
  bool no_confident_foreground = false;
};

/// Region form of detail_solve: writes only `write` (into a full-frame
/// buffer `out`) and searches foreground colours only inside `context`.
DetailCounters detail_solve_region(const Frame& frame, const AlphaMatte& coarse_full,
                                   const Mask& band, const BackgroundPrior& prior,
                                   const DetailParams& params, const Rect& write,
                                   const Rect& context, std::span<double> out);

/// Band pixels take the detail value; elsewhere the upsampled semantic map is
/// thresholded at 0.5.
AlphaMatte fuse(const SemanticMap& semantic, const AlphaMatte& detail,
                const TransitionBand& band);

/// Pluggable semantic / detail / fusion branches. Each function must be pure
/// in its arguments.
struct Predictor {
  std::string name;
  std::function<SemanticMap(const SemanticInput&)> semantic;
  std::function<DetailResult(const Frame&, const SemanticMap&, const BackgroundState&)> detail;
  std::function<AlphaMatte(const SemanticMap&, const DetailResult&)> fusion;
};

struct ClassicalParams {
  SemanticParams semantic;
  BandParams band;
  DetailParams detail;

  friend bool operator==(const ClassicalParams&, const ClassicalParams&) = default;
};

Predictor classical_predictor(const ClassicalParams& params = {});

using PredictorFactory = std::function<Predictor(const ClassicalParams&)>;

/// Name-based lookup used by the configuration layer. "classical" is always
/// registered.
void register_predictor(const std::string& name, PredictorFactory factory);
bool has_predictor(const std::string& name);
Predictor make_predictor(const std::string& name, const ClassicalParams& params);

/// Everything that carries over from one frame to the next within a stream.
struct StreamState {
  BackgroundState background;
  std::optional<Frame> previous_frame_4x;
  std::optional<SemanticMap> previous_semantic;
};

StreamState init_stream(int frame_width, int frame_height);

struct FrameOutput {
  AlphaMatte matte;         // fused matte at frame resolution
  SemanticMap semantic;     // s_p used for this frame
  BackgroundPrior prior;    // prior the frame was solved against
  DetailResult detail;
  BrmUpdateTrace trace;
  StreamState next;
};

/// Reads the prior, estimates semantics, solves detail, fuses, then advances
/// the background state with this frame's semantic map.
FrameOutput process_frame(const Frame& frame, const StreamState& stream,
                          const Predictor& predictor);

}  // namespace bgmatte
