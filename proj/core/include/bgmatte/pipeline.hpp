#pragma once

// Frame-sequential driver: predictor + background restoration per frame,
// then patch refinement of the fused matte.

#include <vector>

#include "bgmatte/config.hpp"
#include "bgmatte/matting.hpp"
#include "bgmatte/prm.hpp"

namespace bgmatte {

struct PipelineStep {
  AlphaMatte coarse;   // fused predictor output
  AlphaMatte refined;  // after patch refinement
  PatchSchedule schedule;
  std::size_t refined_pixels = 0;
};

class Pipeline {
 public:
  Pipeline(const PipelineConfig& config, int width, int height, int threads = 1);

  /// Frames must arrive in order; each call advances the background state.
  PipelineStep push(const Frame& frame);

  const StreamState& stream() const { return stream_; }
  int frames_seen() const { return frames_seen_; }

 private:
  PipelineConfig config_;
  Predictor predictor_;
  PatchGrid grid_;
  RefineParams refine_;
  FlawParams flaw_;
  StreamState stream_;
  int width_;
  int height_;
  int frames_seen_ = 0;
};

/// Refined mattes for a whole clip, OFD-filtered when enabled.
std::vector<AlphaMatte> matte_clip(const VideoSequence& clip, const PipelineConfig& config,
                                   int threads = 1);

}  // namespace bgmatte
