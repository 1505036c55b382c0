#include "bgmatte/pipeline.hpp"

#include "bgmatte/error.hpp"
#include "bgmatte/metrics.hpp"

namespace bgmatte {

Pipeline::Pipeline(const PipelineConfig& config, int width, int height, int threads)
    : config_(config),
      predictor_(make_predictor(config.predictor, config.classical)),
      grid_(build_grid(width, height, config.prm.force_k)),
      refine_(make_refine_params(config, threads)),
      flaw_(make_flaw_params(config)),
      stream_(init_stream(width, height)),
      width_(width),
      height_(height) {}

PipelineStep Pipeline::push(const Frame& frame) {
  if (frame.width() != width_ || frame.height() != height_) {
    throw Error(ErrorKind::dimension_mismatch,
                "frame " + std::to_string(frame.index()) + " is " + std::to_string(frame.width()) +
                    "x" + std::to_string(frame.height()) + ", stream is " +
                    std::to_string(width_) + "x" + std::to_string(height_));
  }
  FrameOutput out = process_frame(frame, stream_, predictor_);
  const FlawMap flaws = compute_flaw_map(out.matte, grid_, flaw_);
  PatchSchedule schedule = select_patches(flaws, config_.prm.xi, config_.prm.cap);
  AlphaMatte refined = refine(frame, out.matte, schedule, grid_, out.prior, refine_);
  const std::size_t pixels = refined_pixel_count(schedule, grid_);
  stream_ = std::move(out.next);
  ++frames_seen_;
  return {std::move(out.matte), std::move(refined), std::move(schedule), pixels};
}

std::vector<AlphaMatte> matte_clip(const VideoSequence& clip, const PipelineConfig& config,
                                   int threads) {
  std::vector<AlphaMatte> mattes;
  if (clip.empty()) return mattes;
  Pipeline pipeline(config, clip.width(), clip.height(), threads);
  for (const Frame& frame : clip.frames()) mattes.push_back(pipeline.push(frame).refined);
  if (config.ofd.enabled) mattes = ofd_filter(mattes, config.ofd.params).mattes;
  return mattes;
}

}  // namespace bgmatte
