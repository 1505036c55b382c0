#pragma once

// Synthetic labelled clips: procedural soft-edged "portraits" composited over
// a background that moves by small affine steps from frame to frame.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "bgmatte/image.hpp"

namespace bgmatte {

/// Per-frame background motion. Each step adds the drift plus a uniform
/// jitter drawn from the seeded generator, so the view moves smoothly.
struct MotionConfig {
  double drift_x = 0.0;            // pixels per frame
  double drift_y = 0.0;
  double jitter_translation = 0.0; // max |dx|, |dy| per frame
  double jitter_rotation = 0.0;    // max |d theta| per frame, radians
  double jitter_scale = 0.0;       // max |d scale| per frame

  friend bool operator==(const MotionConfig&, const MotionConfig&) = default;
};

enum class ShapeKind { disc, capsule };

/// A feathered shape moving at constant velocity. For a capsule the core is
/// the segment from the centre to centre + (axis_x, axis_y).
struct ShapeSpec {
  ShapeKind kind = ShapeKind::disc;
  double center_x = 0.0;  // position at frame 1, pixels
  double center_y = 0.0;
  double velocity_x = 0.0;  // pixels per frame
  double velocity_y = 0.0;
  double axis_x = 0.0;
  double axis_y = 0.0;
  double radius = 0.0;
  double feather = 3.0;  // half-width of the alpha ramp
  Rgb color{0.92, 0.72, 0.55};
};

/// Caller-supplied foreground colours and mattes, one per frame.
struct ProvidedForeground {
  std::vector<Frame> colors;
  std::vector<AlphaMatte> alphas;
};

struct SynthConfig {
  int width = 256;
  int height = 256;
  int clip_length = 10;
  std::uint64_t seed = 1;
  int margin = 16;  // extra border of the procedural base image
  MotionConfig motion;
  std::optional<Frame> background;  // procedural when empty
  std::vector<ShapeSpec> shapes;
  std::optional<ProvidedForeground> provided;
};

void validate(const SynthConfig& config);

/// Per-frame background view. Maps an output pixel (x, y) to base
/// coordinates: centre + scale * R(rotation) * (p - frame centre) + shift.
struct AffineView {
  double shift_x = 0.0;
  double shift_y = 0.0;
  double rotation = 0.0;
  double scale = 1.0;
};

/// Views for frames 1..N; the first is always the identity.
std::vector<AffineView> background_motion(const SynthConfig& config);

/// Smooth cool-toned gradient with a low-frequency ripple.
Frame procedural_background(int width, int height, std::uint64_t seed);

VideoSequence gen_dynamic_background(const Frame& base, const SynthConfig& config);

struct ForegroundClip {
  std::vector<Frame> colors;
  std::vector<AlphaMatte> alphas;
};

/// Closed-form alpha of one shape at frame t (1-based), pixel centre (px, py):
/// clamp((r + f - d) / 2f, 0, 1), or d < r when f = 0.
double shape_alpha(const ShapeSpec& shape, int t, double px, double py);

/// Distance from (px, py) to the shape core at frame t.
double shape_distance(const ShapeSpec& shape, int t, double px, double py);

ForegroundClip gen_foreground(const SynthConfig& config);

/// I = alpha * F + (1 - alpha) * B, clamped to [0,1]. Keeps bg's index.
Frame composite(const Frame& fg, const AlphaMatte& alpha, const Frame& bg);

/// Frames with alpha, background and foreground ground truth attached.
VideoSequence build_clip(const SynthConfig& config);

/// Full-resolution union over frames of (alpha < 0.5), from shape geometry.
Mask visibility_union(const SynthConfig& config);

/// Working-resolution (block = 4) union over frames of blocks whose mean
/// closed-form alpha is below 0.5.
Mask restorable_blocks(const SynthConfig& config);

/// Working-resolution union over frames of blocks with alpha exactly 0.
Mask clear_blocks(const SynthConfig& config);

/// Head disc plus body capsule entering from the left. Positions and speed
/// are fractions of the frame size; radius is a fraction of min(w, h).
std::vector<ShapeSpec> walk_in_portrait(int width, int height, double start_x, double start_y,
                                        double speed_x, double speed_y, double radius,
                                        double feather, bool body);

/// Block mean of a full-resolution matte at the working resolution; the
/// semantic map an ideal estimator would produce.
SemanticMap truth_semantic(const AlphaMatte& alpha);

/// Uniform double in [0,1) from the top 53 bits of a 64-bit Mersenne twister.
double unit_uniform(std::mt19937_64& rng);

}  // namespace bgmatte
