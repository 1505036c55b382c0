#pragma once

// Flat "section.key = value" configuration. Every key has a documented
// default and range; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bgmatte/matting.hpp"
#include "bgmatte/metrics.hpp"
#include "bgmatte/prm.hpp"
#include "bgmatte/synth.hpp"

namespace bgmatte {

struct PrmSettings {
  double xi = 0.01;
  double cap = 0.15;
  int halo = 8;
  int force_k = 0;  // 0 = resolution rule
  double w_transition = 0.7;
  double w_gradient = 0.3;

  friend bool operator==(const PrmSettings&, const PrmSettings&) = default;
};

struct OfdSettings {
  bool enabled = false;
  OfdParams params;

  friend bool operator==(const OfdSettings&, const OfdSettings&) = default;
};

struct LossSettings {
  double epsilon = 1e-6;
  int gamma_radius = 2;

  friend bool operator==(const LossSettings&, const LossSettings&) = default;
};

struct SynthSettings {
  int width = 256;
  int height = 256;
  int clip_length = 10;
  std::uint64_t seed = 1;
  int margin = 16;
  int backgrounds = 1;  // clips per foreground, each with its own background
  MotionConfig motion;
  double portrait_radius = 0.14;  // fraction of min(width, height)
  double feather = 3.0;           // pixels
  double start_x = -0.35;         // fractions of the frame size
  double start_y = 0.4;
  double speed_x = 0.1;           // fraction of the width per frame
  double speed_y = 0.0;
  bool body = true;

  friend bool operator==(const SynthSettings&, const SynthSettings&) = default;
};

struct IoSettings {
  std::string input;
  std::string output;

  friend bool operator==(const IoSettings&, const IoSettings&) = default;
};

struct PipelineConfig {
  std::string predictor = "classical";
  ClassicalParams classical;
  PrmSettings prm;
  OfdSettings ofd;
  LossSettings loss;
  SynthSettings synth;
  IoSettings io;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Parses config text. `source` names the origin in error messages.
PipelineConfig parse_config(std::string_view text, std::string_view source = "<config>");

PipelineConfig load_config(const std::filesystem::path& path);

/// Every key, one per line, in a form parse_config reads back exactly.
std::string save_config(const PipelineConfig& config);

/// Throws Error(config) naming the first key outside its range.
void validate(const PipelineConfig& config);

/// Names of all accepted keys, in file order.
std::vector<std::string> config_keys();

SynthConfig make_synth_config(const SynthSettings& settings);
RefineParams make_refine_params(const PipelineConfig& config, int threads);
FlawParams make_flaw_params(const PipelineConfig& config);

}  // namespace bgmatte
