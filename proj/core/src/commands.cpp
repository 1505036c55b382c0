#include "bgmatte/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "bgmatte/io.hpp"
#include "bgmatte/metrics.hpp"
#include "bgmatte/parallel.hpp"
#include "bgmatte/pipeline.hpp"
#include "bgmatte/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bgmatte {
namespace {

fs::path require_path(const std::optional<fs::path>& flag, const std::string& from_config,
                      const char* what) {
  if (flag) return *flag;
  if (!from_config.empty()) return from_config;
  throw Error(ErrorKind::config, std::string("missing ") + what +
                                     " directory (pass --" + what + " or set io." + what + ")");
}

// A clip directory written by `synth` keeps its frames in frames/.
fs::path frames_dir(const fs::path& dir) {
  return fs::is_directory(dir / "frames") ? dir / "frames" : dir;
}

fs::path mattes_dir(const fs::path& dir) {
  return fs::is_directory(dir / "alpha") ? dir / "alpha" : dir;
}

void write_effective_config(const PipelineConfig& config, const fs::path& output) {
  write_text(output / "effective.conf", save_config(config));
}

json motion_json(const MotionConfig& m) {
  return {{"drift_x", m.drift_x},
          {"drift_y", m.drift_y},
          {"jitter_translation", m.jitter_translation},
          {"jitter_rotation", m.jitter_rotation},
          {"jitter_scale", m.jitter_scale}};
}

json clip_json(const SynthSettings& s, std::uint64_t seed, std::size_t frames) {
  return {{"seed", seed},
          {"frames", frames},
          {"width", s.width},
          {"height", s.height},
          {"clip_length", s.clip_length},
          {"margin", s.margin},
          {"motion", motion_json(s.motion)},
          {"portrait",
           {{"radius", s.portrait_radius},
            {"feather", s.feather},
            {"start_x", s.start_x},
            {"start_y", s.start_y},
            {"speed_x", s.speed_x},
            {"speed_y", s.speed_y},
            {"body", s.body}}}};
}

void write_clip(const VideoSequence& clip, const json& meta, const fs::path& dir) {
  for (std::size_t i = 0; i < clip.size(); ++i) {
    const std::string name = frame_filename(static_cast<int>(i) + 1);
    write_frame(clip.frames()[i], dir / "frames" / name);
    write_matte(clip.alpha_truth()[i], dir / "alpha" / name);
    write_frame(clip.background_truth()[i], dir / "bg" / name);
    write_frame(clip.foreground_truth()[i], dir / "fg" / name);
  }
  write_text(dir / "clip.json", meta.dump(2) + "\n");
}

// Number of frames with a matte written so far, for delayed (OFD) output.
class MatteWriter {
 public:
  explicit MatteWriter(fs::path dir) : dir_(std::move(dir)) {}
  void write(const AlphaMatte& matte) { write_matte(matte, dir_ / frame_filename(++written_)); }
  int written() const { return written_; }

 private:
  fs::path dir_;
  int written_ = 0;
};

SemanticMap semantic_for(const fs::path& path, int width_4x, int height_4x) {
  const SemanticMap map = read_semantic(path);
  if (map.width() == width_4x && map.height() == height_4x) return map;
  if (map.width() / 4 == width_4x && map.height() / 4 == height_4x) {
    const auto v = map.values();
    return truth_semantic(AlphaMatte(map.width(), map.height(), {v.begin(), v.end()}));
  }
  throw Error(ErrorKind::dimension_mismatch,
              path.string() + ": semantic map is " + std::to_string(map.width()) + "x" +
                  std::to_string(map.height()) + ", expected " + std::to_string(width_4x) + "x" +
                  std::to_string(height_4x) + " or the full frame size");
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : std::nan(""); }

}  // namespace

PipelineConfig effective_config(const CommandOptions& options) {
  PipelineConfig config = options.config ? load_config(*options.config) : PipelineConfig{};
  if (options.seed) config.synth.seed = *options.seed;
  if (options.input) config.io.input = options.input->string();
  if (options.output) config.io.output = options.output->string();
  validate(config);
  return config;
}

void cmd_synth(const CommandOptions& options, std::ostream& log) {
  const PipelineConfig config = effective_config(options);
  const fs::path output = require_path(options.output, config.io.output, "output");
  const int clips = config.synth.backgrounds;
  // Every clip shares the foreground; seed + i picks its background and motion.
  parallel_for(static_cast<std::size_t>(clips), options.threads, [&](std::size_t i) {
    SynthConfig sc = make_synth_config(config.synth);
    sc.seed = config.synth.seed + i;
    const VideoSequence clip = build_clip(sc);
    char name[32];
    std::snprintf(name, sizeof name, "clip_%03zu", i + 1);
    const fs::path dir = clips == 1 ? output : output / name;
    write_clip(clip, clip_json(config.synth, sc.seed, clip.size()), dir);
  });
  write_effective_config(config, output);
  log << "synth: wrote " << clips << " clip(s) of " << config.synth.clip_length << " frames to "
      << output.string() << "\n";
}

void cmd_matte(const CommandOptions& options, std::ostream& log) {
  const PipelineConfig config = effective_config(options);
  const fs::path input = frames_dir(require_path(options.input, config.io.input, "input"));
  const fs::path output = require_path(options.output, config.io.output, "output");
  const auto paths = list_sequence(input);

  std::optional<Pipeline> pipeline;
  std::optional<OfdStream> ofd;
  if (config.ofd.enabled) ofd.emplace(config.ofd.params);
  MatteWriter writer(output / "alpha");
  std::size_t refined = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    const Frame frame = read_frame(paths[i], t);
    if (!pipeline) pipeline.emplace(config, frame.width(), frame.height(), options.threads);
    PipelineStep step = pipeline->push(frame);
    refined += step.refined_pixels;
    if (options.dump_state) write_state(pipeline->stream().background, output / "state", t);
    if (ofd) {
      if (auto ready = ofd->push(std::move(step.refined))) writer.write(*ready);
    } else {
      writer.write(step.refined);
    }
  }
  if (ofd) {
    if (auto last = ofd->finish()) writer.write(*last);
  }
  write_effective_config(config, output);
  log << "matte: " << writer.written() << " frames, " << refined << " refined pixels";
  if (ofd) log << ", " << ofd->corrected_pixels() << " flicker pixels corrected";
  log << "\n";
}

void cmd_restore_bg(const CommandOptions& options, std::ostream& log) {
  const PipelineConfig config = effective_config(options);
  const fs::path input = frames_dir(require_path(options.input, config.io.input, "input"));
  const fs::path output = require_path(options.output, config.io.output, "output");
  const auto paths = list_sequence(input);
  std::vector<fs::path> semantic_paths;
  if (options.semantic) {
    semantic_paths = list_sequence(*options.semantic);
    if (semantic_paths.size() != paths.size()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "restore-bg: " + std::to_string(paths.size()) + " frames vs " +
                      std::to_string(semantic_paths.size()) + " semantic maps");
    }
  }

  std::optional<StreamState> stream;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    const Frame frame = read_frame(paths[i], t);
    Frame frame_4x = downsample4x(frame);
    if (!stream) stream = init_stream(frame.width(), frame.height());
    if (frame_4x.width() != stream->background.width() ||
        frame_4x.height() != stream->background.height()) {
      throw Error(ErrorKind::dimension_mismatch,
                  paths[i].string() + ": frame size differs from frame 1");
    }
    SemanticMap semantic =
        options.semantic
            ? semantic_for(semantic_paths[i], frame_4x.width(), frame_4x.height())
            : semantic_estimate(
                  {frame_4x, stream->background,
                   stream->previous_semantic ? &*stream->previous_semantic : nullptr,
                   stream->previous_frame_4x ? &*stream->previous_frame_4x : nullptr},
                  config.classical.semantic);
    BrmStep step = update(stream->background, extract_bg_info(frame_4x, semantic), semantic);
    write_state(step.state, output, t);
    stream = StreamState{std::move(step.state), std::move(frame_4x), std::move(semantic)};
  }
  write_effective_config(config, output);
  log << "restore-bg: " << paths.size() << " frames, " << stream->background.restored_count()
      << " of " << stream->background.mask().size() << " pixels restored\n";
}

void cmd_eval(const CommandOptions& options, std::ostream& out) {
  const PipelineConfig config = effective_config(options);
  const fs::path input = require_path(options.input, config.io.input, "input");
  if (!options.truth) throw Error(ErrorKind::config, "eval needs --truth <clip dir>");
  const fs::path truth_root = *options.truth;

  const auto predicted_paths = list_sequence(mattes_dir(input));
  const auto truth_paths = list_sequence(mattes_dir(truth_root));
  if (predicted_paths.size() != truth_paths.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "eval: " + std::to_string(predicted_paths.size()) + " predicted mattes vs " +
                    std::to_string(truth_paths.size()) + " ground-truth mattes");
  }
  // Background loss needs both a restored-state dump and true backgrounds.
  const fs::path state_dir = input / "state" / "bgF";
  const fs::path truth_bg_dir = truth_root / "bg";
  std::vector<fs::path> state_paths;
  std::vector<fs::path> truth_bg_paths;
  if (fs::is_directory(state_dir) && fs::is_directory(truth_bg_dir)) {
    state_paths = list_sequence(state_dir);
    truth_bg_paths = list_sequence(truth_bg_dir);
    if (state_paths.size() != predicted_paths.size() ||
        truth_bg_paths.size() != predicted_paths.size()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "eval: " + std::to_string(state_paths.size()) + " state dumps and " +
                      std::to_string(truth_bg_paths.size()) + " true backgrounds for " +
                      std::to_string(predicted_paths.size()) + " mattes");
    }
  }

  std::ostringstream records;
  const double eps = config.loss.epsilon;
  double sum_mad = 0.0, sum_mse = 0.0, sum_alpha = 0.0, sum_bg = 0.0;
  for (std::size_t i = 0; i < predicted_paths.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    const AlphaMatte predicted = read_matte(predicted_paths[i]);
    const AlphaMatte truth = read_matte(truth_paths[i]);
    const BoundaryWeightMask gamma = boundary_mask(truth, config.loss.gamma_radius);
    const double frame_mad = mad(predicted, truth);
    const double frame_mse = mse(predicted, truth);
    const double frame_alpha = loss_alpha_hr(predicted, truth, gamma, eps);
    json record = {{"frame", t},
                   {"mad_e4", finite_or_nan(frame_mad * kMetricScale)},
                   {"mse_e4", finite_or_nan(frame_mse * kMetricScale)},
                   {"loss_bg", nullptr},
                   {"loss_alpha_hr", finite_or_nan(frame_alpha)}};
    if (!state_paths.empty()) {
      const Frame small = read_frame(state_paths[i], t);
      const Frame truth_bg = read_frame(truth_bg_paths[i], t);
      std::vector<double> up = resize_bilinear(small.samples(), small.width(), small.height(), 3,
                                               truth_bg.width(), truth_bg.height());
      for (double& v : up) v = std::clamp(v, 0.0, 1.0);
      const Frame predicted_bg(t, truth_bg.width(), truth_bg.height(), std::move(up));
      const double frame_bg =
          loss_bg(std::span(&predicted_bg, 1), std::span(&truth_bg, 1), gamma, eps);
      record["loss_bg"] = finite_or_nan(frame_bg);
      sum_bg += frame_bg;
    }
    sum_mad += frame_mad;
    sum_mse += frame_mse;
    sum_alpha += frame_alpha;
    records << record.dump() << "\n";
  }
  const double n = static_cast<double>(predicted_paths.size());
  json aggregate = {{"frame", "all"},
                    {"frames", predicted_paths.size()},
                    {"mad_e4", finite_or_nan(sum_mad / n * kMetricScale)},
                    {"mse_e4", finite_or_nan(sum_mse / n * kMetricScale)},
                    {"loss_bg", state_paths.empty() ? json(nullptr) : json(sum_bg)},
                    {"loss_alpha_hr", finite_or_nan(sum_alpha)}};
  records << aggregate.dump() << "\n";
  out << records.str();
  if (options.output) {
    write_text(*options.output / "eval.jsonl", records.str());
    write_effective_config(config, *options.output);
  }
}

std::string error_line(const Error& error) {
  return "bgmatte-error kind=" + std::string(to_string(error.kind())) + " message=\"" +
         escape(error.what()) + "\"";
}

int run_command(std::string_view name, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "synth") {
      cmd_synth(options, err);
    } else if (name == "matte") {
      cmd_matte(options, err);
    } else if (name == "restore-bg") {
      cmd_restore_bg(options, err);
    } else if (name == "eval") {
      cmd_eval(options, out);
    } else {
      throw Error(ErrorKind::config, "unknown command '" + std::string(name) + "'");
    }
    return 0;
  } catch (const Error& e) {
    err << error_line(e) << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << error_line(Error(ErrorKind::io, e.what())) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "bgmatte-error kind=internal message=\"" << escape(e.what()) << "\"\n";
    return 3;
  }
}

}  // namespace bgmatte
