#pragma once

// PNG frame sequences. Frames are 8-bit RGB, mattes 16-bit gray, masks 8-bit
// gray {0,255}. Every file is written under a temporary name and renamed into
// place, so readers never observe a partial image.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bgmatte/brm.hpp"
#include "bgmatte/image.hpp"

namespace bgmatte {

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 gray, 3 RGB, 2/4 with alpha
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

PngImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const PngImage& image);

/// "%06d.png"
std::string frame_filename(int index);

/// Paths of 000001.png .. 00000N.png in `dir`. Throws sequence_gap naming the
/// first missing index, or io when the directory holds no frames.
std::vector<std::filesystem::path> list_sequence(const std::filesystem::path& dir);

/// 8-bit RGB only; samples are divided by 255.
Frame read_frame(const std::filesystem::path& path, int index);
void write_frame(const Frame& frame, const std::filesystem::path& path);

VideoSequence read_sequence(const std::filesystem::path& dir);

/// 16-bit gray, value * 65535 rounded half-to-even. 8-bit gray is read as /255.
void write_matte(const AlphaMatte& matte, const std::filesystem::path& path);
AlphaMatte read_matte(const std::filesystem::path& path);
std::vector<AlphaMatte> read_matte_sequence(const std::filesystem::path& dir);

/// Semantic maps are stored like mattes.
SemanticMap read_semantic(const std::filesystem::path& path);

void write_mask(const Mask& mask, const std::filesystem::path& path);

/// dir/bgF/%06d.png (8-bit RGB of the rendered background) and
/// dir/bgM/%06d.png (8-bit {0,255}).
void write_state(const BackgroundState& state, const std::filesystem::path& dir, int t);

/// Writes `text` atomically.
void write_text(const std::filesystem::path& path, const std::string& text);

std::uint16_t quantize16(double v);
std::uint8_t quantize8(double v);

}  // namespace bgmatte
