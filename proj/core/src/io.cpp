#include "bgmatte/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "bgmatte/error.hpp"

namespace fs = std::filesystem;

namespace bgmatte {
namespace {

struct PngMessages {
  std::string error;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngMessages*>(png_get_error_ptr(png));
  if (sink) sink->error = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

fs::path temp_path_for(const fs::path& path) {
  fs::path tmp = path;
  tmp += ".part";
  return tmp;
}

void commit(const fs::path& tmp, const fs::path& path) {
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move " + tmp.string() + " to " + path.string());
  }
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::io, "cannot create directory " + path.parent_path().string());
  }
}

// All C++ objects used after setjmp are declared before it; libpng frames are
// the only ones skipped by the longjmp.
void write_png_file(const fs::path& path, const PngImage& image) {
  PngMessages messages;
  std::vector<png_byte> bytes;
  std::vector<png_bytep> rows;
  const int bytes_per_sample = image.bit_depth / 8;
  const std::size_t row_bytes =
      static_cast<std::size_t>(image.width) * image.channels * bytes_per_sample;
  bytes.resize(row_bytes * image.height);
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    if (bytes_per_sample == 1) {
      bytes[i] = static_cast<png_byte>(image.samples[i]);
    } else {
      bytes[2 * i] = static_cast<png_byte>(image.samples[i] >> 8);
      bytes[2 * i + 1] = static_cast<png_byte>(image.samples[i] & 0xff);
    }
  }
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = bytes.data() + row_bytes * y;

  int color_type = PNG_COLOR_TYPE_GRAY;
  switch (image.channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: throw Error(ErrorKind::contract, "unsupported channel count");
  }

  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &messages, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorKind::io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorKind::io, path.string() + ": " + messages.error);
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, image.width, image.height, image.bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw Error(ErrorKind::io, "error closing " + path.string());
}

std::map<int, fs::path> numbered_pngs(const fs::path& dir) {
  std::map<int, fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() != 10 || name.substr(6) != ".png") continue;
    if (!std::all_of(name.begin(), name.begin() + 6, [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    found.emplace(std::stoi(name.substr(0, 6)), entry.path());
  }
  return found;
}

}  // namespace

std::uint16_t quantize16(double v) {
  return static_cast<std::uint16_t>(std::nearbyint(std::clamp(v, 0.0, 1.0) * 65535.0));
}

std::uint8_t quantize8(double v) {
  return static_cast<std::uint8_t>(std::nearbyint(std::clamp(v, 0.0, 1.0) * 255.0));
}

PngImage read_png(const fs::path& path) {
  PngMessages messages;
  PngImage image;
  std::vector<png_byte> bytes;
  std::vector<png_bytep> rows;

  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw Error(ErrorKind::io, "cannot open " + path.string());
  png_byte signature[8] = {};
  if (std::fread(signature, 1, 8, fp) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    std::fclose(fp);
    throw Error(ErrorKind::format, path.string() + ": not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &messages, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error(ErrorKind::io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error(ErrorKind::io, path.string() + ": " + messages.error);
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  image.channels = png_get_channels(png, info);
  image.bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  bytes.resize(row_bytes * image.height);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = bytes.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  const std::size_t n = static_cast<std::size_t>(image.width) * image.height * image.channels;
  image.samples.resize(n);
  if (image.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      image.samples[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) image.samples[i] = bytes[i];
  }
  (void)depth;
  return image;
}

void write_png(const fs::path& path, const PngImage& image) {
  if (image.width < 1 || image.height < 1) throw Error(ErrorKind::contract, "empty image");
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw Error(ErrorKind::contract, "bit depth must be 8 or 16");
  }
  if (image.samples.size() !=
      static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw Error(ErrorKind::contract, "sample count does not match image size");
  }
  ensure_parent(path);
  const fs::path tmp = temp_path_for(path);
  try {
    write_png_file(tmp, image);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  commit(tmp, path);
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d.png", index);
  return buf;
}

std::vector<fs::path> list_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "not a directory: " + dir.string());
  const auto found = numbered_pngs(dir);
  if (found.empty()) throw Error(ErrorKind::io, "no %06d.png frames in " + dir.string());
  std::vector<fs::path> paths;
  int expected = 1;
  for (const auto& [index, path] : found) {
    if (index != expected) {
      throw Error(ErrorKind::sequence_gap,
                  "missing frame " + frame_filename(expected) + " in " + dir.string());
    }
    paths.push_back(path);
    ++expected;
  }
  return paths;
}

Frame read_frame(const fs::path& path, int index) {
  const PngImage image = read_png(path);
  if (image.channels != 3 || image.bit_depth != 8) {
    throw Error(ErrorKind::format, path.string() + ": expected 8-bit RGB, got " +
                                       std::to_string(image.channels) + " channel(s) at " +
                                       std::to_string(image.bit_depth) + " bits");
  }
  std::vector<double> samples(image.samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = image.samples[i] / 255.0;
  return Frame(index, image.width, image.height, std::move(samples));
}

void write_frame(const Frame& frame, const fs::path& path) {
  PngImage image{frame.width(), frame.height(), 3, 8, {}};
  const auto s = frame.samples();
  image.samples.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) image.samples[i] = quantize8(s[i]);
  write_png(path, image);
}

VideoSequence read_sequence(const fs::path& dir) {
  const auto paths = list_sequence(dir);
  std::vector<Frame> frames;
  frames.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    frames.push_back(read_frame(paths[i], static_cast<int>(i) + 1));
  }
  return VideoSequence(std::move(frames));
}

void write_matte(const AlphaMatte& matte, const fs::path& path) {
  PngImage image{matte.width(), matte.height(), 1, 16, {}};
  const auto v = matte.values();
  image.samples.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) image.samples[i] = quantize16(v[i]);
  write_png(path, image);
}

AlphaMatte read_matte(const fs::path& path) {
  const PngImage image = read_png(path);
  if (image.channels != 1) {
    throw Error(ErrorKind::format, path.string() + ": expected a grayscale matte, got " +
                                       std::to_string(image.channels) + " channels");
  }
  const double scale = image.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> values(image.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = image.samples[i] / scale;
  return AlphaMatte(image.width, image.height, std::move(values));
}

std::vector<AlphaMatte> read_matte_sequence(const fs::path& dir) {
  std::vector<AlphaMatte> mattes;
  for (const auto& path : list_sequence(dir)) mattes.push_back(read_matte(path));
  return mattes;
}

SemanticMap read_semantic(const fs::path& path) {
  const AlphaMatte m = read_matte(path);
  return SemanticMap(m.width(), m.height(), std::vector<double>(m.values().begin(), m.values().end()));
}

void write_mask(const Mask& mask, const fs::path& path) {
  PngImage image{mask.width, mask.height, 1, 8, {}};
  image.samples.resize(mask.values.size());
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    image.samples[i] = mask.values[i] ? 255 : 0;
  }
  write_png(path, image);
}

void write_state(const BackgroundState& state, const fs::path& dir, int t) {
  const RenderedBackground rendered = render_background(state, t);
  write_frame(rendered.frame, dir / "bgF" / frame_filename(t));
  write_mask(rendered.restored, dir / "bgM" / frame_filename(t));
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  const fs::path tmp = temp_path_for(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out.flush()) throw Error(ErrorKind::io, "error writing " + tmp.string());
  }
  commit(tmp, path);
}

}  // namespace bgmatte
