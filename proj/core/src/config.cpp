#include "bgmatte/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "bgmatte/error.hpp"

namespace bgmatte {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

struct Location {
  std::string_view source;
  int line;
};

[[noreturn]] void parse_failure(const Location& at, std::string_view key, const std::string& msg) {
  throw Error(ErrorKind::parse, std::string(at.source) + ":" + std::to_string(at.line) + ": " +
                                    std::string(key) + ": " + msg);
}

double parse_double(const std::string& raw, const Location& at, std::string_view key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || ptr != raw.data() + raw.size() || !std::isfinite(v)) {
    parse_failure(at, key, "expected a number, got '" + raw + "'");
  }
  return v;
}

long long parse_integer(const std::string& raw, const Location& at, std::string_view key) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || ptr != raw.data() + raw.size()) {
    parse_failure(at, key, "expected an integer, got '" + raw + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& raw, const Location& at, std::string_view key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || ptr != raw.data() + raw.size()) {
    parse_failure(at, key, "expected a non-negative integer, got '" + raw + "'");
  }
  return v;
}

bool parse_bool(const std::string& raw, const Location& at, std::string_view key) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  parse_failure(at, key, "expected true or false, got '" + raw + "'");
}

std::string parse_string(const std::string& raw, const Location& at, std::string_view key) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    parse_failure(at, key, "expected a quoted string, got '" + raw + "'");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\\') {
      if (i + 2 >= raw.size()) parse_failure(at, key, "dangling escape");
      c = raw[++i];
    } else if (c == '"') {
      parse_failure(at, key, "unescaped quote inside string");
    }
    out += c;
  }
  return out;
}

struct Range {
  double lo;
  double hi;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double v) const {
    return (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  }
  std::string describe() const {
    return std::string(lo_open ? "(" : "[") + format_double(lo) + ", " + format_double(hi) +
           (hi_open ? ")" : "]");
  }
};

[[noreturn]] void range_failure(std::string_view key, const std::string& value, const Range& r) {
  throw Error(ErrorKind::config,
              std::string(key) + " = " + value + " is outside " + r.describe());
}

struct Field {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&, const Location&)> parse;
  std::function<std::string(const PipelineConfig&)> format;
  std::function<void(const PipelineConfig&)> check;
};

template <typename Get>
Field real(std::string key, Get get, Range range) {
  Field f;
  f.key = key;
  f.parse = [get, key](PipelineConfig& c, const std::string& raw, const Location& at) {
    get(c) = parse_double(raw, at, key);
  };
  f.format = [get](const PipelineConfig& c) {
    return format_double(get(const_cast<PipelineConfig&>(c)));
  };
  f.check = [get, key, range](const PipelineConfig& c) {
    const double v = get(const_cast<PipelineConfig&>(c));
    if (!std::isfinite(v) || !range.contains(v)) range_failure(key, format_double(v), range);
  };
  return f;
}

template <typename Get>
Field integer(std::string key, Get get, long long lo, long long hi) {
  Field f;
  f.key = key;
  f.parse = [get, key](PipelineConfig& c, const std::string& raw, const Location& at) {
    const long long v = parse_integer(raw, at, key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw Error(ErrorKind::config, key + " = " + raw + " does not fit an int");
    }
    get(c) = static_cast<int>(v);
  };
  f.format = [get](const PipelineConfig& c) {
    return std::to_string(get(const_cast<PipelineConfig&>(c)));
  };
  f.check = [get, key, lo, hi](const PipelineConfig& c) {
    const long long v = get(const_cast<PipelineConfig&>(c));
    if (v < lo || v > hi) {
      range_failure(key, std::to_string(v),
                    Range{static_cast<double>(lo), static_cast<double>(hi)});
    }
  };
  return f;
}

template <typename Get>
Field boolean(std::string key, Get get) {
  Field f;
  f.key = key;
  f.parse = [get, key](PipelineConfig& c, const std::string& raw, const Location& at) {
    get(c) = parse_bool(raw, at, key);
  };
  f.format = [get](const PipelineConfig& c) {
    return std::string(get(const_cast<PipelineConfig&>(c)) ? "true" : "false");
  };
  f.check = [](const PipelineConfig&) {};
  return f;
}

template <typename Get>
Field text(std::string key, Get get) {
  Field f;
  f.key = key;
  f.parse = [get, key](PipelineConfig& c, const std::string& raw, const Location& at) {
    get(c) = parse_string(raw, at, key);
  };
  f.format = [get](const PipelineConfig& c) { return quote(get(const_cast<PipelineConfig&>(c))); };
  f.check = [](const PipelineConfig&) {};
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    const Range unit{0.0, 1.0};
    const Range weight{0.0, 100.0};

    Field predictor = text("predictor", [](PipelineConfig& c) -> std::string& { return c.predictor; });
    predictor.check = [](const PipelineConfig& c) {
      if (!has_predictor(c.predictor)) {
        throw Error(ErrorKind::config, "predictor = \"" + c.predictor + "\" is not registered");
      }
    };
    t.push_back(predictor);

    t.push_back(real("semantic.theta",
                     [](PipelineConfig& c) -> double& { return c.classical.semantic.theta; }, unit));
    t.push_back(real("semantic.sigma",
                     [](PipelineConfig& c) -> double& { return c.classical.semantic.sigma; },
                     Range{0.0, 1.0, true, false}));
    t.push_back(real("semantic.initial",
                     [](PipelineConfig& c) -> double& { return c.classical.semantic.initial; },
                     unit));

    t.push_back(real("band.lo", [](PipelineConfig& c) -> double& { return c.classical.band.lo; },
                     Range{0.0, 1.0, false, true}));
    t.push_back(real("band.hi", [](PipelineConfig& c) -> double& { return c.classical.band.hi; },
                     Range{0.0, 1.0, true, false}));
    t.push_back(integer("band.radius",
                        [](PipelineConfig& c) -> int& { return c.classical.band.radius; }, 0, 64));

    t.push_back(real("detail.confident",
                     [](PipelineConfig& c) -> double& { return c.classical.detail.confident; },
                     Range{0.5, 1.0}));
    t.push_back(real("detail.delta",
                     [](PipelineConfig& c) -> double& { return c.classical.detail.delta; },
                     Range{0.0, 1.0, true, false}));

    t.push_back(real("prm.xi", [](PipelineConfig& c) -> double& { return c.prm.xi; }, unit));
    t.push_back(real("prm.cap", [](PipelineConfig& c) -> double& { return c.prm.cap; }, unit));
    t.push_back(integer("prm.halo", [](PipelineConfig& c) -> int& { return c.prm.halo; }, 0, 256));
    t.push_back(
        integer("prm.force_k", [](PipelineConfig& c) -> int& { return c.prm.force_k; }, 0, 256));
    t.push_back(real("prm.w_transition",
                     [](PipelineConfig& c) -> double& { return c.prm.w_transition; }, weight));
    t.push_back(real("prm.w_gradient",
                     [](PipelineConfig& c) -> double& { return c.prm.w_gradient; }, weight));

    t.push_back(boolean("ofd.enabled", [](PipelineConfig& c) -> bool& { return c.ofd.enabled; }));
    t.push_back(real("ofd.close_tol",
                     [](PipelineConfig& c) -> double& { return c.ofd.params.close_tol; }, unit));
    t.push_back(real("ofd.flicker_tol",
                     [](PipelineConfig& c) -> double& { return c.ofd.params.flicker_tol; }, unit));

    t.push_back(real("loss.epsilon", [](PipelineConfig& c) -> double& { return c.loss.epsilon; },
                     Range{0.0, 1.0, true, false}));
    t.push_back(integer("loss.gamma_radius",
                        [](PipelineConfig& c) -> int& { return c.loss.gamma_radius; }, 1, 64));

    t.push_back(
        integer("synth.width", [](PipelineConfig& c) -> int& { return c.synth.width; }, 4, 16384));
    t.push_back(integer("synth.height", [](PipelineConfig& c) -> int& { return c.synth.height; },
                        4, 16384));
    t.push_back(integer("synth.clip_length",
                        [](PipelineConfig& c) -> int& { return c.synth.clip_length; }, 1, 100000));
    {
      Field seed;
      seed.key = "synth.seed";
      seed.parse = [](PipelineConfig& c, const std::string& raw, const Location& at) {
        c.synth.seed = parse_unsigned(raw, at, "synth.seed");
      };
      seed.format = [](const PipelineConfig& c) { return std::to_string(c.synth.seed); };
      seed.check = [](const PipelineConfig&) {};
      t.push_back(seed);
    }
    t.push_back(
        integer("synth.margin", [](PipelineConfig& c) -> int& { return c.synth.margin; }, 0, 4096));
    t.push_back(integer("synth.backgrounds",
                        [](PipelineConfig& c) -> int& { return c.synth.backgrounds; }, 1, 1000));
    const Range drift{-64.0, 64.0};
    t.push_back(real("synth.drift_x",
                     [](PipelineConfig& c) -> double& { return c.synth.motion.drift_x; }, drift));
    t.push_back(real("synth.drift_y",
                     [](PipelineConfig& c) -> double& { return c.synth.motion.drift_y; }, drift));
    t.push_back(real("synth.jitter_translation",
                     [](PipelineConfig& c) -> double& { return c.synth.motion.jitter_translation; },
                     Range{0.0, 64.0}));
    t.push_back(real("synth.jitter_rotation",
                     [](PipelineConfig& c) -> double& { return c.synth.motion.jitter_rotation; },
                     Range{0.0, 0.5}));
    t.push_back(real("synth.jitter_scale",
                     [](PipelineConfig& c) -> double& { return c.synth.motion.jitter_scale; },
                     Range{0.0, 0.5}));
    t.push_back(real("synth.portrait_radius",
                     [](PipelineConfig& c) -> double& { return c.synth.portrait_radius; },
                     Range{0.0, 1.0}));
    t.push_back(real("synth.feather", [](PipelineConfig& c) -> double& { return c.synth.feather; },
                     Range{2.0, 256.0}));
    const Range position{-4.0, 4.0};
    t.push_back(real("synth.start_x", [](PipelineConfig& c) -> double& { return c.synth.start_x; },
                     position));
    t.push_back(real("synth.start_y", [](PipelineConfig& c) -> double& { return c.synth.start_y; },
                     position));
    t.push_back(real("synth.speed_x", [](PipelineConfig& c) -> double& { return c.synth.speed_x; },
                     Range{-1.0, 1.0}));
    t.push_back(real("synth.speed_y", [](PipelineConfig& c) -> double& { return c.synth.speed_y; },
                     Range{-1.0, 1.0}));
    t.push_back(boolean("synth.body", [](PipelineConfig& c) -> bool& { return c.synth.body; }));

    t.push_back(text("io.input", [](PipelineConfig& c) -> std::string& { return c.io.input; }));
    t.push_back(text("io.output", [](PipelineConfig& c) -> std::string& { return c.io.output; }));
    return t;
  }();
  return table;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Drops a trailing '#' comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted && c == '\\') {
      ++i;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (c == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

void validate(const PipelineConfig& config) {
  for (const Field& f : fields()) f.check(config);
  if (!(config.classical.band.lo < config.classical.band.hi)) {
    throw Error(ErrorKind::config, "band.lo = " + format_double(config.classical.band.lo) +
                                       " must be below band.hi = " +
                                       format_double(config.classical.band.hi));
  }
}

PipelineConfig parse_config(std::string_view text, std::string_view source) {
  PipelineConfig config;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw_line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const Location at{source, line_no};
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::parse, std::string(source) + ":" + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) {
      throw Error(ErrorKind::config, std::string(source) + ":" + std::to_string(line_no) +
                                         ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw Error(ErrorKind::config, std::string(source) + ":" + std::to_string(line_no) +
                                         ": duplicate key '" + key + "'");
    }
    it->parse(config, value, at);
    if (end == text.size()) break;
  }
  validate(config);
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string save_config(const PipelineConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.format(config) + "\n";
  return out;
}

SynthConfig make_synth_config(const SynthSettings& s) {
  SynthConfig c;
  c.width = s.width;
  c.height = s.height;
  c.clip_length = s.clip_length;
  c.seed = s.seed;
  c.margin = s.margin;
  c.motion = s.motion;
  if (s.portrait_radius > 0.0) {
    c.shapes = walk_in_portrait(s.width, s.height, s.start_x, s.start_y, s.speed_x, s.speed_y,
                                s.portrait_radius, s.feather, s.body);
  }
  return c;
}

RefineParams make_refine_params(const PipelineConfig& config, int threads) {
  RefineParams p;
  p.halo = config.prm.halo;
  p.detail = config.classical.detail;
  p.band = config.classical.band;
  p.threads = threads;
  return p;
}

FlawParams make_flaw_params(const PipelineConfig& config) {
  FlawParams p;
  p.w_transition = config.prm.w_transition;
  p.w_gradient = config.prm.w_gradient;
  p.lo = config.classical.band.lo;
  p.hi = config.classical.band.hi;
  return p;
}

}  // namespace bgmatte
