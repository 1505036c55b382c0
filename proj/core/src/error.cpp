#include "bgmatte/error.hpp"

namespace bgmatte {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::contract: return "contract";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::sequence_gap: return "sequence-gap";
    case ErrorKind::format: return "format";
  }
  return "unknown";
}

}  // namespace bgmatte
