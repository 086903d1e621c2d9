#include "sfisep/errors.hpp"

namespace sfisep {

const char* code_word(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::geometry_too_small: return "geometry-too-small";
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::state_error: return "state-error";
    case ErrorCode::training_diverged: return "training-diverged";
    case ErrorCode::undefined_metric: return "undefined-metric";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::unsupported_version: return "unsupported-version";
    case ErrorCode::truncated_model: return "truncated-model";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::unsupported_format: return "unsupported-format";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown-error";
}

}  // namespace sfisep
