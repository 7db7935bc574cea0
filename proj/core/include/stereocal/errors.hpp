#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "stereocal/types.hpp"

namespace stereocal {

enum class errc {
  invalid_input,        // precondition violation on caller-supplied data
  insufficient_data,    // too few matches for the requested operation
  degenerate_geometry,  // unobservable / rank-deficient configuration
  step_too_large,       // retraction step left the trust region
  data_format,          // malformed input file
  config,               // unusable configuration
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

/// Raised when the normal equations stay singular even after damping
/// escalation. Carries the best estimate reached before the failure so the
/// caller can report it instead of crashing.
class DegenerateGeometryError : public Error {
 public:
  DegenerateGeometryError(ExtrinsicEstimate best, const std::string& what)
      : Error(errc::degenerate_geometry, what), best_estimate(std::move(best)) {}

  ExtrinsicEstimate best_estimate;
};

/// Malformed row/field in a text input; line is 1-based.
class DataFormatError : public Error {
 public:
  DataFormatError(std::size_t line, const std::string& what)
      : Error(errc::data_format, what + " (line " + std::to_string(line) + ")"),
        line(line) {}

  std::size_t line;
};

}  // namespace stereocal
