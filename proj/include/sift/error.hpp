#pragma once

#include <stdexcept>
#include <string>

namespace sift {

enum class ErrorKind {
  invalid_spec,
  invalid_signal,
  undefined_snr,
  undefined_error,
  invalid_profile,
  dimension_mismatch,
  invalid_window,
  invalid_curve,
  invalid_band,
  invalid_config,
  no_curve,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::invalid_signal: return "invalid-signal";
    case ErrorKind::undefined_snr: return "undefined-snr";
    case ErrorKind::undefined_error: return "undefined-error";
    case ErrorKind::invalid_profile: return "invalid-profile";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::invalid_window: return "invalid-window";
    case ErrorKind::invalid_curve: return "invalid-curve";
    case ErrorKind::invalid_band: return "invalid-band";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::no_curve: return "no-curve";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sift
