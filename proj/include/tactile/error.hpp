#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tactile {

// Machine-parsable error classes. The CLI prints `error[<kind>]: <message>`
// and maps each kind to an exit code.
enum class ErrorKind {
  Usage,
  Config,
  Shape,
  Io,
  Format,
  Http,
  Quota,
  ImageSize,
  IncompatibleZoom,
  Infeasible,
  Numeric,
  Checkpoint,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Config: return "config";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Http: return "http";
    case ErrorKind::Quota: return "quota";
    case ErrorKind::ImageSize: return "image-size";
    case ErrorKind::IncompatibleZoom: return "incompatible-zoom";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Checkpoint: return "checkpoint";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tactile
