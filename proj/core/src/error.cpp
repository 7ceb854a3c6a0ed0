#include "ptbcc/error.hpp"

#include <utility>

namespace ptbcc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format: return "format";
    case ErrorKind::Row: return "row";
    case ErrorKind::EmptyInput: return "empty_input";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::Class: return "class";
    case ErrorKind::Hyperparameter: return "hyperparameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Input: return "input";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

namespace {

std::string decorate(std::string_view origin, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(origin);
  if (line) out += ":" + std::to_string(*line);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string origin, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(origin, message, line)),
      message_(message),
      kind_(kind),
      origin_(std::move(origin)),
      line_(line) {}

}  // namespace ptbcc
