#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ptbcc {

enum class ErrorKind {
  Format,
  Row,
  EmptyInput,
  Duplicate,
  Class,
  Hyperparameter,
  Domain,
  Numeric,
  Input,
  Evaluation,
  Io,
  Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `origin` names the module that
/// raised it; `line` is set for errors tied to a row of an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string origin, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& origin() const noexcept { return origin_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  /// The message without the origin/line prefix carried by what().
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  ErrorKind kind_;
  std::string origin_;
  std::optional<std::size_t> line_;
};

}  // namespace ptbcc
