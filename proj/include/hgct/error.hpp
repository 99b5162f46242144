#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hgct {

enum class ErrorKind {
  DegenerateInput,
  EmptyGraph,
  NoEdges,
  NonFinite,
  NoHypothesis,
  InvalidArgument,
  Config,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the CLI)
/// can react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace hgct
