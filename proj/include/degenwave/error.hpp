#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace degenwave {

enum class ErrorKind {
  Domain,
  InvalidWeight,
  ClassificationFailure,
  InvalidExponent,
  Precondition,
  Stability,
  Solver,
  NonConvergence,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the toolkit. The kind is
/// reported verbatim in the CLI's machine-readable error file.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace degenwave
