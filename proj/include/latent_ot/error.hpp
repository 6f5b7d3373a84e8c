#pragma once

#include <stdexcept>
#include <string>

namespace latent_ot {

enum class ErrorKind {
  InvalidParameter,
  InvalidInput,
  UnboundedDual,
  DensityMisconfigured,
  TargetsDisconnected,
  NumericFailure,
  Io,
};

const char* to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so the CLI can map it
// onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace latent_ot
