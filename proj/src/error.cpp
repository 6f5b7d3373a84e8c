#include "latent_ot/error.hpp"

namespace latent_ot {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::UnboundedDual: return "unbounded-dual";
    case ErrorKind::DensityMisconfigured: return "density-misconfigured";
    case ErrorKind::TargetsDisconnected: return "targets-disconnected";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace latent_ot
