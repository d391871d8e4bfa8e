#include "rankreg/error.hpp"

#include <sstream>

namespace rankreg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPrice: return "invalid-price";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::DuplicateKey: return "duplicate-key";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::DegenerateBatch: return "degenerate-batch";
    case ErrorKind::InvalidWindow: return "invalid-window";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {
std::string divergence_message(long long iteration, double learning_rate) {
  std::ostringstream os;
  os << "training diverged at iteration " << iteration << " (learning_rate=" << learning_rate << ")";
  return os.str();
}
}  // namespace

DivergenceError::DivergenceError(long long iteration, double learning_rate)
    : Error(ErrorKind::Divergence, divergence_message(iteration, learning_rate)),
      iteration_(iteration),
      learning_rate_(learning_rate) {}

}  // namespace rankreg
