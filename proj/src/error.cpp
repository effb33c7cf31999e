#include "genscore/error.hpp"

#include <utility>

namespace genscore {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid_input";
    case ErrorCode::kPositivity:
      return "positivity_violation";
    case ErrorCode::kDegenerateSubset:
      return "degenerate_subset";
    case ErrorCode::kConvergence:
      return "convergence_failure";
  }
  return "unknown";
}

Error::Error(ErrorCode code, std::string message, std::string location)
    : std::runtime_error(std::move(message)),
      code_(code),
      location_(std::move(location)) {}

}  // namespace genscore
