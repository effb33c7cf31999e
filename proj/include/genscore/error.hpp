#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace genscore {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorCode {
  kInvalidInput = 2,
  kPositivity = 3,
  kDegenerateSubset = 4,
  kConvergence = 5,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string location = {});

  ErrorCode code() const noexcept { return code_; }
  // Where the problem was found: a column, row, unit index list or term name.
  const std::string& location() const noexcept { return location_; }

 private:
  ErrorCode code_;
  std::string location_;
};

}  // namespace genscore
