#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace genscore::cli {

// Entry point shared by the executable and the tests. Returns the process
// exit code: 0 ok, 2 invalid input, 3 positivity violation, 4 degenerate
// subset, 5 convergence failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Git blob hash ("blob <size>\0<content>", SHA-1, hex).
std::string git_blob_sha1(std::string_view content);

}  // namespace genscore::cli
