#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "genscore/dataset.hpp"

namespace genscore::cli {

enum class OutcomeMode { kAuto, kContinuous, kBinary };

OutcomeMode parse_outcome_mode(std::string_view text);

// Header row with columns S, A, Y (any order) plus numeric covariates.
// A and Y are empty on target rows. Schema problems throw kInvalidInput with
// the file line and column in the location.
Dataset parse_dataset_csv(std::string_view text, OutcomeMode mode);
Dataset read_dataset_csv(const std::filesystem::path& path, OutcomeMode mode);

// Columns S, A, Y, then covariates; shortest round-trip number formatting.
std::string format_dataset_csv(const Dataset& data);

std::string read_file(const std::filesystem::path& path);

}  // namespace genscore::cli
