#include "genscore/cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "genscore/error.hpp"

namespace genscore::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<double> parse_number(std::string_view field) {
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw std::invalid_argument("not a finite number");
  }
  return value;
}

std::string where(std::size_t line, std::string_view column) {
  return "line " + std::to_string(line) + ", column " + std::string(column);
}

}  // namespace

OutcomeMode parse_outcome_mode(std::string_view text) {
  if (text == "auto") return OutcomeMode::kAuto;
  if (text == "continuous") return OutcomeMode::kContinuous;
  if (text == "binary") return OutcomeMode::kBinary;
  throw Error(ErrorCode::kInvalidInput, "unknown outcome kind '" + std::string(text) + "'",
              "--outcome");
}

Dataset parse_dataset_csv(std::string_view text, OutcomeMode mode) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) {
    throw Error(ErrorCode::kInvalidInput, "input is empty", "line 1");
  }

  const std::vector<std::string_view> header = split(lines[0]);
  int col_s = -1, col_a = -1, col_y = -1;
  std::vector<int> covariate_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view h = header[c];
    if (h.empty()) {
      throw Error(ErrorCode::kInvalidInput, "empty column name", where(1, std::to_string(c + 1)));
    }
    int* slot = h == "S" ? &col_s : h == "A" ? &col_a : h == "Y" ? &col_y : nullptr;
    if (slot) {
      if (*slot >= 0) {
        throw Error(ErrorCode::kInvalidInput, "duplicate column", where(1, h));
      }
      *slot = static_cast<int>(c);
    } else {
      covariate_cols.push_back(static_cast<int>(c));
      names.emplace_back(h);
    }
  }
  for (const auto& [col, name] : {std::pair{col_s, "S"}, {col_a, "A"}, {col_y, "Y"}}) {
    if (col < 0) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string("required column '") + name + "' is missing", where(1, name));
    }
  }
  if (covariate_cols.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no covariate columns", "line 1");
  }

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "no data rows", "line 2");
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(covariate_cols.size()));
  Dataset data;
  data.s.resize(n);
  data.a.resize(n);
  data.y.resize(n);

  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const std::vector<std::string_view> fields = split(lines[static_cast<std::size_t>(r) + 1]);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kInvalidInput,
                  "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()),
                  "line " + std::to_string(line_no));
    }
    auto number = [&](int col) -> std::optional<double> {
      try {
        return parse_number(fields[static_cast<std::size_t>(col)]);
      } catch (const std::invalid_argument&) {
        throw Error(ErrorCode::kInvalidInput,
                    "'" + std::string(fields[static_cast<std::size_t>(col)]) +
                        "' is not a finite number",
                    where(line_no, header[static_cast<std::size_t>(col)]));
      }
    };
    const std::optional<double> s = number(col_s);
    if (!s || (*s != 0.0 && *s != 1.0)) {
      throw Error(ErrorCode::kInvalidInput, "S must be 0 or 1", where(line_no, "S"));
    }
    const std::optional<double> a = number(col_a);
    const std::optional<double> y = number(col_y);
    if (*s == 1.0) {
      if (!a || (*a != 0.0 && *a != 1.0)) {
        throw Error(ErrorCode::kInvalidInput, "source row needs A equal to 0 or 1",
                    where(line_no, "A"));
      }
      if (!y) {
        throw Error(ErrorCode::kInvalidInput, "source row needs an outcome",
                    where(line_no, "Y"));
      }
      data.s[r] = 1;
      data.a[r] = static_cast<int>(*a);
      data.y[r] = *y;
    } else {
      if (a) {
        throw Error(ErrorCode::kInvalidInput, "target row must leave A empty",
                    where(line_no, "A"));
      }
      if (y) {
        throw Error(ErrorCode::kInvalidInput, "target row must leave Y empty",
                    where(line_no, "Y"));
      }
      data.s[r] = 0;
      data.a[r] = kMissingTreatment;
      data.y[r] = std::numeric_limits<double>::quiet_NaN();
    }
    for (std::size_t j = 0; j < covariate_cols.size(); ++j) {
      const std::optional<double> v = number(covariate_cols[j]);
      if (!v) {
        throw Error(ErrorCode::kInvalidInput, "missing covariate value",
                    where(line_no, names[j]));
      }
      x(r, static_cast<Eigen::Index>(j)) = *v;
    }
  }

  bool all_binary = true;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (data.s[r] == 1 && data.y[r] != 0.0 && data.y[r] != 1.0) all_binary = false;
  }
  switch (mode) {
    case OutcomeMode::kAuto:
      data.outcome_kind = all_binary ? OutcomeKind::kBinary : OutcomeKind::kContinuous;
      break;
    case OutcomeMode::kContinuous:
      data.outcome_kind = OutcomeKind::kContinuous;
      break;
    case OutcomeMode::kBinary:
      if (!all_binary) {
        throw Error(ErrorCode::kInvalidInput, "binary outcome requested but Y is not 0/1",
                    "column Y");
      }
      data.outcome_kind = OutcomeKind::kBinary;
      break;
  }
  data.x = DesignMatrix(std::move(x));
  data.covariate_names = std::move(names);
  data.validate();
  return data;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kInvalidInput, "cannot open input file", path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Dataset read_dataset_csv(const std::filesystem::path& path, OutcomeMode mode) {
  return parse_dataset_csv(read_file(path), mode);
}

std::string format_dataset_csv(const Dataset& data) {
  std::string out = "S,A,Y";
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    out += ',';
    out += j < static_cast<Eigen::Index>(data.covariate_names.size())
               ? data.covariate_names[static_cast<std::size_t>(j)]
               : "x" + std::to_string(j + 1);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.s[i] == 1) {
      out += fmt::format("1,{},{}", data.a[i], data.y[i]);
    } else {
      out += "0,,";
    }
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
      out += fmt::format(",{}", data.x.values()(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace genscore::cli
