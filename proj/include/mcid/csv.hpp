#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mcid/data.hpp"
#include "mcid/error.hpp"
#include "mcid/format.hpp"

namespace mcid {

struct CsvOptions {
  bool zero_one_labels = false;  // read y in {0,1}, 0 mapped to -1
};

/// A parsed CSV file: header names and numeric rows, each tagged with its
/// 1-based line number in the source.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                         : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline Error line_error(ErrorCode code, std::size_t line, const std::string& msg) {
  return Error(code, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace detail

/// Reads a comma-separated table with a header row. Blank lines are skipped.
/// Every data row must have as many fields as the header, all numeric.
inline CsvTable read_table(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = detail::split_commas(view);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw detail::line_error(ErrorCode::ParseError, lineno, "empty column name");
        table.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw detail::line_error(ErrorCode::ParseError, lineno,
                               "expected " + std::to_string(table.header.size()) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v) {
        throw detail::line_error(ErrorCode::ParseError, lineno,
                                 "column '" + table.header[k] + "' is not a number: '" +
                                     std::string(fields[k]) + "'");
      }
      row.push_back(*v);
    }
    table.rows.push_back(std::move(row));
    table.lines.push_back(lineno);
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "missing header row");
  return table;
}

/// Checks that columns from `first` onward are named z1, z2, ... in order.
inline std::size_t covariate_columns(const CsvTable& table, std::size_t first) {
  for (std::size_t k = first; k < table.header.size(); ++k) {
    const std::string expected = "z" + std::to_string(k - first + 1);
    if (table.header[k] != expected) {
      throw Error(ErrorCode::ParseError, "line 1: expected column '" + expected + "', found '" +
                                             table.header[k] + "'");
    }
  }
  return table.header.size() - first;
}

/// Dataset from a table with header x,y,z1..zp.
inline Dataset dataset_from_table(const CsvTable& table, const CsvOptions& options = {}) {
  if (table.header.size() < 2 || table.header[0] != "x" || table.header[1] != "y") {
    throw Error(ErrorCode::ParseError, "line 1: header must start with x,y");
  }
  const std::size_t p = covariate_columns(table, 2);
  std::vector<LabeledSample> samples;
  samples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const double raw = row[1];
    int y = 0;
    if (options.zero_one_labels) {
      if (raw == 1.0) y = 1;
      else if (raw == 0.0) y = -1;
    } else if (raw == 1.0 || raw == -1.0) {
      y = static_cast<int>(raw);
    }
    if (y == 0) {
      throw detail::line_error(ErrorCode::NonBinaryLabel, table.lines[r],
                               std::string("label must be ") +
                                   (options.zero_one_labels ? "0 or 1" : "-1 or 1") + ", found " +
                                   format_double(raw));
    }
    LabeledSample s{row[0], y, std::vector<double>(row.begin() + 2, row.begin() + 2 + static_cast<std::ptrdiff_t>(p))};
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples));
}

inline Dataset read_dataset(std::istream& in, const CsvOptions& options = {}) {
  return dataset_from_table(read_table(in), options);
}

/// Writes x,y,z1..zp with shortest round-trip numbers, so reading the
/// output back yields an identical dataset.
inline void write_dataset(const Dataset& data, std::ostream& out) {
  const std::size_t p = data.covariate_dim();
  out << "x,y";
  for (std::size_t k = 1; k <= p; ++k) out << ",z" << k;
  out << '\n';
  for (const auto& s : data) {
    out << format_double(s.x) << ',' << s.y;
    for (double v : s.z) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace mcid
