#pragma once

#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qsnn::csv {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// Renders a table as text with '\n' line endings.
std::string render(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

/// Reads a numeric CSV with a single header line.
Table read(const std::filesystem::path& path);
Table parse(const std::string& text);

}  // namespace qsnn::csv
