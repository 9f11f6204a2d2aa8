#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace qplab::cli {

/// Shortest decimal that round-trips to the same double; "inf", "-inf" and
/// "nan" for non-finite values. Independent of the locale.
std::string format_number(double v);

using Cell = std::variant<double, std::int64_t, std::string>;

/// In-memory CSV table with a header row.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  /// Throws InvalidArgument if the row width differs from the header.
  void add_row(std::vector<Cell> row);

  std::size_t rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// git-style object hash: hex SHA-1 of "blob <size>\0" followed by the text.
std::string config_hash(const std::string& text);

}  // namespace qplab::cli
