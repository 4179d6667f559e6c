#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace eslab::cli {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double x);

/// Writes `contents` to a sibling temp file and renames it over `path`, so a
/// reader never sees a partial file. Parent directories are created.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// CSV text: a "# scenario <hash>" comment line, a header row whose column
/// names carry units in brackets, then the rows. Empty cells stay empty.
class CsvTable {
 public:
  CsvTable(std::string scenario_hash, std::vector<std::string> columns);

  CsvTable& row();
  CsvTable& cell(double x);
  CsvTable& cell(std::size_t x);
  CsvTable& cell(std::string_view text);
  CsvTable& empty();

  std::string str() const;

 private:
  std::string hash_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Reads one numeric column from a CSV written by CsvTable (or any CSV with a
/// header row). `column` is matched against the header with units stripped.
std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column);

}  // namespace eslab::cli
