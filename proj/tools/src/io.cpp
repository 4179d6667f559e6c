#include "eslab_cli/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eslab::cli {
namespace fs = std::filesystem;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

void write_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_atomic(path, doc.dump(2) + "\n");
}

CsvTable::CsvTable(std::string scenario_hash, std::vector<std::string> columns)
    : hash_(std::move(scenario_hash)), columns_(std::move(columns)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::cell(double x) { return cell(std::string_view(format_number(x))); }

CsvTable& CsvTable::cell(std::size_t x) { return cell(std::string_view(std::to_string(x))); }

CsvTable& CsvTable::cell(std::string_view text) {
  if (rows_.empty()) row();
  rows_.back().emplace_back(text);
  return *this;
}

CsvTable& CsvTable::empty() { return cell(std::string_view()); }

std::string CsvTable::str() const {
  std::ostringstream os;
  os << "# scenario " << hash_ << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_units(const std::string& name) {
  const auto bracket = name.find('[');
  std::string base = bracket == std::string::npos ? name : name.substr(0, bracket);
  while (!base.empty() && base.back() == ' ') base.pop_back();
  return base;
}

}  // namespace

std::vector<double> read_csv_column(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split(line);
    break;
  }
  std::size_t index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (strip_units(header[i]) == column) index = i;
  }
  if (index == header.size()) {
    throw std::runtime_error(path.string() + ": no column named '" + column + "'");
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split(line);
    if (index >= fields.size() || fields[index].empty()) continue;
    double x = 0.0;
    const std::string& f = fields[index];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      throw std::runtime_error(path.string() + ": bad number '" + f + "'");
    }
    values.push_back(x);
  }
  return values;
}

}  // namespace eslab::cli
