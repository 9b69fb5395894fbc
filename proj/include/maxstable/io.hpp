#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace maxstable {

// Shortest-round-trip text form used in every data file ("%.17g").
std::string format_number(double v);

// RFC 4180 table: fields with commas, quotes or line breaks are quoted and
// embedded quotes doubled; rows end with CRLF.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> fields);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

  static std::string quote(std::string_view field);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Parses RFC 4180 text (header included) back into rows.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Creates the directory if needed; throws ConfigError when it cannot.
void ensure_directory(const std::filesystem::path& dir);
// Writes the bytes exactly; throws ConfigError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace maxstable
