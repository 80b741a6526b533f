#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hybridfl {

// Written as a leading "# config_hash=...,seed=..." comment line. Readers
// skip lines that start with '#'.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Nine significant digits, shortest form ("%.9g").
std::string format_real(double value);
// Rounds a value to what format_real/parse would reproduce.
double canonical_real(double value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
            const std::optional<Provenance>& provenance = std::nullopt);

  void write_row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t width_;
  std::string path_;
};

// Rows re-ordered into `expected_columns` order, mapped by header name.
struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line per row
  std::string path;
};

// Throws SchemaError listing missing/extra columns and ParseError (with
// the line number) for rows of the wrong width.
CsvTable read_csv_table(const std::filesystem::path& path,
                        const std::vector<std::string>& expected_columns);

// Reads a file whose trailing columns are not fixed: the first
// `fixed_columns.size()` header names must match exactly.
struct OpenCsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string path;
};
OpenCsvTable read_csv_open(const std::filesystem::path& path,
                           const std::vector<std::string>& fixed_columns);

double parse_real(std::string_view field, const std::string& path, std::size_t line);
std::int64_t parse_int(std::string_view field, const std::string& path, std::size_t line);

// Every path opened by the CSV readers is recorded here so tests can audit
// which party files a code path touched.
namespace file_audit {
void reset();
std::vector<std::string> opened();
}  // namespace file_audit

}  // namespace hybridfl
