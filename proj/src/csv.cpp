#include "hybridfl/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

std::mutex g_audit_mutex;
std::vector<std::string> g_audit;

void record_open(const std::filesystem::path& path) {
  std::lock_guard<std::mutex> lock(g_audit_mutex);
  g_audit.push_back(path.string());
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  record_open(path);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Returns false at EOF. Skips comment lines and strips a trailing '\r'.
bool next_line(std::ifstream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    return true;
  }
  return false;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

namespace file_audit {
void reset() {
  std::lock_guard<std::mutex> lock(g_audit_mutex);
  g_audit.clear();
}
std::vector<std::string> opened() {
  std::lock_guard<std::mutex> lock(g_audit_mutex);
  return g_audit;
}
}  // namespace file_audit

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

double canonical_real(double value) { return std::stod(format_real(value)); }

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::optional<Provenance>& provenance)
    : out_(path, std::ios::binary), width_(header.size()), path_(path.string()) {
  if (!out_) throw Error("cannot open " + path_ + " for writing");
  if (provenance) {
    out_ << "# config_hash=" << provenance->config_hash << ",seed=" << provenance->seed
         << '\n';
  }
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) {
    throw SchemaError(path_ + ": row has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(width_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].find_first_of(",\n") != std::string::npos) {
      throw SchemaError(path_ + ": field contains a separator: " + fields[i]);
    }
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

CsvTable read_csv_table(const std::filesystem::path& path,
                        const std::vector<std::string>& expected_columns) {
  auto in = open_for_read(path);
  CsvTable table;
  table.path = path.string();
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw SchemaError(table.path + ": missing header row");
  const auto header = split_line(line);

  std::set<std::string> have(header.begin(), header.end());
  if (have.size() != header.size()) throw SchemaError(table.path + ": duplicate column names");
  std::vector<std::string> missing, extra;
  for (const auto& c : expected_columns) {
    if (!have.count(c)) missing.push_back(c);
  }
  for (const auto& c : header) {
    if (std::find(expected_columns.begin(), expected_columns.end(), c) ==
        expected_columns.end()) {
      extra.push_back(c);
    }
  }
  if (!missing.empty() || !extra.empty()) {
    throw SchemaError(table.path + ": schema mismatch; missing [" + join(missing) +
                      "], extra [" + join(extra) + "]");
  }
  std::vector<std::size_t> source_index;
  for (const auto& c : expected_columns) {
    source_index.push_back(static_cast<std::size_t>(
        std::find(header.begin(), header.end(), c) - header.begin()));
  }

  while (next_line(in, line, line_no)) {
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(table.path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    std::vector<std::string> ordered;
    ordered.reserve(source_index.size());
    for (std::size_t idx : source_index) ordered.push_back(std::move(fields[idx]));
    table.rows.push_back(std::move(ordered));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

OpenCsvTable read_csv_open(const std::filesystem::path& path,
                           const std::vector<std::string>& fixed_columns) {
  auto in = open_for_read(path);
  OpenCsvTable table;
  table.path = path.string();
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw SchemaError(table.path + ": missing header row");
  table.header = split_line(line);
  if (table.header.size() < fixed_columns.size() ||
      !std::equal(fixed_columns.begin(), fixed_columns.end(), table.header.begin())) {
    throw SchemaError(table.path + ": header must start with [" + join(fixed_columns) + "]");
  }
  while (next_line(in, line, line_no)) {
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw ParseError(table.path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

double parse_real(std::string_view field, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const std::string s(field);
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line) + ": not a number: '" +
                     std::string(field) + "'");
  }
}

std::int64_t parse_int(std::string_view field, const std::string& path, std::size_t line) {
  std::int64_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line) + ": not an integer: '" +
                     std::string(field) + "'");
  }
  return v;
}

}  // namespace hybridfl
