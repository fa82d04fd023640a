#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "softcache/errors.hpp"

// Minimal CSV reading/writing. The on-disk formats here are plain
// comma-separated values with a mandatory header row, no quoting and no
// embedded commas; numbers are written with shortest-round-trip formatting
// so a write/read cycle reproduces the exact same doubles.

namespace softcache {

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, long line_no = 0) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("invalid number '" + std::string(s) + "'", line_no);
  return v;
}

inline long long parse_int(std::string_view s, long line_no = 0) {
  long long v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("invalid integer '" + std::string(s) + "'", line_no);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  // Trim trailing carriage return from files written on other platforms.
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

/// Header-validated CSV reader; throws ParseError with line numbers.
class CsvReader {
 public:
  CsvReader(std::istream& in, const std::vector<std::string>& expected_header,
            std::string source_name = "<stream>")
      : in_(in), source_(std::move(source_name)), width_(expected_header.size()) {
    std::string line;
    if (!std::getline(in_, line))
      throw ParseError(source_ + ": empty file, expected header row", 1);
    ++line_no_;
    auto fields = split_csv_line(line);
    if (fields != expected_header) {
      std::string want;
      for (std::size_t i = 0; i < expected_header.size(); ++i) {
        if (i) want += ',';
        want += expected_header[i];
      }
      throw ParseError(source_ + ": bad header '" + line + "', expected '" + want + "'", 1);
    }
  }

  /// Read the next row into `fields`; false at EOF. Blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_csv_line(line);
      if (fields.size() != width_)
        throw ParseError(source_ + ": expected " + std::to_string(width_) +
                             " fields, got " + std::to_string(fields.size()),
                         line_no_);
      return true;
    }
    return false;
  }

  long line() const { return line_no_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t width_;
  long line_no_ = 0;
};

/// Opens a file for CSV reading, erroring out clearly if it is missing.
class CsvFileReader {
 public:
  CsvFileReader(const std::string& path, const std::vector<std::string>& expected_header)
      : file_(path) {
    if (!file_) throw ConfigError("cannot open '" + path + "'");
    reader_.emplace(file_, expected_header, path);
  }
  bool next(std::vector<std::string>& fields) { return reader_->next(fields); }
  long line() const { return reader_->line(); }

 private:
  std::ifstream file_;
  std::optional<CsvReader> reader_;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace softcache

// Qualified aliases so module namespaces can say csv::format_double etc.
namespace softcache::csv {
using softcache::CsvReader;
using softcache::CsvWriter;
using softcache::format_double;
using softcache::parse_double;
using softcache::parse_int;
}  // namespace softcache::csv
