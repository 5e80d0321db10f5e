#pragma once

// Minimal delimited-text support: RFC 4180 style quoting on a single line,
// shortest round-trip number formatting, and strict numeric parsing.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "stressfreq/errors.hpp"

namespace stressfreq::csv {

inline std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_started_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_started_quoted = false;
    } else if (ch == '"' && cur.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw SchemaError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, ptr);
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::optional<double> parse_double(std::string_view text) {
  std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Malformed {
  std::size_t line = 0;
  std::string message;
};

// A header-indexed table. Blank lines are skipped. In lenient mode, data rows
// that cannot be split into the header's field count are collected in
// malformed() instead of aborting the read.
class Table {
 public:
  static Table read(std::istream& in, bool lenient = false) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      std::vector<std::string> fields;
      try {
        fields = split_line(line, line_no);
      } catch (const SchemaError&) {
        if (!lenient || !have_header) throw;
        t.malformed_.push_back({line_no, "unterminated quoted field"});
        continue;
      }
      if (!have_header) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
          auto name = trim(fields[i]);
          if (t.index_.count(name)) throw SchemaError(line_no, "duplicate column '" + name + "'");
          t.index_[name] = i;
          t.header_.push_back(name);
        }
        have_header = true;
        continue;
      }
      if (fields.size() != t.header_.size()) {
        std::string msg = "expected " + std::to_string(t.header_.size()) + " fields, found " +
                          std::to_string(fields.size());
        if (!lenient) throw SchemaError(line_no, msg);
        t.malformed_.push_back({line_no, msg});
        continue;
      }
      t.rows_.push_back({line_no, std::move(fields)});
    }
    if (!have_header) throw SchemaError(0, "missing header row");
    return t;
  }

  bool has(const std::string& column) const { return index_.count(column) != 0; }

  std::size_t column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw SchemaError(1, "missing required column '" + name + "'");
    return it->second;
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<Malformed>& malformed() const { return malformed_; }

 private:
  std::vector<Malformed> malformed_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Row> rows_;
};

inline double require_double(const Row& row, std::size_t col, const char* name) {
  auto v = parse_double(row.fields[col]);
  if (!v) throw SchemaError(row.line, std::string("column '") + name + "': not a number: '" +
                                          row.fields[col] + "'");
  if (!std::isfinite(*v)) throw SchemaError(row.line, std::string("column '") + name + "': non-finite value");
  return *v;
}

template <class Fields>
void write_row(std::ostream& out, const Fields& fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out << ',';
    out << quote(f);
    first = false;
  }
  out << '\n';
}

}  // namespace stressfreq::csv
