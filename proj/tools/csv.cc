#include "csv.h"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace csv {

namespace {

std::string Where(int line) { return "line " + std::to_string(line); }

}  // namespace

int Table::Column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw ParseError("column '" + name + "' not found in header");
}

Table Parse(const std::string& text) {
  Table t;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  int line = 1;
  int record_line = 1;
  bool have_header = false;

  auto end_record = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (!have_header) {
        t.header = record;
        have_header = true;
      } else {
        if (record.size() != t.header.size()) {
          throw ParseError(Where(record_line) + ": expected " + std::to_string(t.header.size()) +
                           " fields, found " + std::to_string(record.size()));
        }
        t.rows.push_back(record);
        t.lines.push_back(record_line);
      }
    }
    record.clear();
  };

  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError(Where(line) + ": stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw ParseError(Where(record_line) + ": unterminated quoted field");
  if (!record.empty() || !field.empty()) end_record();
  if (!have_header) throw ParseError("input has no header row");
  return t;
}

Table ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

double ToDouble(const std::string& cell, int line, const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end != nullptr && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(Where(line) + ", column '" + column + "': '" + cell + "' is not a finite number");
  }
  return v;
}

}  // namespace csv
