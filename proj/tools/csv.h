#ifndef VCATE_TOOLS_CSV_H_
#define VCATE_TOOLS_CSV_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace csv {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A header row followed by data rows, all cells kept as text. Quoted fields
// may contain commas, doubled quotes and newlines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number where each data row starts.
  std::vector<int> lines;

  // Index of `name` in the header; throws ParseError if absent.
  int Column(const std::string& name) const;
};

Table Parse(const std::string& text);
Table ReadFile(const std::string& path);

// Parses a finite number; throws ParseError naming line and column.
double ToDouble(const std::string& cell, int line, const std::string& column);

}  // namespace csv

#endif  // VCATE_TOOLS_CSV_H_
