#include "nvread/csv.hpp"

#include <fstream>
#include <sstream>

#include "nvread/errors.hpp"

namespace nvread {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorClass::io_error, "cannot open " + path + " for writing");
  for (const auto& [k, v] : comments) out << "# " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) fail(ErrorClass::io_error, "failed writing " + path);
}

CsvContent read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorClass::io_error, "cannot open " + path);
  CsvContent content;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, eq;
      if (ls >> key >> eq && eq == "=") {
        std::string value;
        std::getline(ls, value);
        const auto first = value.find_first_not_of(' ');
        content.comments[key] = first == std::string::npos ? "" : value.substr(first);
      }
      continue;
    }
    if (content.columns.empty()) {
      content.columns = split_row(line);
    } else {
      content.rows.push_back(split_row(line));
    }
  }
  return content;
}

}  // namespace nvread
