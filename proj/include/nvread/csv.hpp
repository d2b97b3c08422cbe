#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nvread {

// Minimal CSV with '#'-prefixed "key = value" comment headers. All output
// files in this project share the shape: comments, one column-name row,
// data rows.
void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

struct CsvContent {
  std::map<std::string, std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvContent read_csv(const std::string& path);

}  // namespace nvread
