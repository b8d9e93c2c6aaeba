#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ctm {

// Minimal CSV table: header row, comma separated, UTF-8, '.' decimal.
// Quoted fields are supported on input; lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // index of a header column, -1 if absent
  std::ptrdiff_t find(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace ctm
