#include "seqrpf/table.hpp"

#include <cstdio>
#include <fstream>

#include "seqrpf/common.hpp"

namespace seqrpf {

void Table::add_row(std::initializer_list<double> cells) {
  add_row(std::vector<double>(cells));
}

void Table::add_row(std::vector<double> cells) {
  require(cells.size() == columns.size(), Errc::invalid_spec,
          "row width does not match the declared columns");
  rows.push_back(std::move(cells));
}

std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Errc::config_error, "cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  require(f.good(), Errc::config_error, "short write to " + path);
}

}  // namespace seqrpf
