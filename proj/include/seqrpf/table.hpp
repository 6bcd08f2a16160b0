#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace seqrpf {

// columnar numeric table; serializes with a single header line and %.17g
// cells so identical runs produce identical bytes
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add_row(std::initializer_list<double> cells);
  void add_row(std::vector<double> cells);
  bool empty() const { return rows.empty(); }
};

std::string format_cell(double v);
std::string to_csv(const Table& t);
void write_text(const std::string& path, const std::string& bytes);

}  // namespace seqrpf
