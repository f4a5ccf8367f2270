#include "layerscope/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "layerscope/fsio.hpp"

namespace layerscope {

Index Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Index>(i);
  fail(ErrorCode::Validation, "table has no column '" + name + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string encode_csv(const Table& table) {
  require(table.data.cols() == static_cast<Index>(table.columns.size()), ErrorCode::Dimension,
          "csv: header and data widths differ");
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += '\n';
  for (Index r = 0; r < table.data.rows(); ++r) {
    for (Index c = 0; c < table.data.cols(); ++c) {
      if (c) out += ',';
      out += format_number(table.data(r, c));
    }
    out += '\n';
  }
  return out;
}

Table decode_csv(std::string_view text) {
  Table t;
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    ++line_no;

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (line_no == 1) {
      for (auto c : cells) t.columns.emplace_back(c);
      continue;
    }
    require(cells.size() == t.columns.size(), ErrorCode::Validation,
            "csv line " + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size()) + " cells");
    for (auto c : cells) {
      if (c == "nan" || c == "NaN") {
        values.push_back(std::nan(""));
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      require(res.ec == std::errc() && res.ptr == c.data() + c.size(), ErrorCode::Validation,
              "csv line " + std::to_string(line_no) + ": bad number '" + std::string(c) + "'");
      values.push_back(v);
    }
  }
  require(!t.columns.empty(), ErrorCode::Validation, "csv: missing header");
  const Index cols = static_cast<Index>(t.columns.size());
  const Index rows = static_cast<Index>(values.size()) / cols;
  t.data = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows, cols);
  return t;
}

void write_csv(const Table& table, const std::filesystem::path& path) { write_file_atomic(path, encode_csv(table)); }

Table read_csv(const std::filesystem::path& path) { return decode_csv(read_file(path)); }

Table track_table(const Series<double>& times, const Series<double>& values, const std::string& value_name) {
  require(times.size() == values.size(), ErrorCode::Dimension, "track_table: length mismatch");
  Table t;
  t.columns = {"time", value_name};
  t.data.resize(times.size(), 2);
  t.data.col(0) = times;
  t.data.col(1) = values;
  return t;
}

}  // namespace layerscope
