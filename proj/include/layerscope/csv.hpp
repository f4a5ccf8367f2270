#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "layerscope/tensor.hpp"

namespace layerscope {

/// Numeric table with a header row. Values are written in shortest
/// round-trip form, so reading a written table reproduces it bit-exactly.
/// NaN is written as "nan".
struct Table {
  std::vector<std::string> columns;
  Eigen::MatrixXd data;  // rows x columns.size()

  Index column(const std::string& name) const;
};

std::string format_number(double v);

std::string encode_csv(const Table& table);
Table decode_csv(std::string_view text);

void write_csv(const Table& table, const std::filesystem::path& path);
Table read_csv(const std::filesystem::path& path);

/// Two-column `time,value` table.
Table track_table(const Series<double>& times, const Series<double>& values, const std::string& value_name = "value");

}  // namespace layerscope
