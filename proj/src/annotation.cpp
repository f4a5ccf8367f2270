#include <cstdio>
#include <fstream>
#include <sstream>

#include "layerscope/acoustics.hpp"
#include "layerscope/fsio.hpp"

namespace layerscope {

void AnnotationTier::validate(double max_time) const {
  double last_end = 0.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    const std::string where = "interval " + std::to_string(i + 1);
    require(std::isfinite(iv.start) && std::isfinite(iv.end), ErrorCode::Validation, where + " is not finite");
    require(iv.end > iv.start, ErrorCode::Validation, where + " ends before it starts");
    require(iv.start >= 0.0 && iv.end <= max_time + 1e-9, ErrorCode::Validation,
            where + " lies outside [0, " + std::to_string(max_time) + "]");
    require(iv.start >= last_end - 1e-12, ErrorCode::Validation, where + " overlaps the previous interval");
    last_end = iv.end;
  }
}

AnnotationTier read_tier(const std::filesystem::path& path, std::string source_layer) {
  std::istringstream in(read_file(path));
  AnnotationTier tier;
  tier.source_layer = std::move(source_layer);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    require(tab2 != std::string::npos, ErrorCode::Validation,
            path.string() + ":" + std::to_string(line_no) + ": expected start<TAB>end<TAB>label");
    Interval iv;
    try {
      std::size_t used = 0;
      iv.start = std::stod(line.substr(0, tab1), &used);
      require(used == tab1, ErrorCode::Validation, "trailing characters");
      const std::string end_text = line.substr(tab1 + 1, tab2 - tab1 - 1);
      iv.end = std::stod(end_text, &used);
      require(used == end_text.size(), ErrorCode::Validation, "trailing characters");
    } catch (const std::logic_error&) {
      fail(ErrorCode::Validation, path.string() + ":" + std::to_string(line_no) + ": bad time value");
    }
    iv.label = line.substr(tab2 + 1);
    tier.intervals.push_back(std::move(iv));
  }
  tier.validate();
  return tier;
}

void write_tier(const AnnotationTier& tier, const std::filesystem::path& path) {
  tier.validate();
  std::string out;
  char buf[64];
  for (const auto& iv : tier.intervals) {
    std::snprintf(buf, sizeof buf, "%.9f\t%.9f\t", iv.start, iv.end);
    out += buf;
    out += iv.label;
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace layerscope
