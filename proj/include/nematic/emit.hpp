#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace nematic {

using Json = nlohmann::json;

// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_.size(); }
  // Header line, one line per row, LF endings.
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Keys sorted, two-space indent, floats as format_number (non-finite become
// null), trailing newline.
std::string to_json_text(const Json& j);

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<PlotSeries> series;
};

// Standalone SVG document with one polyline per series, axes and tick labels.
std::string to_svg(const PlotSpec& plot);

// Creates the parent directory; throws ConfigError if the file cannot be written.
void write_text(const std::string& path, const std::string& content);

}  // namespace nematic
