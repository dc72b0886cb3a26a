#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dwcli {

/// Shortest round-trip decimal, locale independent; non-finite values are
/// written as inf, -inf, nan.
std::string fmt(double v);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

/// Line plot, one polyline per series, with labelled axes.
std::string svg_lines(const std::vector<Series>& series, std::string_view x_label, std::string_view y_label,
                      std::string_view title);

/// Heat map of a row-major grid (x fastest). Values are shown on a log10
/// scale; infinite cells are drawn black.
std::string svg_heatmap(const std::vector<double>& values, int nx, int ny, double x0, double x1, double y0,
                        double y1, std::string_view x_label, std::string_view y_label, std::string_view title);

}  // namespace dwcli
