#include "output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dwcli {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

Csv::Csv(std::vector<std::string> header) : columns_(header.size()) { row(header); }

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

namespace {

constexpr double kW = 800.0;
constexpr double kH = 600.0;
constexpr double kMargin = 70.0;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string f2(double v) {
  // Plot coordinates: two decimals are plenty and keep files small.
  const double r = std::round(v * 100.0) / 100.0;
  return fmt(r);
}

struct Frame {
  double x0, x1, y0, y1;
  [[nodiscard]] double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin); }
  [[nodiscard]] double py(double y) const { return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin); }
};

std::string header(std::string_view title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kW) + "\" height=\"" + fmt(kH) +
                  "\" viewBox=\"0 0 " + fmt(kW) + " " + fmt(kH) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kW / 2) + "\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       escape(title) + "</text>\n";
  return s;
}

std::string axes(const Frame& f, std::string_view x_label, std::string_view y_label) {
  std::string s;
  const double left = kMargin, right = kW - kMargin, top = kMargin, bottom = kH - kMargin;
  s += "<rect x=\"" + f2(left) + "\" y=\"" + f2(top) + "\" width=\"" + f2(right - left) + "\" height=\"" +
       f2(bottom - top) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4;
    s += "<text x=\"" + f2(f.px(xv)) + "\" y=\"" + f2(bottom + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(std::round(xv * 1000) / 1000) +
         "</text>\n";
    s += "<text x=\"" + f2(left - 6) + "\" y=\"" + f2(f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(std::round(yv * 1000) / 1000) +
         "</text>\n";
  }
  s += "<text x=\"" + f2(kW / 2) + "\" y=\"" + f2(kH - 20) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + escape(x_label) + "</text>\n";
  s += "<text x=\"20\" y=\"" + f2(kH / 2) + "\" transform=\"rotate(-90 20 " + f2(kH / 2) +
       ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + escape(y_label) + "</text>\n";
  return s;
}

Frame padded(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double dx = 0.03 * (x1 - x0);
  const double dy = 0.03 * (y1 - y0);
  return {x0 - dx, x1 + dx, y0 - dy, y1 + dy};
}

}  // namespace

std::string svg_lines(const std::vector<Series>& series, std::string_view x_label, std::string_view y_label,
                      std::string_view title) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const Frame f = padded(x0, x1, y0, y1);
  std::string out = header(title) + axes(f, x_label, y_label);
  static constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"";
    out += kColors[k % kColors.size()];
    out += "\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (i) out += ' ';
      out += f2(f.px(series[k].x[i])) + "," + f2(f.py(series[k].y[i]));
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string svg_heatmap(const std::vector<double>& values, int nx, int ny, double x0, double x1, double y0,
                        double y1, std::string_view x_label, std::string_view y_label, std::string_view title) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (std::isfinite(v) && v > 0) {
      lo = std::min(lo, std::log10(v));
      hi = std::max(hi, std::log10(v));
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (!(hi > lo)) hi = lo + 1;
  const double cx = nx > 1 ? (x1 - x0) / (nx - 1) : 1.0;
  const double cy = ny > 1 ? (y1 - y0) / (ny - 1) : 1.0;
  const Frame f{x0 - cx / 2, x1 + cx / 2, y0 - cy / 2, y1 + cy / 2};
  std::string out = header(title);
  const double w = (kW - 2 * kMargin) / nx;
  const double h = (kH - 2 * kMargin) / ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double v = values[static_cast<std::size_t>(j) * nx + i];
      std::string color = "#000000";
      if (std::isfinite(v) && v > 0) {
        const double t = (std::log10(v) - lo) / (hi - lo);
        const int r = static_cast<int>(std::lround(255 * t));
        const int b = 255 - r;
        std::array<char, 8> buf{};
        std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", r, 64, b);
        color = buf.data();
      }
      out += "<rect x=\"" + f2(kMargin + i * w) + "\" y=\"" + f2(kH - kMargin - (j + 1) * h) + "\" width=\"" +
             f2(w + 0.5) + "\" height=\"" + f2(h + 0.5) + "\" fill=\"" + color + "\"/>\n";
    }
  }
  out += axes(f, x_label, y_label);
  out += "<text x=\"" + f2(kW - kMargin) + "\" y=\"50\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">log10 range [" + fmt(std::round(lo * 100) / 100) + ", " + fmt(std::round(hi * 100) / 100) +
         "]</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace dwcli
