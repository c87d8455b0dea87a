#include "dclm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dclm {

namespace {

constexpr double kWidth = 800, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 40;

struct Canvas {
  std::ofstream out;
  explicit Canvas(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot write SVG: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void title(const std::string& text) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << text << "</text>\n";
  }
  void axes() {
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  }
  void label_y(double value, double y) {
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << value
        << "</text>\n";
  }
  ~Canvas() { out << "</svg>\n"; }
};

}  // namespace

void svg_bar_chart(const std::string& path, const std::vector<double>& values,
                   const std::string& title) {
  Canvas c(path);
  c.title(title);
  c.axes();
  if (values.empty()) return;
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  const double zero_y = y_of(0.0);
  c.label_y(hi, y_of(hi));
  c.label_y(lo, y_of(lo));
  c.label_y(0.0, zero_y);
  const double slot = plot_w / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double y = y_of(values[i]);
    const double top = std::min(y, zero_y);
    const double h = std::abs(y - zero_y);
    c.out << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << slot * 0.7 << "\" height=\""
          << h << "\" fill=\"" << (values[i] >= 0 ? "#4878cf" : "#d65f5f") << "\"/>\n";
    c.out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kHeight - kBottom + 14
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << i
          << "</text>\n";
  }
}

void svg_line_chart(const std::string& path, const std::vector<double>& xs,
                    const std::vector<double>& ys, const std::string& title) {
  Canvas c(path);
  c.title(title);
  c.axes();
  if (xs.empty() || xs.size() != ys.size()) return;
  double xlo = *std::min_element(xs.begin(), xs.end());
  double xhi = *std::max_element(xs.begin(), xs.end());
  double ylo = *std::min_element(ys.begin(), ys.end());
  double yhi = *std::max_element(ys.begin(), ys.end());
  if (xhi - xlo < 1e-12) xhi = xlo + 1.0;
  if (yhi - ylo < 1e-12) yhi = ylo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](double v) { return kLeft + (v - xlo) / (xhi - xlo) * plot_w; };
  auto y_of = [&](double v) { return kTop + (yhi - v) / (yhi - ylo) * plot_h; };
  c.label_y(yhi, y_of(yhi));
  c.label_y(ylo, y_of(ylo));
  c.out << "<polyline fill=\"none\" stroke=\"#4878cf\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    c.out << x_of(xs[i]) << ',' << y_of(ys[i]) << ' ';
  }
  c.out << "\"/>\n";
}

}  // namespace dclm
