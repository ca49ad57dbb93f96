#include "sparselab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sparselab/errors.hpp"

namespace sparselab {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

PlotSeries read_plot_series(const std::string& csv, const std::string& x, const std::string& y) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 1, "empty CSV");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, 1, "no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = column(x), yi = column(y);
  PlotSeries s{x, y, {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    double xv, yv;
    if (fields.size() > std::max(xi, yi) && parse_double(fields[xi], xv) && parse_double(fields[yi], yv))
      s.points.emplace_back(xv, yv);
  }
  return s;
}

std::string emit_plot(const PlotSeries& s, int width, int height) {
  if (s.points.empty()) throw DomainError("nothing to plot");
  const double margin = 50.0;
  double xmin = s.points[0].first, xmax = xmin, ymin = s.points[0].second, ymax = ymin;
  for (const auto& [x, y] : s.points) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const double w = width - 2 * margin, h = height - 2 * margin;
  auto px = [&](double x) { return xmax > xmin ? margin + (x - xmin) / (xmax - xmin) * w : margin + w / 2; };
  auto py = [&](double y) { return ymax > ymin ? margin + (ymax - y) / (ymax - ymin) * h : margin + h / 2; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << fmt(margin) << "\" y1=\"" << fmt(margin + h) << "\" x2=\"" << fmt(margin + w) << "\" y2=\""
      << fmt(margin + h) << "\"/>\n";
  out << "<line x1=\"" << fmt(margin) << "\" y1=\"" << fmt(margin) << "\" x2=\"" << fmt(margin) << "\" y2=\""
      << fmt(margin + h) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(margin + h + 15) << "\">" << tick(xmin) << "</text>\n";
  out << "<text x=\"" << fmt(margin + w) << "\" y=\"" << fmt(margin + h + 15) << "\" text-anchor=\"end\">"
      << tick(xmax) << "</text>\n";
  out << "<text x=\"" << fmt(margin - 4) << "\" y=\"" << fmt(margin + h) << "\" text-anchor=\"end\">" << tick(ymin)
      << "</text>\n";
  out << "<text x=\"" << fmt(margin - 4) << "\" y=\"" << fmt(margin + 4) << "\" text-anchor=\"end\">" << tick(ymax)
      << "</text>\n";
  out << "<text x=\"" << fmt(margin + w / 2) << "\" y=\"" << fmt(height - 10.0) << "\" text-anchor=\"middle\">"
      << escape(s.x_label) << "</text>\n";
  out << "<text x=\"12\" y=\"" << fmt(margin + h / 2) << "\" transform=\"rotate(-90 12 " << fmt(margin + h / 2)
      << ")\" text-anchor=\"middle\">" << escape(s.y_label) << "</text>\n";
  out << "</g>\n";
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < s.points.size(); ++i)
    out << (i ? " " : "") << fmt(px(s.points[i].first)) << ',' << fmt(py(s.points[i].second));
  out << "\"/>\n<g fill=\"steelblue\">\n";
  for (const auto& [x, y] : s.points)
    out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"3\"/>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace sparselab
