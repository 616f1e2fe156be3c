#include "dircal/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dircal/csv.hpp"

namespace dircal::diagram {
namespace {

constexpr double kCell = 300.0;
constexpr double kPlot = 240.0;
constexpr double kLeft = 40.0;
constexpr double kTop = 30.0;
constexpr int kColumns = 4;

std::string fx(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string title_of(const metrics::ReliabilityBins& chart,
                     const std::vector<std::string>& class_names) {
  if (chart.mode == metrics::ReliabilityMode::kConfidence) return "confidence";
  const auto j = static_cast<std::size_t>(chart.cls);
  return "class " + (j < class_names.size() ? class_names[j] : std::to_string(chart.cls));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<metrics::ReliabilityBins> reliability_charts(const ProbabilityMatrix& p,
                                                         const LabelVector& y,
                                                         metrics::ReliabilityMode mode, int bins) {
  if (mode == metrics::ReliabilityMode::kConfidence) {
    return {metrics::confidence_reliability(p, y, bins)};
  }
  std::vector<metrics::ReliabilityBins> out;
  for (int j = 0; j < p.classes(); ++j) out.push_back(metrics::classwise_reliability(p, y, j, bins));
  return out;
}

std::string render_svg(const std::vector<metrics::ReliabilityBins>& charts,
                       const std::vector<std::string>& class_names) {
  const int n = static_cast<int>(charts.size());
  const int cols = std::max(1, std::min(n, kColumns));
  const int rows = std::max(1, (n + cols - 1) / cols);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(cols * kCell) << "\" height=\""
    << fx(rows * kCell) << "\" viewBox=\"0 0 " << fx(cols * kCell) << ' ' << fx(rows * kCell)
    << "\">\n";
  s << "<style>.bar{fill:#4c72b0}.gap{fill:#dd8452;fill-opacity:0.6}"
       ".frame{fill:none;stroke:#333}.diag{stroke:#888;stroke-dasharray:4 3}"
       "text{font-family:sans-serif;font-size:12px}</style>\n";
  for (int c = 0; c < n; ++c) {
    const auto& chart = charts[static_cast<std::size_t>(c)];
    const double x0 = (c % cols) * kCell + kLeft;
    const double y0 = (c / cols) * kCell + kTop;
    const double base = y0 + kPlot;
    s << "<g class=\"chart\" data-index=\"" << c << "\">\n";
    s << "<text x=\"" << fx(x0) << "\" y=\"" << fx(y0 - 10) << "\">"
      << escape(title_of(chart, class_names)) << "</text>\n";
    s << "<rect class=\"frame\" x=\"" << fx(x0) << "\" y=\"" << fx(y0) << "\" width=\""
      << fx(kPlot) << "\" height=\"" << fx(kPlot) << "\"/>\n";
    for (std::size_t b = 0; b < chart.bins.size(); ++b) {
      const auto& bin = chart.bins[b];
      if (bin.count == 0) continue;
      const double x = x0 + bin.low * kPlot;
      const double w = (bin.high - bin.low) * kPlot;
      const double h = bin.empirical_frequency * kPlot;
      s << "<rect class=\"bar\" data-bin=\"" << b << "\" data-count=\"" << bin.count
        << "\" x=\"" << fx(x) << "\" y=\"" << fx(base - h) << "\" width=\"" << fx(w)
        << "\" height=\"" << fx(h) << "\"/>\n";
      const double top = std::max(bin.empirical_frequency, bin.mean_predicted);
      const double gap = std::abs(bin.empirical_frequency - bin.mean_predicted);
      s << "<rect class=\"gap\" data-bin=\"" << b << "\" x=\"" << fx(x) << "\" y=\""
        << fx(base - top * kPlot) << "\" width=\"" << fx(w) << "\" height=\""
        << fx(gap * kPlot) << "\"/>\n";
    }
    s << "<line class=\"diag\" x1=\"" << fx(x0) << "\" y1=\"" << fx(base) << "\" x2=\""
      << fx(x0 + kPlot) << "\" y2=\"" << fx(y0) << "\"/>\n";
    s << "<text x=\"" << fx(x0) << "\" y=\"" << fx(base + 16) << "\">0</text>\n";
    s << "<text x=\"" << fx(x0 + kPlot - 8) << "\" y=\"" << fx(base + 16) << "\">1</text>\n";
    s << "<text x=\"" << fx(x0 + kPlot / 2 - 40) << "\" y=\"" << fx(base + 16) << "\">ECE "
      << fx(chart.ece()) << "</text>\n";
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_table(const std::vector<metrics::ReliabilityBins>& charts) {
  std::ostringstream s;
  s << "chart,mode,class,bin,bin_low,bin_high,count,mean_predicted,empirical_frequency\n";
  for (std::size_t c = 0; c < charts.size(); ++c) {
    const auto& chart = charts[c];
    const bool conf = chart.mode == metrics::ReliabilityMode::kConfidence;
    for (std::size_t b = 0; b < chart.bins.size(); ++b) {
      const auto& bin = chart.bins[b];
      s << c << ',' << (conf ? "confidence" : "classwise") << ','
        << (conf ? std::string() : std::to_string(chart.cls)) << ',' << b << ','
        << format_double(bin.low) << ',' << format_double(bin.high) << ',' << bin.count << ','
        << format_double(bin.mean_predicted) << ',' << format_double(bin.empirical_frequency)
        << '\n';
    }
  }
  return s.str();
}

std::filesystem::path table_path(const std::filesystem::path& svg_path) {
  auto out = svg_path;
  out.replace_extension(".bins.csv");
  return out;
}

void write_diagram(const std::vector<metrics::ReliabilityBins>& charts,
                   const std::vector<std::string>& class_names,
                   const std::filesystem::path& svg_path) {
  write_text(svg_path, render_svg(charts, class_names));
  write_text(table_path(svg_path), render_table(charts));
}

}  // namespace dircal::diagram
