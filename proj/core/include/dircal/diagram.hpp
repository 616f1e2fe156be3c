#pragma once

// Reliability diagrams as fixed-layout SVG plus a table of the exact bin
// numbers behind them. Output depends only on the inputs, byte for byte.

#include <filesystem>
#include <string>
#include <vector>

#include "dircal/metrics.hpp"

namespace dircal::diagram {

/// One chart in confidence mode, one per class in classwise mode.
std::vector<metrics::ReliabilityBins> reliability_charts(const ProbabilityMatrix& p,
                                                         const LabelVector& y,
                                                         metrics::ReliabilityMode mode,
                                                         int bins = metrics::kDefaultBins);

/// `class_names` titles the classwise charts.
std::string render_svg(const std::vector<metrics::ReliabilityBins>& charts,
                       const std::vector<std::string>& class_names = {});

/// CSV with one row per chart bin.
std::string render_table(const std::vector<metrics::ReliabilityBins>& charts);

/// `diagram.svg` -> `diagram.bins.csv` next to it.
std::filesystem::path table_path(const std::filesystem::path& svg_path);

/// Writes the SVG and its table. InvalidInput when a path is not writable.
void write_diagram(const std::vector<metrics::ReliabilityBins>& charts,
                   const std::vector<std::string>& class_names,
                   const std::filesystem::path& svg_path);

}  // namespace dircal::diagram
