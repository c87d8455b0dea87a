#pragma once

#include <string>
#include <vector>

namespace dclm {

// Minimal self-contained SVG charts (fixed 800x400 canvas). Plots are derived
// conveniences; the CSV files next to them are the tested record.
void svg_bar_chart(const std::string& path, const std::vector<double>& values,
                   const std::string& title);
void svg_line_chart(const std::string& path, const std::vector<double>& xs,
                    const std::vector<double>& ys, const std::string& title);

}  // namespace dclm
