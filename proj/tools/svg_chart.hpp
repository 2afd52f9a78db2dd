#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wavespeed::cli {

struct Series {
    std::string name;
    std::vector<double> y;
};

/// Minimal self-contained line chart (960x600 viewBox). Non-finite values
/// break the polyline.
void write_line_chart(std::ostream& os, const std::string& title, const std::string& x_label,
                      const std::vector<double>& x, const std::vector<Series>& series);

}  // namespace wavespeed::cli
