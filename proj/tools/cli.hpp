#pragma once

#include "wavespeed/bounds.hpp"
#include "wavespeed/kernel.hpp"
#include "wavespeed/solver.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace wavespeed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitArgs = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one invocation; `args` excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed 12-significant-digit rendering used in every CSV.
std::string format_number(double v);

inline constexpr const char* kCurveHeader =
    "h,c_star,lower_add,lower_log,upper_k1,upper_k2,lower_active,upper_active,residual";

/// One CSV row per sample in the `curve` dialect (no header, LF endings).
/// Failed samples leave c_star and residual empty.
void write_curve_rows(std::ostream& os, double p, const Kernel& k, const SpeedCurve& curve);

}  // namespace wavespeed::cli
