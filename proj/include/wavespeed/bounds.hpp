#pragma once

#include "wavespeed/charfun.hpp"
#include "wavespeed/kernel.hpp"

namespace wavespeed {

enum class BoundRegime { ShortDelay, LongDelay };  // h <= 1 | h >= 1

/// Explicit lower and upper bounds on the minimal speed at one delay.
///
/// Candidates that do not apply are +infinity (upper) or 0 (lower); at h = 0
/// the k2/h candidate is dropped and `upper_ad_opt` is not evaluated.
struct SpeedBounds {
    double h = 0.0;
    double lower_add = 0.0;     ///< 2 sqrt((p-1)/(p(2h+h^2)+1)), every h
    double lower_log = 0.0;     ///< 2 sqrt(ln p)/(1+h) or sqrt(ln p)/h
    double upper_k1 = 0.0;      ///< k1/(1+h) or k1/2
    double upper_k2 = 0.0;      ///< k2/h or k2/sqrt(h)
    double upper_ad_opt = 0.0;  ///< min over r of the ad family (h > 0)
    double ad_r = 0.0;          ///< minimizing r
    double lower = 0.0;         ///< max{lower_add, lower_log}
    double upper = 0.0;         ///< min{upper_k1, upper_k2}
    BoundRegime regime = BoundRegime::ShortDelay;
};

/// k1 = 2q + p M'(q), q = sqrt((p-1)/(1 + (p/2) \int s^2 K)).
double k1(double p, const Kernel& k);

/// k2 = ln(p M(sqrt(ln p))) / sqrt(ln p).
double k2(double p, const Kernel& k);

/// Lower bound valid for every h >= 0.
double lower_add(double p, double h);

/// All bound candidates at `params.h`, including the optimized ad ceiling.
SpeedBounds theorem1_bounds(const ModelParams& params, const Kernel& k);

/// (1/(h r)) ln(p M(r) / (1 - r^2)); requires h > 0 and 0 < r < 1.
double ad_upper(const ModelParams& params, const Kernel& k, double r);

struct AdOptimum {
    double r;
    double value;
};

/// Minimizes ad_upper over r in [1e-6, 1 - 1e-6]: coarse scan, then
/// golden-section refinement around the best scan point.
AdOptimum ad_upper_opt(const ModelParams& params, const Kernel& k);

}  // namespace wavespeed
