#include "wavespeed/bounds.hpp"

#include "wavespeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wavespeed {

double k1(double p, const Kernel& k) {
    ModelParams{p, 0.0}.validate();
    const double q = std::sqrt((p - 1.0) / (1.0 + 0.5 * p * k.second_moment()));
    return 2.0 * q + p * k.mgf_deriv(q);
}

double k2(double p, const Kernel& k) {
    ModelParams{p, 0.0}.validate();
    const double s = std::sqrt(std::log(p));
    return std::log(p * k.mgf(s)) / s;
}

double lower_add(double p, double h) {
    return 2.0 * std::sqrt((p - 1.0) / (p * (2.0 * h + h * h) + 1.0));
}

SpeedBounds theorem1_bounds(const ModelParams& params, const Kernel& k) {
    params.validate();
    const double p = params.p;
    const double h = params.h;
    const double lnp_sqrt = std::sqrt(std::log(p));
    const double K1 = k1(p, k);
    const double K2 = k2(p, k);
    constexpr double inf = std::numeric_limits<double>::infinity();

    SpeedBounds b;
    b.h = h;
    b.lower_add = lower_add(p, h);
    if (h <= 1.0) {
        b.regime = BoundRegime::ShortDelay;
        b.lower_log = 2.0 * lnp_sqrt / (1.0 + h);
        b.upper_k1 = K1 / (1.0 + h);
        b.upper_k2 = h > 0.0 ? K2 / h : inf;
    } else {
        b.regime = BoundRegime::LongDelay;
        b.lower_log = lnp_sqrt / h;
        b.upper_k1 = K1 / 2.0;
        b.upper_k2 = K2 / std::sqrt(h);
    }
    b.lower = std::max(b.lower_add, b.lower_log);
    b.upper = std::min(b.upper_k1, b.upper_k2);
    if (h > 0.0) {
        const AdOptimum ad = ad_upper_opt(params, k);
        b.upper_ad_opt = ad.value;
        b.ad_r = ad.r;
    } else {
        b.upper_ad_opt = inf;
        b.ad_r = 0.0;
    }
    return b;
}

double ad_upper(const ModelParams& params, const Kernel& k, double r) {
    params.validate();
    if (!(params.h > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ad bound requires h > 0");
    }
    if (!(r > 0.0 && r < 1.0)) {
        std::ostringstream os;
        os << "ad bound requires r in (0, 1), got " << r;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    return std::log(params.p * k.mgf(r) / (1.0 - r * r)) / (params.h * r);
}

AdOptimum ad_upper_opt(const ModelParams& params, const Kernel& k) {
    constexpr double lo = 1e-6;
    constexpr double hi = 1.0 - 1e-6;
    auto f = [&](double r) { return ad_upper(params, k, r); };

    constexpr int scan = 64;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double r = lo + (hi - lo) * i / scan;
        const double v = f(r);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best - 1) / scan;
    double b = lo + (hi - lo) * std::min(scan, best + 1) / scan;

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double r = 0.5 * (a + b);
    const double v = f(r);
    if (v <= best_val) return {r, v};
    return {lo + (hi - lo) * best / scan, best_val};
}

}  // namespace wavespeed
