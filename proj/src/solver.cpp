#include "wavespeed/solver.hpp"

#include "wavespeed/bounds.hpp"
#include "wavespeed/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace wavespeed {

void SolverConfig::validate() const {
    if (!(eps_rel_tol > 0.0) || !(residual_tol > 0.0) || !(inner_tol > 0.0) || max_bisections < 1) {
        throw Error(ErrorCode::InvalidArgument, "solver tolerances must be positive and iteration caps >= 1");
    }
}

MinPsi min_psi(double eps, const ModelParams& params, const Kernel& k, const SolverConfig& cfg) {
    // An evaluation that overflows is dominated by the growing exponential
    // term, which places it to the right of the minimizer.
    auto eval = [&](double z) -> std::optional<PsiEval> {
        try {
            return psi_eval(z, eps, params, k);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Overflow) throw;
            return std::nullopt;
        }
    };

    double lo = 0.0;
    double hi = 1.0;
    for (;;) {
        const auto ev = eval(hi);
        if (!ev || ev->dz > 0.0) break;
        lo = hi;
        hi *= 2.0;
        if (hi > 1e15) {
            std::ostringstream os;
            os << "min_psi: psi_z never turned positive (eps = " << eps << ", p = " << params.p
               << ", h = " << params.h << ", kernel " << k.describe() << ")";
            throw Error(ErrorCode::BracketExpansion, os.str());
        }
    }

    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 2000; ++it) {
        const auto ev = eval(z);
        if (!ev) {
            hi = z;
            z = 0.5 * (lo + hi);
            continue;
        }
        if (std::abs(ev->dz) <= cfg.inner_tol) return {z, ev->value};
        if (ev->dz < 0.0) {
            lo = z;
        } else {
            hi = z;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1e-300, hi)) {
            return {z, ev->value};
        }
        double next = z - ev->dz / ev->dzz;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        z = next;
    }
    throw Error(ErrorCode::NoConvergence, "min_psi: inner minimization did not converge");
}

CriticalPoint solve_critical(const ModelParams& params, const Kernel& k, const SolverConfig& cfg) {
    params.validate();
    cfg.validate();
    const SpeedBounds b = theorem1_bounds(params, k);
    if (!(b.lower > 0.0) || !(b.lower <= b.upper) || !std::isfinite(b.upper)) {
        std::ostringstream os;
        os << "bound window [" << b.lower << ", " << b.upper << "] is not a valid speed bracket";
        throw Error(ErrorCode::BracketInvalid, os.str());
    }
    // The bounds are strict except in the Dirac limit, where both sides can
    // coincide with c*; a relative margin keeps the root inside.
    constexpr double margin = 1e-6;
    double eps_lo = (1.0 - margin) / (b.upper * b.upper);
    double eps_hi = (1.0 + margin) / (b.lower * b.lower);

    auto f = [&](double eps) { return min_psi(eps, params, k, cfg).value; };
    const double f_lo = f(eps_lo);
    const double f_hi = f(eps_hi);
    if (!(f_lo < 0.0) || !(f_hi > 0.0)) {
        std::ostringstream os;
        os << "eps bracket [" << eps_lo << ", " << eps_hi << "] does not straddle the double root: min psi = "
           << f_lo << ", " << f_hi;
        throw Error(ErrorCode::BracketInvalid, os.str());
    }

    int it = 0;
    while (eps_hi - eps_lo > cfg.eps_rel_tol * eps_hi) {
        if (++it > cfg.max_bisections) {
            throw Error(ErrorCode::NoConvergence, "solve_critical: bisection iteration cap reached");
        }
        const double mid = 0.5 * (eps_lo + eps_hi);
        if (f(mid) < 0.0) {
            eps_lo = mid;
        } else {
            eps_hi = mid;
        }
    }

    CriticalPoint cp;
    cp.eps0 = 0.5 * (eps_lo + eps_hi);
    cp.z0 = min_psi(cp.eps0, params, k, cfg).z;
    const PsiEval ev = psi_eval(cp.z0, cp.eps0, params, k);
    cp.w0 = std::sqrt(cp.eps0) * cp.z0;
    cp.c_star = 1.0 / std::sqrt(cp.eps0);
    cp.residual_psi = std::abs(ev.value);
    cp.residual_dz = std::abs(ev.dz);
    cp.dzz = ev.dzz;
    cp.deps = ev.deps;
    if (cp.residual_psi > cfg.residual_tol || cp.residual_dz > cfg.residual_tol) {
        std::ostringstream os;
        os << "solve_critical: residuals |psi| = " << cp.residual_psi << ", |psi_z| = " << cp.residual_dz
           << " exceed " << cfg.residual_tol;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
    return cp;
}

double solve_ivp_rho0(double p, double alpha) {
    ModelParams{p, 0.0}.validate();
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidArgument, "solve_ivp_rho0 requires alpha > 0");
    }
    // x = 1/(4 rho): 1 + x is increasing from 1, p e^{-alpha x} decreasing from p > 1.
    auto f = [&](double x) { return 1.0 + x - p * std::exp(-alpha * x); };
    double lo = 0.0;
    double hi = p - 1.0;  // f(p - 1) = p (1 - e^{-alpha (p-1)}) > 0
    for (int it = 0; it < 2000 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double x = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
    return 1.0 / (4.0 * x);
}

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    if (c3 == 0.0 || !std::isfinite(c3)) {
        throw Error(ErrorCode::DegenerateCubic, "cubic leading coefficient is zero");
    }
    const double a = c2 / c3;
    const double b = c1 / c3;
    const double c = c0 / c3;
    const double Q = (a * a - 3.0 * b) / 9.0;
    const double R = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    const double Q3 = Q * Q * Q;
    const double disc = R * R - Q3;
    const double scale = std::max({R * R, std::abs(Q3), std::numeric_limits<double>::min()});

    std::vector<double> roots;
    if (Q == 0.0 && R == 0.0) {
        roots.assign(3, -a / 3.0);
    } else if (disc <= 1e-12 * scale && Q > 0.0) {
        const double ratio = std::clamp(R / std::sqrt(Q3), -1.0, 1.0);
        const double theta = std::acos(ratio);
        const double m = -2.0 * std::sqrt(Q);
        roots = {m * std::cos(theta / 3.0) - a / 3.0,
                 m * std::cos((theta + 2.0 * std::numbers::pi) / 3.0) - a / 3.0,
                 m * std::cos((theta - 2.0 * std::numbers::pi) / 3.0) - a / 3.0};
    } else {
        std::ostringstream os;
        os << "cubic has a complex-conjugate root pair (R^2 - Q^3 = " << disc << ")";
        throw Error(ErrorCode::ComplexRoots, os.str());
    }

    auto poly = [&](double x) { return ((c3 * x + c2) * x + c1) * x + c0; };
    auto dpoly = [&](double x) { return (3.0 * c3 * x + 2.0 * c2) * x + c1; };
    for (double& x : roots) {
        for (int it = 0; it < 4; ++it) {
            const double px = poly(x);
            const double d = dpoly(x);
            if (px == 0.0 || d == 0.0) break;
            const double next = x - px / d;
            if (!(std::abs(poly(next)) < std::abs(px)) || std::abs(next - x) > 1e-6 * (1.0 + std::abs(x))) break;
            x = next;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::array<double, 4> w0_cubic_coefficients(double eps, double h, double alpha) {
    const double u = std::sqrt(eps);
    return {2.0 * u * alpha, -(h + 2.0 * alpha), h / u - 2.0 * u - 2.0 * alpha * u, 1.0 + h};
}

double cardano_w0(double eps, double h, double alpha) {
    if (!(eps >= kMinEps) || !(h >= 0.0) || !(alpha > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "cardano_w0 requires eps > 0, h >= 0, alpha > 0");
    }
    const auto c = w0_cubic_coefficients(eps, h, alpha);
    if (c[0] < 1e-14) {
        throw Error(ErrorCode::DegenerateCubic, "2 sqrt(eps) alpha below 1e-14; use the generic w0 path");
    }
    const std::vector<double> roots = cubic_real_roots(c[0], c[1], c[2], c[3]);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i] > 0.0) {
            // tangency: two positive roots that coincide
            if (i + 1 < roots.size() && roots[i + 1] - roots[i] <= 1e-12) {
                return 0.5 * (roots[i] + roots[i + 1]);
            }
            return roots[i];
        }
    }
    std::ostringstream os;
    os << "w0 cubic has no positive root at eps = " << eps << ", h = " << h;
    throw Error(ErrorCode::NoPositiveRoot, os.str());
}

const char* to_string(CurveMethod m) noexcept {
    switch (m) {
        case CurveMethod::Direct: return "direct";
        case CurveMethod::OdeContinuation: return "ode-continuation";
        case CurveMethod::CardanoContinuation: return "cardano-continuation";
    }
    return "unknown";
}

bool SpeedCurve::all_ok() const {
    return std::all_of(samples.begin(), samples.end(), [](const CurveSample& s) { return s.ok; });
}

double eps0_slope(double p, const Kernel& k, double h, double eps, const SolverConfig& cfg) {
    double w0 = 0.0;
    if (const auto* g = std::get_if<Gaussian>(&k.variant())) {
        w0 = cardano_w0(eps, h, g->alpha);
    } else {
        w0 = std::sqrt(eps) * min_psi(eps, ModelParams{p, h}, k, cfg).z;
    }
    const double G = G_value(w0, eps);
    const double slope = 2.0 * eps * G / (1.0 + h * G);
    if (!(slope > 0.0) || !std::isfinite(slope)) {
        std::ostringstream os;
        os << "eps0 slope " << slope << " is not positive at h = " << h << ", eps = " << eps;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
    return slope;
}

namespace {

// Round-off can push the last backward stage a hair below h = 0.
double snap_delay(double h) { return h < 0.0 && h > -1e-9 ? 0.0 : h; }

double rk4_step(double p, const Kernel& k, double h, double eps, double dh, const SolverConfig& cfg) {
    h = snap_delay(h);
    const double s1 = eps0_slope(p, k, h, eps, cfg);
    const double s2 = eps0_slope(p, k, snap_delay(h + 0.5 * dh), eps + 0.5 * dh * s1, cfg);
    const double s3 = eps0_slope(p, k, snap_delay(h + 0.5 * dh), eps + 0.5 * dh * s2, cfg);
    const double s4 = eps0_slope(p, k, snap_delay(h + dh), eps + dh * s3, cfg);
    return eps + dh / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
}

double advance(double p, const Kernel& k, double h, double eps, double dh, int depth, const SolverConfig& cfg) {
    try {
        return rk4_step(p, k, h, eps, dh, cfg);
    } catch (const Error& e) {
        if (is_argument_error(e.code())) throw;
        if (depth >= 4) {
            throw Error(ErrorCode::NoConvergence,
                        std::string("continuation step failed after 4 halvings: ") + e.what());
        }
        const double mid = advance(p, k, h, eps, 0.5 * dh, depth + 1, cfg);
        return advance(p, k, h + 0.5 * dh, mid, 0.5 * dh, depth + 1, cfg);
    }
}

CurveSample make_sample(double p, const Kernel& k, double h, double eps, const SolverConfig& cfg) {
    const MinPsi m = min_psi(eps, ModelParams{p, h}, k, cfg);
    CurveSample s;
    s.h = h;
    s.eps0 = eps;
    s.z0 = m.z;
    s.c_star = 1.0 / std::sqrt(eps);
    s.residual = std::abs(m.value);
    return s;
}

}  // namespace

SpeedCurve continue_ode(double p, const Kernel& k, double h0, double eps_init, double h_end, int steps,
                        const SolverConfig& cfg) {
    ModelParams{p, h0}.validate();
    ModelParams{p, h_end}.validate();
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "continue_ode: steps must be >= 1");
    if (!(eps_init >= kMinEps)) throw Error(ErrorCode::InvalidArgument, "continue_ode: eps_init must be positive");

    SpeedCurve curve;
    curve.method = std::holds_alternative<Gaussian>(k.variant()) ? CurveMethod::CardanoContinuation
                                                                : CurveMethod::OdeContinuation;
    CurveSample first = make_sample(p, k, h0, eps_init, cfg);
    const double entry_tol = 100.0 * cfg.residual_tol;
    if (first.residual > entry_tol) {
        std::ostringstream os;
        os << "continue_ode: eps_init = " << eps_init << " is not a double root at h = " << h0
           << " (min psi = " << first.residual << ")";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    curve.samples.push_back(first);
    if (h_end == h0) return curve;

    const double dh = (h_end - h0) / steps;
    double eps = eps_init;
    for (int i = 1; i <= steps; ++i) {
        const double h = h0 + (i - 1) * dh;
        const double next = advance(p, k, h, eps, dh, 0, cfg);
        if (!((next - eps) * dh > 0.0)) {
            throw Error(ErrorCode::NoConvergence, "continue_ode: eps0 failed to move monotonically");
        }
        eps = next;
        const double h_next = i == steps ? h_end : h0 + i * dh;
        curve.samples.push_back(make_sample(p, k, h_next, eps, cfg));
    }
    if (dh < 0.0) std::reverse(curve.samples.begin(), curve.samples.end());

    const CriticalPoint direct = solve_critical(ModelParams{p, h_end}, k, cfg);
    curve.endpoint_rel_error = std::abs(1.0 / std::sqrt(eps) - direct.c_star) / direct.c_star;
    return curve;
}

SpeedCurve solve_curve_direct(double p, const Kernel& k, std::span<const double> hs, int threads,
                              const SolverConfig& cfg) {
    for (std::size_t i = 1; i < hs.size(); ++i) {
        if (!(hs[i] > hs[i - 1])) throw Error(ErrorCode::InvalidArgument, "h samples must be strictly increasing");
    }
    if (!hs.empty()) ModelParams{p, hs.front()}.validate();
    SpeedCurve curve;
    curve.method = CurveMethod::Direct;
    curve.samples.resize(hs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < hs.size(); i = next++) {
            CurveSample& s = curve.samples[i];
            s.h = hs[i];
            try {
                const CriticalPoint cp = solve_critical(ModelParams{p, hs[i]}, k, cfg);
                s.eps0 = cp.eps0;
                s.z0 = cp.z0;
                s.c_star = cp.c_star;
                s.residual = cp.residual_psi;
            } catch (const Error& e) {
                s.ok = false;
                s.error = e.what();
            }
        }
    };

    const int n = std::clamp<int>(threads, 1, static_cast<int>(std::max<std::size_t>(1, hs.size())));
    if (n == 1) {
        worker();
        return curve;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    pool.clear();
    return curve;
}

SpeedCurve solve_curve_ode(double p, const Kernel& k, double h_min, double h_max, int samples, int substeps,
                           const SolverConfig& cfg) {
    if (samples < 1 || substeps < 1 || !(h_max >= h_min)) {
        throw Error(ErrorCode::InvalidArgument, "solve_curve_ode: need samples >= 1, substeps >= 1, h_max >= h_min");
    }
    if (samples == 1 || h_max == h_min) {
        const CriticalPoint cp = solve_critical(ModelParams{p, h_min}, k, cfg);
        SpeedCurve c;
        c.method = std::holds_alternative<Gaussian>(k.variant()) ? CurveMethod::CardanoContinuation
                                                                : CurveMethod::OdeContinuation;
        c.samples.push_back(make_sample(p, k, h_min, cp.eps0, cfg));
        return c;
    }
    std::vector<double> grid(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) grid[i] = h_min + (h_max - h_min) * i / (samples - 1);

    int seed = 0;
    double eps_seed = 0.0;
    const auto* g = std::get_if<Gaussian>(&k.variant());
    if (g != nullptr) {
        for (int i = 0; i < samples; ++i) {
            if (std::abs(grid[i] - g->alpha) <= 1e-12 * std::max(1.0, g->alpha)) {
                seed = i;
                eps_seed = solve_ivp_rho0(p, g->alpha);
                grid[i] = g->alpha;
                break;
            }
        }
    }
    if (eps_seed == 0.0) eps_seed = solve_critical(ModelParams{p, grid[0]}, k, cfg).eps0;

    SpeedCurve out;
    out.method = g != nullptr ? CurveMethod::CardanoContinuation : CurveMethod::OdeContinuation;
    out.samples.resize(grid.size());
    auto take = [&](const SpeedCurve& part, int first_index) {
        for (std::size_t j = 0; j < part.samples.size(); j += static_cast<std::size_t>(substeps)) {
            const std::size_t idx = static_cast<std::size_t>(first_index) + j / static_cast<std::size_t>(substeps);
            out.samples[idx] = part.samples[j];
            out.samples[idx].h = grid[idx];
        }
        out.endpoint_rel_error = std::max(out.endpoint_rel_error, part.endpoint_rel_error);
    };
    if (seed > 0) {
        take(continue_ode(p, k, grid[seed], eps_seed, grid[0], seed * substeps, cfg), 0);
    }
    if (seed < samples - 1) {
        take(continue_ode(p, k, grid[seed], eps_seed, grid.back(), (samples - 1 - seed) * substeps, cfg), seed);
    }
    return out;
}

int default_thread_count() {
    if (const char* env = std::getenv("WAVESPEED_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace wavespeed
