#include "wavespeed/front_sim.hpp"

#include "wavespeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wavespeed {

BirthFunction BirthFunction::nicholson(double p) {
    ModelParams{p, 0.0}.validate();
    return BirthFunction(Nicholson{p});
}

BirthFunction BirthFunction::capped_linear(double p, double u_plus) {
    ModelParams{p, 0.0}.validate();
    if (!(u_plus > 0.0) || !std::isfinite(u_plus)) {
        throw Error(ErrorCode::InvalidArgument, "capped-linear birth needs u_plus > 0");
    }
    return BirthFunction(CappedLinear{p, u_plus});
}

double BirthFunction::operator()(double u) const {
    if (const auto* n = std::get_if<Nicholson>(&v_)) return n->p * u * std::exp(-u);
    const auto& c = std::get<CappedLinear>(v_);
    return c.p * std::min(u, c.u_plus);
}

double BirthFunction::slope_at_zero() const {
    return std::visit([](const auto& b) { return b.p; }, v_);
}

double BirthFunction::equilibrium() const {
    if (const auto* n = std::get_if<Nicholson>(&v_)) return std::log(n->p);
    const auto& c = std::get<CappedLinear>(v_);
    return c.p * c.u_plus;
}

SpeedFit fit_front_speed(std::span<const TracePoint> trace, double fraction) {
    if (trace.empty()) throw Error(ErrorCode::NoConvergence, "empty front trace");
    const double t_start = (1.0 - fraction) * trace.back().t;
    double n = 0, st = 0, sx = 0;
    for (const auto& p : trace) {
        if (p.t < t_start) continue;
        n += 1;
        st += p.t;
        sx += p.x_front;
    }
    if (n < 2) throw Error(ErrorCode::NoConvergence, "fewer than two trace points in the fit window");
    const double tm = st / n, xm = sx / n;
    double stt = 0, stx = 0;
    for (const auto& p : trace) {
        if (p.t < t_start) continue;
        stt += (p.t - tm) * (p.t - tm);
        stx += (p.t - tm) * (p.x_front - xm);
    }
    if (!(stt > 0.0)) throw Error(ErrorCode::NoConvergence, "degenerate fit window");
    const double slope = stx / stt;
    double ss = 0;
    for (const auto& p : trace) {
        if (p.t < t_start) continue;
        const double r = p.x_front - (xm + slope * (p.t - tm));
        ss += r * r;
    }
    return {slope, std::sqrt(ss / n)};
}

FrontSimulator::FrontSimulator(const SimConfig& cfg, const ModelParams& params, const Kernel& k,
                               const BirthFunction& g)
    : cfg_(cfg), g_(g) {
    params.validate();
    if (std::abs(g.slope_at_zero() - params.p) > 1e-12 * params.p) {
        throw Error(ErrorCode::InvalidArgument, "birth function slope g'(0) must equal p");
    }
    if (!(cfg.dx > 0.0) || !(cfg.length > cfg.dx) || !(cfg.t_end > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "simulation needs dx > 0, L > dx, T > 0");
    }
    if (!(cfg.theta_fraction > 0.0 && cfg.theta_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "front threshold fraction must lie in (0, 1)");
    }
    const double stable = 0.45 * cfg.dx * cfg.dx;
    double dt_max = cfg.dt_max > 0.0 ? cfg.dt_max : stable;
    if (dt_max > stable) {
        std::ostringstream os;
        os << "dt = " << dt_max << " violates explicit stability dt <= 0.45 dx^2 = " << stable;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (params.h > 0.0) {
        delay_steps_ = static_cast<std::size_t>(std::ceil(params.h / dt_max - 1e-9));
        dt_ = params.h / static_cast<double>(delay_steps_);
    } else {
        delay_steps_ = 0;
        dt_ = dt_max;
    }

    const std::size_t n = static_cast<std::size_t>(std::llround(cfg.length / cfg.dx)) + 1;

    // discrete kernel
    if (k.is_dirac()) {
        weights_ = {1.0};
    } else if (const auto* tp = std::get_if<TwoPoint>(&k.variant())) {
        const auto j = static_cast<std::size_t>(std::llround(tp->a / cfg.dx));
        weights_.assign(j + 1, 0.0);
        if (j == 0) {
            weights_[0] = 1.0;
        } else {
            weights_[j] = 0.5;
        }
    } else {
        const double S = cfg.kernel_half_width > 0.0 ? cfg.kernel_half_width : k.support_half_width();
        const auto J = static_cast<std::size_t>(std::floor(S / cfg.dx + 1e-9));
        weights_.resize(J + 1);
        double total = 0.0;
        for (std::size_t j = 0; j <= J; ++j) {
            weights_[j] = k.density(static_cast<double>(j) * cfg.dx);
            total += (j == 0 ? 1.0 : 2.0) * weights_[j];
        }
        if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "discretized kernel has zero mass");
        for (double& w : weights_) w /= total;
    }
    if (weights_.size() >= n) {
        throw Error(ErrorCode::InvalidArgument, "kernel support wider than the simulation domain");
    }

    u_.assign(n, 0.0);
    next_.assign(n, 0.0);
    birth_.assign(n, 0.0);
    ring_.assign(delay_steps_ + 1, std::vector<double>(n, 0.0));
    blowup_level_ = 10.0 * g_.equilibrium();

    std::vector<double> u0(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<double>(i) * cfg.dx <= cfg.initial_width) u0[i] = g_.equilibrium();
    }
    reset(u0);
}

void FrontSimulator::reset(std::span<const double> u0) {
    if (u0.size() != u_.size()) throw Error(ErrorCode::InvalidArgument, "initial state has the wrong size");
    std::copy(u0.begin(), u0.end(), u_.begin());
    convolve_birth(u_, ring_[0]);
    for (std::size_t s = 1; s < ring_.size(); ++s) ring_[s] = ring_[0];
    steps_ = 0;
    clamps_ = 0;
}

void FrontSimulator::convolve_birth(std::span<const double> u, std::vector<double>& out) {
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) birth_[i] = g_(u[i]);
    const auto J = weights_.size() - 1;
    const auto last = static_cast<std::ptrdiff_t>(n - 1);
    auto mirror = [last](std::ptrdiff_t k) {
        if (k < 0) return -k;
        if (k > last) return 2 * last - k;
        return k;
    };
    const double* b = birth_.data();
    const double* w = weights_.data();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = w[0] * b[i];
        if (i >= J && i + J < n) {
            for (std::size_t j = 1; j <= J; ++j) acc += w[j] * (b[i - j] + b[i + j]);
        } else {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            for (std::size_t j = 1; j <= J; ++j) {
                const auto jj = static_cast<std::ptrdiff_t>(j);
                acc += w[j] * (b[mirror(ii - jj)] + b[mirror(ii + jj)]);
            }
        }
        out[i] = acc;
    }
}

void FrontSimulator::step() {
    const std::size_t n = u_.size();
    const std::size_t slot = steps_ % ring_.size();
    const std::vector<double>& delayed = ring_[slot];
    const double r = dt_ / (cfg_.dx * cfg_.dx);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? u_[1] : u_[i - 1];
        const double right = i + 1 == n ? u_[n - 2] : u_[i + 1];
        double v = u_[i] + r * (left - 2.0 * u_[i] + right) + dt_ * (delayed[i] - u_[i]);
        if (v < 0.0) {
            v = 0.0;
            ++clamps_;
        } else if (v < 1e-250) {
            v = 0.0;  // keep subnormals out of the leading edge
        }
        next_[i] = v;
        peak = std::max(peak, v);
    }
    if (!(peak <= blowup_level_)) {
        std::ostringstream os;
        os << "simulation unstable at t = " << time() << ": max u = " << peak;
        throw Error(ErrorCode::Instability, os.str());
    }
    u_.swap(next_);
    ++steps_;
    // The slot just read is next needed delay_steps_ steps from now, for u at the new time.
    convolve_birth(u_, ring_[slot]);
}

double FrontSimulator::front_position(double level) const {
    for (std::size_t i = u_.size(); i-- > 0;) {
        if (u_[i] >= level) {
            if (i + 1 == u_.size()) return static_cast<double>(i) * cfg_.dx;
            const double frac = (u_[i] - level) / (u_[i] - u_[i + 1]);
            return (static_cast<double>(i) + frac) * cfg_.dx;
        }
    }
    return -1.0;
}

SimResult run_front(const SimConfig& cfg, const ModelParams& params, const Kernel& k, const BirthFunction& g) {
    FrontSimulator sim(cfg, params, k, g);
    SimResult res;
    res.dt = sim.dt();
    const double level = cfg.theta_fraction * g.equilibrium();
    const double limit = cfg.length - cfg.boundary_margin - static_cast<double>(sim.kernel_weights().size()) * cfg.dx;
    const auto total = static_cast<std::size_t>(std::ceil(cfg.t_end / sim.dt() - 1e-9));
    const auto every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.record_interval / sim.dt())));

    res.trace.push_back({0.0, sim.front_position(level)});
    for (std::size_t s = 1; s <= total; ++s) {
        sim.step();
        if (s % every == 0 || s == total) {
            const double x = sim.front_position(level);
            res.trace.push_back({sim.time(), x});
            if (x >= limit) {
                res.reached_boundary = true;
                break;
            }
        }
    }
    res.t_final = sim.time();
    res.clamp_events = sim.clamp_events();
    const SpeedFit fit = fit_front_speed(res.trace, cfg.fit_fraction);
    res.speed = fit.speed;
    res.fit_residual = fit.rms_residual;
    return res;
}

}  // namespace wavespeed
