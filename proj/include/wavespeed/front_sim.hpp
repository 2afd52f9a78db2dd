#pragma once

#include "wavespeed/charfun.hpp"
#include "wavespeed/kernel.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace wavespeed {

/// g(u) = p u e^{-u}; positive equilibrium ln p.
struct Nicholson {
    double p;
};

/// g(u) = min(p u, p u_plus); positive equilibrium p u_plus.
struct CappedLinear {
    double p;
    double u_plus;
};

/// Monostable birth function with g(0) = 0, g'(0) = p and g(s) <= p s.
class BirthFunction {
public:
    using Variant = std::variant<Nicholson, CappedLinear>;

    static BirthFunction nicholson(double p);
    static BirthFunction capped_linear(double p, double u_plus);

    double operator()(double u) const;
    double slope_at_zero() const;
    double equilibrium() const;
    const Variant& variant() const noexcept { return v_; }

private:
    explicit BirthFunction(Variant v) : v_(v) {}
    Variant v_;
};

struct SimConfig {
    double length = 400.0;          ///< domain [0, L]
    double dx = 0.1;
    double dt_max = 0.0;            ///< <= 0 selects 0.45 dx^2; snapped so h/dt is an integer
    double t_end = 100.0;
    double theta_fraction = 0.5;    ///< front level as a fraction of the positive equilibrium
    double initial_width = 10.0;    ///< u0 = equilibrium on [0, initial_width], 0 elsewhere
    double kernel_half_width = 0.0; ///< <= 0 selects the kernel's own support half-width
    double record_interval = 0.1;
    double fit_fraction = 0.4;      ///< speed fitted on the final fraction of the trace
    /// Run stops once the front is this close to x = L (plus the kernel half-width).
    double boundary_margin = 5.0;
};

struct TracePoint {
    double t;
    double x_front;
};

struct SpeedFit {
    double speed;
    double rms_residual;
};

struct SimResult {
    std::vector<TracePoint> trace;
    double speed = 0.0;
    double fit_residual = 0.0;
    double reference_c_star = 0.0;  ///< filled in by callers that know c*
    std::size_t clamp_events = 0;
    bool reached_boundary = false;
    double t_final = 0.0;
    double dt = 0.0;
};

/// Least-squares slope of x against t over points with t >= (1 - fraction) t_last.
/// Throws NoConvergence with fewer than two points in the window.
SpeedFit fit_front_speed(std::span<const TracePoint> trace, double fraction);

/// Explicit finite-difference solver for
///   u_t = u_xx - u + (K * g(u(t - h, .)))(x)
/// on [0, L] with Neumann ends (mirror extension, also for the convolution).
///
/// The kernel is discretized as point weights K(j dx) on |j dx| <= S,
/// renormalized to unit sum. Birth terms enter a ring buffer already
/// convolved, one slot per delay step; the history before t = 0 is the
/// initial condition.
class FrontSimulator {
public:
    FrontSimulator(const SimConfig& cfg, const ModelParams& params, const Kernel& k, const BirthFunction& g);

    /// Replaces the state (and the constant-in-time history) with `u0`.
    void reset(std::span<const double> u0);

    /// One explicit Euler step. Negative values are clamped to 0 and counted.
    /// Throws Instability if max u exceeds 10x the equilibrium.
    void step();

    /// Largest x with u >= level, linearly interpolated; negative if none.
    double front_position(double level) const;

    std::span<const double> state() const noexcept { return u_; }
    std::span<const double> kernel_weights() const noexcept { return weights_; }
    double time() const noexcept { return static_cast<double>(steps_) * dt_; }
    double dt() const noexcept { return dt_; }
    std::size_t delay_steps() const noexcept { return delay_steps_; }
    std::size_t clamp_events() const noexcept { return clamps_; }
    std::size_t size() const noexcept { return u_.size(); }

private:
    void convolve_birth(std::span<const double> u, std::vector<double>& out);

    SimConfig cfg_;
    BirthFunction g_;
    double dt_ = 0.0;
    std::size_t delay_steps_ = 0;
    std::vector<double> weights_;  // weights_[j] for offset +-j
    std::vector<double> u_;
    std::vector<double> next_;
    std::vector<double> birth_;
    std::vector<std::vector<double>> ring_;
    std::size_t steps_ = 0;
    std::size_t clamps_ = 0;
    double blowup_level_ = 0.0;
};

/// Evolves the default step initial condition to cfg.t_end and fits the
/// spreading speed. Stops early (reached_boundary) when the front nears x = L.
SimResult run_front(const SimConfig& cfg, const ModelParams& params, const Kernel& k, const BirthFunction& g);

}  // namespace wavespeed
