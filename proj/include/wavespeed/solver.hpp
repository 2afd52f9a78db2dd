#pragma once

#include "wavespeed/charfun.hpp"
#include "wavespeed/kernel.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace wavespeed {

struct SolverConfig {
    double eps_rel_tol = 1e-12;   ///< relative width of the final eps bracket
    double residual_tol = 1e-9;   ///< required |psi| and |psi_z| at the double root
    int max_bisections = 200;
    double inner_tol = 1e-13;     ///< |psi_z| target of the inner minimization

    void validate() const;
};

/// Double root (z0, eps0) of psi together with the derived speed.
struct CriticalPoint {
    double z0 = 0.0;
    double eps0 = 0.0;
    double w0 = 0.0;      ///< sqrt(eps0) * z0
    double c_star = 0.0;  ///< 1 / sqrt(eps0)
    double residual_psi = 0.0;
    double residual_dz = 0.0;
    double dzz = 0.0;
    double deps = 0.0;
};

struct MinPsi {
    double z;
    double value;
};

/// Minimizer of the strictly convex map z -> psi(z, eps) on z > 0.
///
/// psi_z(0, eps) = -1 - p h < 0, so the minimum is interior. The sign change
/// of psi_z is bracketed by doubling from z = 1, then located with Newton on
/// psi_z, falling back to bisection whenever a step leaves the bracket.
MinPsi min_psi(double eps, const ModelParams& params, const Kernel& k, const SolverConfig& cfg = {});

/// Solves psi = psi_z = 0 by bisection on eps of the increasing map
/// eps -> min_z psi(z, eps). The initial bracket [1/upper^2, 1/lower^2] comes
/// from the explicit speed bounds.
CriticalPoint solve_critical(const ModelParams& params, const Kernel& k, const SolverConfig& cfg = {});

/// Positive root rho0 of 1 + 1/(4 rho) = p exp(-alpha/(4 rho)). For the heat
/// kernel with parameter alpha this is eps0 at delay h = alpha.
double solve_ivp_rho0(double p, double alpha);

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 (c3 != 0), ascending, each
/// polished by Newton on the unscaled polynomial. Repeated roots appear
/// with multiplicity. Throws ComplexRoots when the discriminant shows a
/// complex pair.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

/// Coefficients {c3, c2, c1, c0} of the heat-kernel w0 cubic
///   (w^2 - w/sqrt(eps) - 1)(2 sqrt(eps) alpha w - h) + 1 - 2 sqrt(eps) w.
std::array<double, 4> w0_cubic_coefficients(double eps, double h, double alpha);

/// Leftmost positive root of the heat-kernel w0 cubic.
double cardano_w0(double eps, double h, double alpha);

enum class CurveMethod { Direct, OdeContinuation, CardanoContinuation };

const char* to_string(CurveMethod m) noexcept;

struct CurveSample {
    double h = 0.0;
    double eps0 = 0.0;
    double z0 = 0.0;
    double c_star = 0.0;
    double residual = 0.0;  ///< |psi| at (z0, eps0)
    bool ok = true;
    std::string error;      ///< set when !ok
};

/// Sampled c*(h), ordered by increasing h.
struct SpeedCurve {
    std::vector<CurveSample> samples;
    CurveMethod method = CurveMethod::Direct;
    /// Continuation only: |c*_ode - c*_direct| / c*_direct at the far endpoint.
    double endpoint_rel_error = 0.0;

    bool all_ok() const;
};

/// Right-hand side of the eps0(h) differential equation,
///   eps0'(h) = 2 eps0 G(w0) / (1 + h G(w0)),
/// with w0 from the Cardano cubic for the heat kernel and from the
/// minimizer of psi otherwise.
double eps0_slope(double p, const Kernel& k, double h, double eps, const SolverConfig& cfg = {});

/// Integrates eps0(h) from (h0, eps_init) to h_end with `steps` fixed RK4
/// steps. A step whose stage evaluation fails is retried as two half steps,
/// up to four nested halvings. The far endpoint is cross-checked against
/// solve_critical.
SpeedCurve continue_ode(double p, const Kernel& k, double h0, double eps_init, double h_end, int steps,
                        const SolverConfig& cfg = {});

/// Direct solve at each h in `hs` (must be strictly increasing). Samples may
/// be evaluated in parallel on up to `threads` threads; failures are recorded
/// per sample instead of thrown.
SpeedCurve solve_curve_direct(double p, const Kernel& k, std::span<const double> hs, int threads,
                              const SolverConfig& cfg = {});

/// Continuation sweep on the uniform grid h_min + i (h_max - h_min)/(n-1),
/// taking `substeps` RK4 steps per grid interval. The heat kernel is seeded
/// from rho0 at h = alpha when alpha is a grid point; otherwise the seed is a
/// direct solve at h_min.
SpeedCurve solve_curve_ode(double p, const Kernel& k, double h_min, double h_max, int samples, int substeps,
                           const SolverConfig& cfg = {});

/// Thread cap from WAVESPEED_THREADS, else hardware concurrency (>= 1).
int default_thread_count();

}  // namespace wavespeed
