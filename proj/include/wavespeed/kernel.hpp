#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wavespeed {

/// Heat kernel (4*pi*alpha)^{-1/2} exp(-s^2 / (4 alpha)).
struct Gaussian {
    double alpha;
};

/// Constant density 1/(2a) on [-a, a].
struct Uniform {
    double a;
};

/// Mass 1/2 at each of s = -a and s = +a. Atoms have no pointwise density.
struct TwoPoint {
    double a;
};

/// Point mass at the origin: M(lambda) == 1 and every moment vanishes.
/// This is the alpha -> 0+ limit of the heat kernel (local delayed equation).
struct DiracLimit {};

/// Kernel given by a sampled density, integrated with fixed-node composite
/// Gauss-Legendre on [-S, S]. Node weights already carry the density and are
/// normalized to unit mass and symmetrized, so every moment integral is a
/// plain weighted sum.
struct Tabulated {
    /// Normalized, symmetrized density; zero outside [-half_width, half_width].
    std::function<double(double)> density;
    // nodes are mirror images: nodes[n-1-i] == -nodes[i], same for weights
    std::vector<double> nodes;
    std::vector<double> weights;
    double half_width;
};

struct QuadratureConfig {
    /// Truncation half-width S. Non-positive selects 10 * (1 + sqrt(m2)).
    double half_width = 0.0;
    /// Total node count; rounded up to a whole number of 9-point panels.
    int nodes = 513;
};

/// Symmetric probability kernel K with finite moment-generating functional
/// M(lambda) = \int K(s) e^{lambda s} ds for every real lambda.
///
/// Closed forms are used for Gaussian, Uniform, TwoPoint and DiracLimit;
/// Tabulated kernels go through their quadrature rule. Values are immutable
/// after construction.
class Kernel {
public:
    using Variant = std::variant<Gaussian, Uniform, TwoPoint, DiracLimit, Tabulated>;

    static Kernel gaussian(double alpha);
    static Kernel uniform(double a);
    static Kernel two_point(double a);
    static Kernel dirac();

    /// Discretizes a density on [-S, S]. The density is symmetrized as
    /// (f(s) + f(-s)) / 2 and the weights renormalized to unit mass.
    /// `second_moment_hint` feeds the default half-width when `cfg.half_width`
    /// is not set.
    static Kernel tabulated(const std::function<double(double)>& density,
                            double second_moment_hint,
                            QuadratureConfig cfg = {});

    /// Kernel from density samples (s_i, K(s_i)) on a strictly increasing
    /// grid; piecewise linear between samples and zero outside the grid.
    /// Defaults the half-width to the grid extent max|s_i|.
    static Kernel from_samples(std::span<const double> s,
                               std::span<const double> weight,
                               QuadratureConfig cfg = {});

    /// Quadrature twin of a closed-form kernel with a density (Gaussian or
    /// Uniform). Throws UnsupportedVariant otherwise.
    static Kernel tabulated_twin(const Kernel& closed, QuadratureConfig cfg = {});

    const Variant& variant() const noexcept { return v_; }
    bool is_dirac() const noexcept;
    bool has_density() const noexcept;
    std::string describe() const;

    /// K(s). Throws UnsupportedVariant for DiracLimit and TwoPoint.
    double density(double s) const;
    /// M(lambda). Throws Overflow when the exponent leaves the double range.
    double mgf(double lambda) const;
    /// M'(lambda) = \int s K(s) e^{lambda s} ds.
    double mgf_deriv(double lambda) const;
    /// M''(lambda) = \int s^2 K(s) e^{lambda s} ds.
    double mgf_deriv2(double lambda) const;
    /// \int s^2 K(s) ds == M''(0).
    double second_moment() const;
    /// Half-width outside of which the density is zero or negligible
    /// (below ~1e-16 relative for the Gaussian). Zero for DiracLimit.
    double support_half_width() const;

private:
    explicit Kernel(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

/// Parses `gaussian:alpha=1`, `uniform:a=1`, `twopoint:a=1`, `dirac` or
/// `table:path.csv`. Throws InvalidArgument on malformed specs.
Kernel parse_kernel_spec(std::string_view spec);

/// Reads a two-column `s,weight` CSV (optional header row).
Kernel load_kernel_table(const std::filesystem::path& path, QuadratureConfig cfg = {});

/// Composite Gauss-Legendre rule on [lo, hi] with `panels` panels of
/// `order` points each.
void composite_gauss_legendre(double lo, double hi, int panels, int order,
                              std::vector<double>& nodes,
                              std::vector<double>& weights);

}  // namespace wavespeed
