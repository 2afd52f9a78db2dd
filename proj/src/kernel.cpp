#include "wavespeed/kernel.hpp"

#include "wavespeed/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace wavespeed {

namespace {

// exp() overflows just above 709.78
constexpr double kMaxExponent = 700.0;

void check_exponent(double exponent, const char* what) {
    if (!(exponent <= kMaxExponent)) {
        std::ostringstream os;
        os << "mgf overflow: exponent " << exponent << " in " << what
           << " exceeds " << kMaxExponent << "; shrink the bracket";
        throw Error(ErrorCode::Overflow, os.str());
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// sinh(x)/x and its first two derivatives. The series branch avoids the
// cancellation in the closed forms near x = 0.
struct SincH {
    double f, df, d2f;
};

SincH sinch(double x) {
    const double ax = std::abs(x);
    if (ax < 1.0) {
        // f = sum x^{2k} / (2k+1)!
        double f = 0.0, df = 0.0, d2f = 0.0;
        double fact = 1.0;  // (2k+1)!
        for (int k = 0; k <= 12; ++k) {
            if (k > 0) fact *= (2.0 * k) * (2.0 * k + 1.0);
            const double n = 2.0 * k;
            f += std::pow(x, n) / fact;
            if (k >= 1) df += n * std::pow(x, n - 1) / fact;
            if (k >= 1) d2f += n * (n - 1) * std::pow(x, n - 2) / fact;
        }
        return {f, df, d2f};
    }
    const double sh = std::sinh(x), ch = std::cosh(x);
    return {sh / x, (x * ch - sh) / (x * x), ((x * x + 2.0) * sh - 2.0 * x * ch) / (x * x * x)};
}

Tabulated make_tabulated(std::function<double(double)> raw, double half_width, int node_count) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw Error(ErrorCode::InvalidArgument, "tabulated kernel: half-width must be positive");
    }
    if (node_count < 1) {
        throw Error(ErrorCode::InvalidArgument, "tabulated kernel: node count must be >= 1");
    }
    constexpr int order = 9;
    const int panels = (node_count + order - 1) / order;
    std::vector<double> nodes, weights;
    composite_gauss_legendre(-half_width, half_width, panels, order, nodes, weights);

    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        nodes[n - 1 - i] = -nodes[i];
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;

    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = 0.5 * (raw(nodes[i]) + raw(-nodes[i]));
        if (!(k >= 0.0) || !std::isfinite(k)) {
            throw Error(ErrorCode::InvalidArgument, "tabulated kernel: density must be finite and nonnegative");
        }
        weights[i] *= k;
    }
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = weights[n - 1 - i] = w;
    }
    for (double w : weights) mass += w;
    if (!(mass > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tabulated kernel: zero total mass");
    }
    for (double& w : weights) w /= mass;

    auto density = [raw = std::move(raw), mass, half_width](double s) {
        if (std::abs(s) > half_width) return 0.0;
        return 0.5 * (raw(s) + raw(-s)) / mass;
    };
    return Tabulated{std::move(density), std::move(nodes), std::move(weights), half_width};
}

double require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive and finite");
    }
    return v;
}

}  // namespace

void composite_gauss_legendre(double lo, double hi, int panels, int order,
                              std::vector<double>& nodes,
                              std::vector<double>& weights) {
    // Reference nodes on [-1, 1] by Newton iteration on P_order.
    std::vector<double> x(order), w(order);
    for (int i = 0; i < order; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        x[order - 1 - i] = t;
        w[order - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    nodes.clear();
    weights.clear();
    nodes.reserve(static_cast<std::size_t>(panels) * order);
    weights.reserve(nodes.capacity());
    const double width = (hi - lo) / panels;
    for (int j = 0; j < panels; ++j) {
        const double a = lo + j * width;
        const double mid = a + 0.5 * width;
        for (int i = 0; i < order; ++i) {
            nodes.push_back(mid + 0.5 * width * x[i]);
            weights.push_back(0.5 * width * w[i]);
        }
    }
}

Kernel Kernel::gaussian(double alpha) { return Kernel(Gaussian{require_positive(alpha, "gaussian alpha")}); }
Kernel Kernel::uniform(double a) { return Kernel(Uniform{require_positive(a, "uniform a")}); }

Kernel Kernel::two_point(double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
        throw Error(ErrorCode::InvalidArgument, "twopoint a must be nonnegative and finite");
    }
    return Kernel(TwoPoint{a});
}

Kernel Kernel::dirac() { return Kernel(DiracLimit{}); }

Kernel Kernel::tabulated(const std::function<double(double)>& density,
                         double second_moment_hint, QuadratureConfig cfg) {
    double S = cfg.half_width;
    if (!(S > 0.0)) S = 10.0 * (1.0 + std::sqrt(std::max(0.0, second_moment_hint)));
    return Kernel(make_tabulated(density, S, cfg.nodes));
}

Kernel Kernel::from_samples(std::span<const double> s, std::span<const double> weight,
                            QuadratureConfig cfg) {
    if (s.size() != weight.size() || s.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "kernel table needs at least two (s, weight) rows");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i]) || !(weight[i] >= 0.0) || !std::isfinite(weight[i])) {
            throw Error(ErrorCode::InvalidArgument, "kernel table: nonfinite or negative entry");
        }
        if (i > 0 && !(s[i] > s[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "kernel table: s must be strictly increasing");
        }
    }
    auto grid = std::make_shared<const std::vector<double>>(s.begin(), s.end());
    auto vals = std::make_shared<const std::vector<double>>(weight.begin(), weight.end());
    auto interp = [grid, vals](double x) {
        const auto& g = *grid;
        if (x < g.front() || x > g.back()) return 0.0;
        auto it = std::upper_bound(g.begin(), g.end(), x);
        if (it == g.end()) return vals->back();
        const std::size_t j = static_cast<std::size_t>(it - g.begin());
        const double t = (x - g[j - 1]) / (g[j] - g[j - 1]);
        return (1.0 - t) * (*vals)[j - 1] + t * (*vals)[j];
    };
    double S = cfg.half_width;
    if (!(S > 0.0)) S = std::max(std::abs(s.front()), std::abs(s.back()));
    return Kernel(make_tabulated(interp, S, cfg.nodes));
}

Kernel Kernel::tabulated_twin(const Kernel& closed, QuadratureConfig cfg) {
    if (!closed.has_density() || std::holds_alternative<Tabulated>(closed.v_)) {
        throw Error(ErrorCode::UnsupportedVariant, "tabulated twin needs a closed-form kernel with a density");
    }
    if (const auto* u = std::get_if<Uniform>(&closed.v_)) {
        // Panel edges must land on the jumps at +-a for full GL accuracy.
        if (!(cfg.half_width > 0.0)) cfg.half_width = u->a;
    }
    return tabulated([closed](double s) { return closed.density(s); }, closed.second_moment(), cfg);
}

bool Kernel::is_dirac() const noexcept {
    if (std::holds_alternative<DiracLimit>(v_)) return true;
    if (const auto* t = std::get_if<TwoPoint>(&v_)) return t->a == 0.0;
    return false;
}

bool Kernel::has_density() const noexcept {
    return std::holds_alternative<Gaussian>(v_) || std::holds_alternative<Uniform>(v_) ||
           std::holds_alternative<Tabulated>(v_);
}

std::string Kernel::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Gaussian& g) { os << "gaussian:alpha=" << g.alpha; },
                   [&](const Uniform& u) { os << "uniform:a=" << u.a; },
                   [&](const TwoPoint& t) { os << "twopoint:a=" << t.a; },
                   [&](const DiracLimit&) { os << "dirac"; },
                   [&](const Tabulated& t) {
                       os << "table(S=" << t.half_width << ",nodes=" << t.nodes.size() << ")";
                   },
               },
               v_);
    return os.str();
}

double Kernel::density(double s) const {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                return std::exp(-s * s / (4.0 * g.alpha)) / std::sqrt(4.0 * std::numbers::pi * g.alpha);
            },
            [&](const Uniform& u) { return std::abs(s) <= u.a ? 0.5 / u.a : 0.0; },
            [&](const TwoPoint&) -> double {
                throw Error(ErrorCode::UnsupportedVariant, "twopoint kernel has no pointwise density");
            },
            [&](const DiracLimit&) -> double {
                throw Error(ErrorCode::UnsupportedVariant, "dirac kernel has no pointwise density");
            },
            [&](const Tabulated& t) { return t.density(s); },
        },
        v_);
}

double Kernel::mgf(double lambda) const {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                const double e = g.alpha * lambda * lambda;
                check_exponent(e, "gaussian mgf");
                return std::exp(e);
            },
            [&](const Uniform& u) {
                check_exponent(u.a * std::abs(lambda), "uniform mgf");
                return sinch(u.a * lambda).f;
            },
            [&](const TwoPoint& t) {
                check_exponent(t.a * std::abs(lambda), "twopoint mgf");
                return std::cosh(t.a * lambda);
            },
            [&](const DiracLimit&) { return 1.0; },
            [&](const Tabulated& t) {
                check_exponent(t.half_width * std::abs(lambda), "tabulated mgf");
                double m = 0.0;
                for (std::size_t i = 0; i < t.nodes.size(); ++i) m += t.weights[i] * std::cosh(lambda * t.nodes[i]);
                return m;
            },
        },
        v_);
}

double Kernel::mgf_deriv(double lambda) const {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                const double e = g.alpha * lambda * lambda;
                check_exponent(e, "gaussian mgf'");
                return 2.0 * g.alpha * lambda * std::exp(e);
            },
            [&](const Uniform& u) {
                check_exponent(u.a * std::abs(lambda), "uniform mgf'");
                return u.a * sinch(u.a * lambda).df;
            },
            [&](const TwoPoint& t) {
                check_exponent(t.a * std::abs(lambda), "twopoint mgf'");
                return t.a * std::sinh(t.a * lambda);
            },
            [&](const DiracLimit&) { return 0.0; },
            [&](const Tabulated& t) {
                check_exponent(t.half_width * std::abs(lambda), "tabulated mgf'");
                double m = 0.0;
                for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                    m += t.weights[i] * t.nodes[i] * std::sinh(lambda * t.nodes[i]);
                }
                return m;
            },
        },
        v_);
}

double Kernel::mgf_deriv2(double lambda) const {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                const double e = g.alpha * lambda * lambda;
                check_exponent(e, "gaussian mgf''");
                return (2.0 * g.alpha + 4.0 * g.alpha * g.alpha * lambda * lambda) * std::exp(e);
            },
            [&](const Uniform& u) {
                check_exponent(u.a * std::abs(lambda), "uniform mgf''");
                return u.a * u.a * sinch(u.a * lambda).d2f;
            },
            [&](const TwoPoint& t) {
                check_exponent(t.a * std::abs(lambda), "twopoint mgf''");
                return t.a * t.a * std::cosh(t.a * lambda);
            },
            [&](const DiracLimit&) { return 0.0; },
            [&](const Tabulated& t) {
                check_exponent(t.half_width * std::abs(lambda), "tabulated mgf''");
                double m = 0.0;
                for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                    m += t.weights[i] * t.nodes[i] * t.nodes[i] * std::cosh(lambda * t.nodes[i]);
                }
                return m;
            },
        },
        v_);
}

double Kernel::second_moment() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return 2.0 * g.alpha; },
                          [](const Uniform& u) { return u.a * u.a / 3.0; },
                          [](const TwoPoint& t) { return t.a * t.a; },
                          [](const DiracLimit&) { return 0.0; },
                          [this](const Tabulated&) { return mgf_deriv2(0.0); },
                      },
                      v_);
}

double Kernel::support_half_width() const {
    return std::visit(overloaded{
                          // exp(-s^2/(4 alpha)) < 1e-16 beyond 12 sqrt(alpha)
                          [](const Gaussian& g) { return 12.0 * std::sqrt(g.alpha); },
                          [](const Uniform& u) { return u.a; },
                          [](const TwoPoint& t) { return t.a; },
                          [](const DiracLimit&) { return 0.0; },
                          [](const Tabulated& t) { return t.half_width; },
                      },
                      v_);
}

namespace {

double parse_number(std::string_view text, std::string_view spec) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw Error(ErrorCode::InvalidArgument,
                    "kernel spec '" + std::string(spec) + "': cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

// Expects exactly `key=value` after the colon.
double parse_param(std::string_view rest, std::string_view key, std::string_view spec) {
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos || rest.substr(0, eq) != key) {
        throw Error(ErrorCode::InvalidArgument,
                    "kernel spec '" + std::string(spec) + "': expected '" + std::string(key) + "=<value>'");
    }
    return parse_number(rest.substr(eq + 1), spec);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

Kernel parse_kernel_spec(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    if (name == "dirac") {
        if (!rest.empty()) throw Error(ErrorCode::InvalidArgument, "kernel spec 'dirac' takes no parameters");
        return Kernel::dirac();
    }
    if (name == "gaussian") return Kernel::gaussian(parse_param(rest, "alpha", spec));
    if (name == "uniform") return Kernel::uniform(parse_param(rest, "a", spec));
    if (name == "twopoint") return Kernel::two_point(parse_param(rest, "a", spec));
    if (name == "table") {
        if (rest.empty()) throw Error(ErrorCode::InvalidArgument, "kernel spec 'table:' needs a CSV path");
        return load_kernel_table(std::filesystem::path(std::string(rest)));
    }
    throw Error(ErrorCode::InvalidArgument,
                "unknown kernel spec '" + std::string(spec) +
                    "' (expected gaussian:alpha=, uniform:a=, twopoint:a=, dirac, table:path)");
}

Kernel load_kernel_table(const std::filesystem::path& path, QuadratureConfig cfg) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open kernel table " + path.string());
    std::vector<double> s, w;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::string_view row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument, "kernel table row without comma: " + std::string(row));
        }
        const auto a = trim(row.substr(0, comma));
        const auto b = trim(row.substr(comma + 1));
        double x = 0.0;
        auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), x);
        if (first && (ec != std::errc{} || ptr != a.data() + a.size())) {
            first = false;  // header
            continue;
        }
        first = false;
        s.push_back(parse_number(a, path.string()));
        w.push_back(parse_number(b, path.string()));
    }
    return Kernel::from_samples(s, w, cfg);
}

}  // namespace wavespeed
