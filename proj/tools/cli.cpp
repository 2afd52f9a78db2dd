#include "cli.hpp"

#include "svg_chart.hpp"
#include "wavespeed/charfun.hpp"
#include "wavespeed/error.hpp"
#include "wavespeed/front_sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace wavespeed::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_curve_rows(std::ostream& os, double p, const Kernel& k, const SpeedCurve& curve) {
    for (const auto& s : curve.samples) {
        const SpeedBounds b = theorem1_bounds(ModelParams{p, s.h}, k);
        os << format_number(s.h) << ',' << (s.ok ? format_number(s.c_star) : "") << ','
           << format_number(b.lower_add) << ',' << format_number(b.lower_log) << ','
           << format_number(b.upper_k1) << ',' << format_number(b.upper_k2) << ','
           << format_number(b.lower) << ',' << format_number(b.upper) << ','
           << (s.ok ? format_number(s.residual) : "") << '\n';
    }
}

namespace {

// Output sink: "-" is the caller's stream, anything else a file.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            os_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
            os_ = file_.get();
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_ = nullptr;
};

std::vector<double> uniform_grid(double lo, double hi, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
    if (!(hi >= lo)) throw Error(ErrorCode::InvalidArgument, "h range must satisfy h-max >= h-min");
    if (n == 1 || hi == lo) return {lo};
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

void write_curve_svg(const std::string& path, const std::string& title, const SpeedCurve& curve, double p,
                     const Kernel& k) {
    std::vector<double> x;
    std::vector<Series> s{{"c*", {}}, {"lower_add", {}}, {"lower_log", {}}, {"upper_k1", {}}, {"upper_k2", {}}};
    for (const auto& smp : curve.samples) {
        const SpeedBounds b = theorem1_bounds(ModelParams{p, smp.h}, k);
        x.push_back(smp.h);
        s[0].y.push_back(smp.ok ? smp.c_star : std::numeric_limits<double>::quiet_NaN());
        s[1].y.push_back(b.lower_add);
        s[2].y.push_back(b.lower_log);
        s[3].y.push_back(b.upper_k1);
        // k2/h blows up near h = 0; clip to keep the chart readable
        s[4].y.push_back(b.upper_k2 <= 2.0 * b.upper_k1 ? b.upper_k2 : std::numeric_limits<double>::quiet_NaN());
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    write_line_chart(os, title, "delay h", x, s);
}

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Check run_check(const std::string& name, const std::function<std::string(bool&)>& body) {
    bool pass = true;
    try {
        std::string detail = body(pass);
        return {name, pass, detail};
    } catch (const std::exception& e) {
        return {name, false, std::string("error: ") + e.what()};
    }
}

std::vector<Check> verify_suite(double p, const Kernel& k, double perturb) {
    std::vector<Check> out;
    const SolverConfig cfg;
    const double alpha = std::holds_alternative<Gaussian>(k.variant()) ? std::get<Gaussian>(k.variant()).alpha : 1.0;
    const Kernel heat = Kernel::gaussian(alpha);
    const std::vector<double> hs{0.0, 0.5, 1.0, 2.0, 3.0, 5.0};

    out.push_back(run_check("kpp-limit", [&](bool& pass) {
        const double c = solve_critical(ModelParams{p, 0.0}, Kernel::dirac(), cfg).c_star;
        const double want = 2.0 * std::sqrt(p - 1.0);
        pass = std::abs(c - want) <= 1e-8;
        return "dirac h=0: c*=" + format_number(c) + " vs 2sqrt(p-1)=" + format_number(want);
    }));

    out.push_back(run_check("ivp-seed", [&](bool& pass) {
        const double seed = solve_ivp_rho0(p, alpha) * (1.0 + perturb);
        const double x = 1.0 / (4.0 * seed);
        const double eq = std::abs(1.0 + x - p * std::exp(-alpha * x));
        const double direct = solve_critical(ModelParams{p, alpha}, heat, cfg).eps0;
        const double rel = std::abs(seed - direct) / direct;
        pass = eq <= 1e-12 && rel <= 1e-8;
        return "rho0 equation residual " + fmt(eq) + ", |rho0 - eps0(alpha)|/eps0 " + fmt(rel);
    }));

    out.push_back(run_check("cardano-vs-generic", [&](bool& pass) {
        double worst = 0.0;
        for (double h : {0.0, 0.5, 2.0, 4.0}) {
            const CriticalPoint cp = solve_critical(ModelParams{p, h}, heat, cfg);
            worst = std::max(worst, std::abs(cardano_w0(cp.eps0, h, alpha) - cp.w0));
        }
        pass = worst <= 1e-7;
        return "max |w0_cardano - w0_direct| " + fmt(worst);
    }));

    std::vector<CriticalPoint> cps;
    out.push_back(run_check("residual-certificate", [&](bool& pass) {
        double worst_psi = 0.0, worst_w = 0.0;
        for (double h : hs) {
            const CriticalPoint cp = solve_critical(ModelParams{p, h}, k, cfg);
            const WformResiduals r = wform_residuals(cp.w0, cp.eps0, ModelParams{p, h}, k);
            worst_psi = std::max({worst_psi, cp.residual_psi, cp.residual_dz});
            worst_w = std::max({worst_w, std::abs(r.ew), std::abs(r.eww)});
            pass = pass && cp.dzz > 0.0 && cp.deps > 0.0;
            cps.push_back(cp);
        }
        pass = pass && worst_psi <= 1e-9 && worst_w <= 1e-8;
        return "max |psi|,|psi_z| " + fmt(worst_psi) + ", max w-form " + fmt(worst_w);
    }));

    out.push_back(run_check("wform-identity", [&](bool& pass) {
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> zd(0.0, 4.0), ed(0.05, 4.0), hd(0.0, 3.0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double z = zd(rng), eps = ed(rng), h = hd(rng);
            const ModelParams mp{p, h};
            const double lhs = wform_residuals(std::sqrt(eps) * z, eps, mp, k).ew;
            const double rhs = -std::exp(z * h) * psi_eval(z, eps, mp, k).value;
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
        pass = worst <= 1e-10;
        return "max relative deviation " + fmt(worst);
    }));

    out.push_back(run_check("bound-sandwich", [&](bool& pass) {
        if (cps.size() != hs.size()) throw Error(ErrorCode::NoConvergence, "critical points unavailable");
        const double slack = k.is_dirac() ? 1e-12 : 0.0;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            const SpeedBounds b = theorem1_bounds(ModelParams{p, hs[i]}, k);
            const double c = cps[i].c_star;
            const bool ok = k.is_dirac() ? (b.lower <= c * (1 + slack) && c <= b.upper * (1 + slack))
                                         : (b.lower < c && c < b.upper);
            if (!ok) {
                pass = false;
                return "violated at h=" + format_number(hs[i]);
            }
        }
        return std::string("lower < c* < upper on h in {0,0.5,1,2,3,5}");
    }));

    out.push_back(run_check("monotone-decreasing", [&](bool& pass) {
        for (std::size_t i = 1; i < cps.size(); ++i) pass = pass && cps[i].c_star < cps[i - 1].c_star;
        return std::string("c*(h) strictly decreasing on the check grid");
    }));

    out.push_back(run_check("continuation", [&](bool& pass) {
        const bool gauss = std::holds_alternative<Gaussian>(k.variant());
        const double h0 = gauss ? alpha : 1.0;
        const double seed = gauss ? solve_ivp_rho0(p, alpha) * (1.0 + perturb)
                                  : solve_critical(ModelParams{p, h0}, k, cfg).eps0 * (1.0 + perturb);
        const double h_end = std::max(5.0, h0 + 1.0);
        const SpeedCurve c = continue_ode(p, k, h0, seed, h_end, 200, cfg);
        pass = c.endpoint_rel_error <= 1e-6;
        return std::string(to_string(c.method)) + " to h=" + format_number(h_end) + ": rel err " +
               fmt(c.endpoint_rel_error);
    }));
    return out;
}

struct Common {
    double p = 0.0;
    double h = 0.0;
    std::string kernel = "gaussian:alpha=1";
};

void print_kv(std::ostream& out, const char* key, const std::string& value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-18s", key);
    out << buf << value << '\n';
}

BirthFunction parse_birth(const std::string& spec, double p) {
    if (spec == "nicholson") return BirthFunction::nicholson(p);
    const std::string prefix = "capped:u=";
    if (spec.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            const double u = std::stod(spec.substr(prefix.size()), &used);
            if (used == spec.size() - prefix.size()) return BirthFunction::capped_linear(p, u);
        } catch (const std::logic_error&) {
        }
    }
    throw Error(ErrorCode::InvalidArgument, "birth spec must be 'nicholson' or 'capped:u=<value>', got '" + spec + "'");
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimal traveling-wave speed for nonlocal delayed reaction-diffusion", "wavespeed"};
    app.require_subcommand(1);
    // -h would collide with the --h delay flag
    app.set_help_flag("--help", "print this help and exit");

    // speed
    Common speed;
    SolverConfig speed_cfg;
    auto* sc_speed = app.add_subcommand("speed", "double root, c*, residuals and the explicit bound window");
    sc_speed->add_option("--p", speed.p, "linearization slope g'(0) > 1")->required();
    sc_speed->add_option("--h", speed.h, "delay h >= 0")->required();
    sc_speed->add_option("--kernel", speed.kernel, "kernel spec")->capture_default_str();
    sc_speed->add_option("--eps-rtol", speed_cfg.eps_rel_tol, "relative eps bracket tolerance")->capture_default_str();
    sc_speed->add_option("--residual-tol", speed_cfg.residual_tol, "residual tolerance")->capture_default_str();

    // bounds
    Common bnd;
    auto* sc_bounds = app.add_subcommand("bounds", "every explicit lower/upper speed bound");
    sc_bounds->add_option("--p", bnd.p, "linearization slope g'(0) > 1")->required();
    sc_bounds->add_option("--h", bnd.h, "delay h >= 0")->required();
    sc_bounds->add_option("--kernel", bnd.kernel, "kernel spec")->capture_default_str();

    // curve
    Common crv;
    double h_min = 0.0, h_max = 5.0;
    int samples = 101, substeps = 20, threads = 0;
    std::string method = "direct", out_path = "-", svg_path;
    auto* sc_curve = app.add_subcommand("curve", "sample c*(h) and its bounds to CSV");
    sc_curve->add_option("--p", crv.p, "linearization slope g'(0) > 1")->required();
    sc_curve->add_option("--kernel", crv.kernel, "kernel spec")->capture_default_str();
    sc_curve->add_option("--h-min", h_min, "first delay")->capture_default_str();
    sc_curve->add_option("--h-max", h_max, "last delay")->capture_default_str();
    sc_curve->add_option("--samples", samples, "number of h samples")->capture_default_str();
    sc_curve->add_option("--method", method, "direct | ode")
        ->check(CLI::IsMember({"direct", "ode"}))
        ->capture_default_str();
    sc_curve->add_option("--substeps", substeps, "RK4 steps per sample interval (ode)")->capture_default_str();
    sc_curve->add_option("--threads", threads, "worker threads for direct (0: WAVESPEED_THREADS or all)");
    sc_curve->add_option("--out", out_path, "CSV path or - for stdout")->capture_default_str();
    sc_curve->add_option("--svg", svg_path, "optional SVG chart path");

    // figure2
    std::string fig_out = "-", fig_svg;
    int fig_substeps = 20;
    auto* sc_fig = app.add_subcommand("figure2", "c*(h) and bounds for p=2, heat kernel alpha=1, h in [0,5]");
    sc_fig->add_option("--out", fig_out, "CSV path or - for stdout")->capture_default_str();
    sc_fig->add_option("--svg", fig_svg, "optional SVG chart path");
    sc_fig->add_option("--substeps", fig_substeps, "RK4 steps per sample interval")->capture_default_str();

    // curves
    Common gh;
    double curves_eps = 0.0;
    int curves_samples = 301;
    std::string curves_out = "-", curves_svg;
    auto* sc_curves = app.add_subcommand("curves", "sample G, H and R on a w grid");
    sc_curves->add_option("--p", gh.p, "linearization slope g'(0) > 1")->required();
    sc_curves->add_option("--h", gh.h, "delay h >= 0")->required();
    sc_curves->add_option("--kernel", gh.kernel, "kernel spec")->capture_default_str();
    sc_curves->add_option("--eps", curves_eps, "eps > 0 (default: eps0(h) from the solver)");
    sc_curves->add_option("--samples", curves_samples, "grid points on [0, 1.5/sqrt(eps)]")->capture_default_str();
    sc_curves->add_option("--out", curves_out, "CSV path or - for stdout")->capture_default_str();
    sc_curves->add_option("--svg", curves_svg, "optional SVG chart path");

    // verify
    double ver_p = 2.0, perturb = 0.0;
    std::string ver_kernel = "gaussian:alpha=1";
    auto* sc_verify = app.add_subcommand("verify", "run the internal consistency suite");
    sc_verify->add_option("--p", ver_p, "linearization slope g'(0) > 1")->capture_default_str();
    sc_verify->add_option("--kernel", ver_kernel, "kernel spec")->capture_default_str();
    sc_verify->add_option("--perturb-seed", perturb, "relative perturbation of the continuation seed (test hook)");

    // simulate
    Common sim;
    SimConfig sim_cfg;
    std::string birth = "nicholson", trace_path;
    auto* sc_sim = app.add_subcommand("simulate", "finite-difference front simulation and fitted spreading speed");
    sc_sim->add_option("--p", sim.p, "linearization slope g'(0) > 1")->required();
    sc_sim->add_option("--h", sim.h, "delay h >= 0")->required();
    sc_sim->add_option("--kernel", sim.kernel, "kernel spec")->capture_default_str();
    sc_sim->add_option("--birth", birth, "nicholson | capped:u=<value>")->capture_default_str();
    sc_sim->add_option("--L", sim_cfg.length, "domain length")->capture_default_str();
    sc_sim->add_option("--dx", sim_cfg.dx, "grid spacing")->capture_default_str();
    sc_sim->add_option("--dt", sim_cfg.dt_max, "max time step (0: 0.45 dx^2)")->capture_default_str();
    sc_sim->add_option("--T", sim_cfg.t_end, "end time")->capture_default_str();
    sc_sim->add_option("--theta", sim_cfg.theta_fraction, "front level / equilibrium")->capture_default_str();
    sc_sim->add_option("--kernel-width", sim_cfg.kernel_half_width, "kernel truncation half-width (0: auto)");
    sc_sim->add_option("--trace", trace_path, "trace CSV (t,x_front)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitArgs;
    }

    if (*sc_speed) {
        const Kernel k = parse_kernel_spec(speed.kernel);
        const ModelParams mp{speed.p, speed.h};
        mp.validate();
        const CriticalPoint cp = solve_critical(mp, k, speed_cfg);
        const SpeedBounds b = theorem1_bounds(mp, k);
        const WformResiduals wr = wform_residuals(cp.w0, cp.eps0, mp, k);
        char line[128];
        std::snprintf(line, sizeof line, "c* = %.9f", cp.c_star);
        out << line << '\n';
        print_kv(out, "kernel", k.describe());
        print_kv(out, "p", format_number(mp.p));
        print_kv(out, "h", format_number(mp.h));
        print_kv(out, "z0", format_number(cp.z0));
        print_kv(out, "eps0", format_number(cp.eps0));
        print_kv(out, "w0", format_number(cp.w0));
        print_kv(out, "c_star", format_number(cp.c_star));
        print_kv(out, "|psi|", format_number(cp.residual_psi));
        print_kv(out, "|psi_z|", format_number(cp.residual_dz));
        print_kv(out, "psi_zz", format_number(cp.dzz));
        print_kv(out, "psi_eps", format_number(cp.deps));
        print_kv(out, "|rho_ew|", format_number(std::abs(wr.ew)));
        print_kv(out, "|rho_eww|", format_number(std::abs(wr.eww)));
        const bool inside = k.is_dirac() ? (b.lower <= cp.c_star * (1 + 1e-12) && cp.c_star <= b.upper * (1 + 1e-12))
                                         : (b.lower < cp.c_star && cp.c_star < b.upper);
        print_kv(out, "window", "(" + format_number(b.lower) + ", " + format_number(b.upper) + ")");
        print_kv(out, "inside_window", inside ? "yes" : "NO");
        return kExitOk;
    }

    if (*sc_bounds) {
        const Kernel k = parse_kernel_spec(bnd.kernel);
        const ModelParams mp{bnd.p, bnd.h};
        mp.validate();
        const SpeedBounds b = theorem1_bounds(mp, k);
        print_kv(out, "kernel", k.describe());
        print_kv(out, "p", format_number(mp.p));
        print_kv(out, "h", format_number(mp.h));
        print_kv(out, "regime", b.regime == BoundRegime::ShortDelay ? "h<=1" : "h>=1");
        print_kv(out, "k1", format_number(k1(mp.p, k)));
        print_kv(out, "k2", format_number(k2(mp.p, k)));
        print_kv(out, "lower_add", format_number(b.lower_add));
        print_kv(out, "lower_log", format_number(b.lower_log));
        print_kv(out, "upper_k1", format_number(b.upper_k1));
        print_kv(out, "upper_k2", format_number(b.upper_k2));
        print_kv(out, "upper_ad_opt", format_number(b.upper_ad_opt));
        print_kv(out, "ad_r", format_number(b.ad_r));
        print_kv(out, "lower_active", format_number(b.lower));
        print_kv(out, "upper_active", format_number(b.upper));
        return kExitOk;
    }

    if (*sc_curve) {
        const Kernel k = parse_kernel_spec(crv.kernel);
        ModelParams{crv.p, h_min}.validate();
        ModelParams{crv.p, h_max}.validate();
        const auto grid = uniform_grid(h_min, h_max, samples);
        SpeedCurve curve;
        if (method == "direct") {
            curve = solve_curve_direct(crv.p, k, grid, threads > 0 ? threads : default_thread_count());
        } else {
            curve = solve_curve_ode(crv.p, k, h_min, h_max, static_cast<int>(grid.size()), substeps);
        }
        Sink sink(out_path, out);
        *sink << kCurveHeader << '\n';
        write_curve_rows(*sink, crv.p, k, curve);
        if (!svg_path.empty()) {
            write_curve_svg(svg_path, "minimal speed and bounds, p=" + format_number(crv.p) + ", " + k.describe(),
                            curve, crv.p, k);
        }
        for (const auto& s : curve.samples) {
            if (!s.ok) err << "sample h=" << format_number(s.h) << " failed: " << s.error << '\n';
        }
        return curve.all_ok() ? kExitOk : kExitNumeric;
    }

    if (*sc_fig) {
        constexpr double p = 2.0;
        const Kernel k = Kernel::gaussian(1.0);
        const auto grid = uniform_grid(0.0, 5.0, 101);
        const SpeedCurve direct = solve_curve_direct(p, k, grid, default_thread_count());
        const SpeedCurve ode = solve_curve_ode(p, k, 0.0, 5.0, 101, fig_substeps);
        Sink sink(fig_out, out);
        *sink << kCurveHeader << ",c_star_ode,ode_rel_diff\n";
        std::ostringstream rows;
        write_curve_rows(rows, p, k, direct);
        std::istringstream lines(rows.str());
        std::string row;
        double worst = 0.0;
        bool sandwich = true;
        for (std::size_t i = 0; std::getline(lines, row); ++i) {
            const double cd = direct.samples[i].c_star, co = ode.samples[i].c_star;
            const double rel = std::abs(cd - co) / cd;
            worst = std::max(worst, rel);
            const SpeedBounds b = theorem1_bounds(ModelParams{p, grid[i]}, k);
            sandwich = sandwich && direct.samples[i].ok && b.lower < cd && cd < b.upper;
            *sink << row << ',' << format_number(co) << ',' << format_number(rel) << '\n';
        }
        if (!fig_svg.empty()) {
            write_curve_svg(fig_svg, "minimal speed and its bounds (p=2, alpha=1)", direct, p, k);
        }
        err << "figure2: max |c*_direct - c*_ode|/c* = " << fmt(worst)
            << (sandwich ? ", bound sandwich holds on every row" : ", BOUND SANDWICH VIOLATED") << '\n';
        return direct.all_ok() && sandwich && worst <= 1e-6 ? kExitOk : kExitNumeric;
    }

    if (*sc_curves) {
        const Kernel k = parse_kernel_spec(gh.kernel);
        const ModelParams mp{gh.p, gh.h};
        mp.validate();
        double eps = curves_eps;
        if (sc_curves->count("--eps") > 0) {
            if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "--eps must be > 0");
        } else {
            eps = solve_critical(mp, k).eps0;
        }
        if (curves_samples < 2) throw Error(ErrorCode::InvalidArgument, "--samples must be >= 2");
        const double w_max = 1.5 / std::sqrt(eps);
        Sink sink(curves_out, out);
        *sink << "w,G,H,R\n";
        std::vector<double> ws;
        std::vector<Series> series{{"G", {}}, {"H", {}}, {"R", {}}};
        for (int i = 0; i < curves_samples; ++i) {
            const double w = w_max * i / (curves_samples - 1);
            const double G = G_value(w, eps), H = H_value(w, eps, mp.h), R = R_value(w, mp.p, k);
            *sink << format_number(w) << ',' << format_number(G) << ',' << format_number(H) << ','
                  << format_number(R) << '\n';
            ws.push_back(w);
            series[0].y.push_back(G);
            series[1].y.push_back(H);
            series[2].y.push_back(R);
        }
        if (!curves_svg.empty()) {
            std::ofstream os(curves_svg, std::ios::binary);
            if (!os) throw Error(ErrorCode::Io, "cannot open " + curves_svg + " for writing");
            write_line_chart(os, "G, H and R (h=" + format_number(mp.h) + ", eps=" + format_number(eps) + ")", "w",
                             ws, series);
        }
        return kExitOk;
    }

    if (*sc_verify) {
        const Kernel k = parse_kernel_spec(ver_kernel);
        ModelParams{ver_p, 0.0}.validate();
        const auto checks = verify_suite(ver_p, k, perturb);
        bool all = true;
        for (const auto& c : checks) {
            char name[32];
            std::snprintf(name, sizeof name, "%-22s", c.name.c_str());
            out << (c.pass ? "PASS  " : "FAIL  ") << name << c.detail << '\n';
            all = all && c.pass;
        }
        out << (all ? "all checks passed" : "some checks FAILED") << '\n';
        return all ? kExitOk : kExitNumeric;
    }

    if (*sc_sim) {
        const Kernel k = parse_kernel_spec(sim.kernel);
        const ModelParams mp{sim.p, sim.h};
        mp.validate();
        const BirthFunction g = parse_birth(birth, sim.p);
        SimResult r = run_front(sim_cfg, mp, k, g);
        try {
            r.reference_c_star = solve_critical(mp, k).c_star;
        } catch (const Error& e) {
            err << "reference c* unavailable: " << e.what() << '\n';
            r.reference_c_star = std::numeric_limits<double>::quiet_NaN();
        }
        if (!trace_path.empty()) {
            Sink sink(trace_path, out);
            *sink << "t,x_front\n";
            for (const auto& tp : r.trace) *sink << format_number(tp.t) << ',' << format_number(tp.x_front) << '\n';
        }
        print_kv(out, "speed_fit", format_number(r.speed));
        print_kv(out, "c_star", format_number(r.reference_c_star));
        print_kv(out, "rel_diff", format_number(std::abs(r.speed - r.reference_c_star) / r.reference_c_star));
        print_kv(out, "fit_rms", format_number(r.fit_residual));
        print_kv(out, "clamp_events", std::to_string(r.clamp_events));
        print_kv(out, "reached_boundary", r.reached_boundary ? "yes" : "no");
        print_kv(out, "t_final", format_number(r.t_final));
        print_kv(out, "dt", format_number(r.dt));
        return kExitOk;
    }
    return kExitArgs;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run_impl(args, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return is_argument_error(e.code()) ? kExitArgs : kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace wavespeed::cli
