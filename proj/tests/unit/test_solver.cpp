#include "oracles.hpp"

#include "wavespeed/bounds.hpp"
#include "wavespeed/error.hpp"
#include "wavespeed/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

using namespace wavespeed;

namespace {

const oracle::Fn gauss1 = [](double l) { return std::exp(l * l); };

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// x solving 1 + x = p e^{-alpha x}, by bisection on [0, p]
double ivp_x(double p, double alpha) {
    return oracle::bisect([&](double x) { return 1.0 + x - p * std::exp(-alpha * x); }, 0.0, p);
}

}  // namespace

TEST_CASE("min_psi for the local equation") {
    const Kernel k = Kernel::dirac();
    const MinPsi m = min_psi(0.2, {2.0, 0.0}, k);
    CHECK(m.z == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(m.value == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(min_psi(0.3, {2.0, 0.0}, k).value == doctest::Approx(1.0 - 1.0 / 1.2).epsilon(1e-12));
}

TEST_CASE("min_psi against a dense grid search") {
    const Kernel k = Kernel::gaussian(1.0);
    const ModelParams mp{2.0, 1.0};
    const auto [zg, vg] =
        oracle::grid_min([&](double z) { return oracle::psi_direct(z, 0.5, 2.0, 1.0, gauss1); }, 0.0, 20.0, 1000001);
    const MinPsi m = min_psi(0.5, mp, k);
    CHECK(std::abs(m.z - zg) < 1e-4);
    CHECK(std::abs(m.value - vg) < 1e-6);
    CHECK(m.value <= vg + 1e-12);
}

TEST_CASE("min_psi survives large delays") {
    const MinPsi m = min_psi(1.0 / (0.0242 * 0.0242), {2.0, 100.0}, Kernel::gaussian(1.0));
    CHECK(std::isfinite(m.value));
    CHECK(m.z > 0.0);
}

TEST_CASE("critical point for the local equation") {
    for (double p : {1.5, 2.0, 5.0}) {
        const CriticalPoint cp = solve_critical({p, 0.0}, Kernel::dirac());
        CHECK(cp.c_star == doctest::Approx(2.0 * std::sqrt(p - 1.0)).epsilon(1e-10));
        CHECK(cp.z0 == doctest::Approx(2.0 * (p - 1.0)).epsilon(1e-6));
        CHECK(cp.w0 == doctest::Approx(std::sqrt(p - 1.0)).epsilon(1e-6));
    }
}

TEST_CASE("heat kernel at h = alpha reduces to the scalar equation") {
    const double x = ivp_x(2.0, 1.0);
    const double rho0 = 1.0 / (4.0 * x);
    const CriticalPoint cp = solve_critical({2.0, 1.0}, Kernel::gaussian(1.0));
    CHECK(rel(cp.eps0, rho0) < 1e-9);
    CHECK(rel(cp.c_star, 1.224455026832139) < 1e-10);
    CHECK(rel(cp.z0, 0.749645056367247) < 1e-8);
    CHECK(rel(cp.w0, 0.612227513416069) < 1e-8);
    CHECK(std::abs(cp.residual_psi) <= 1e-9);
    CHECK(std::abs(cp.residual_dz) <= 1e-9);
}

TEST_CASE("heat kernel at zero delay") {
    const Kernel k = Kernel::gaussian(1.0);
    const CriticalPoint cp = solve_critical({2.0, 0.0}, k);
    CHECK(cp.c_star > 2.0);
    CHECK(cp.c_star < k1(2.0, k));
    CHECK(rel(cp.c_star, 3.635633024112648) < 1e-10);
    const double bf = oracle::brute_force_cstar(2.0, 0.0, gauss1, 0.01, 0.25, 10.0);
    CHECK(rel(cp.c_star, bf) < 1e-6);
}

TEST_CASE("frozen reference speeds") {
    const Kernel k = Kernel::gaussian(1.0);
    const std::vector<std::pair<double, double>> ref{{0.5, 1.755214594594332}, {2.0, 0.788380476502084},
                                                     {3.0, 0.588705011257737}, {5.0, 0.394247652273675},
                                                     {10.0, 0.217720292633076}, {100.0, 0.024262265896530}};
    for (const auto& [h, c] : ref) {
        CAPTURE(h);
        CHECK(rel(solve_critical({2.0, h}, k).c_star, c) < 1e-9);
    }
}

TEST_CASE("dirac kernel with delay against brute force") {
    const oracle::Fn one = [](double) { return 1.0; };
    for (double h : {0.5, 1.0, 3.0}) {
        CAPTURE(h);
        const double c = solve_critical({2.0, h}, Kernel::dirac()).c_star;
        const double bf = oracle::brute_force_cstar(2.0, h, one, 1e-3, 1e3, 20.0, 8001);
        CHECK(rel(c, bf) < 1e-8);
    }
}

TEST_CASE("critical point invariants") {
    for (const Kernel& k : {Kernel::gaussian(0.5), Kernel::uniform(1.5), Kernel::two_point(1.0), Kernel::dirac()}) {
        for (double h : {0.0, 0.7, 4.0}) {
            const CriticalPoint cp = solve_critical({3.0, h}, k);
            CHECK(cp.dzz > 0.0);
            CHECK(cp.deps > 0.0);
            CHECK(cp.z0 > 0.0);
            CHECK(std::abs(cp.residual_psi) <= 1e-9);
        }
    }
}

TEST_CASE("minimum of psi increases with eps") {
    const Kernel k = Kernel::uniform(1.0);
    const ModelParams mp{2.0, 0.8};
    double prev = min_psi(0.01, mp, k).value;
    for (int i = 1; i <= 60; ++i) {
        const double cur = min_psi(0.01 * std::pow(1.1, i), mp, k).value;
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("tabulated twins give the same speed") {
    for (const Kernel& closed : {Kernel::gaussian(1.0), Kernel::uniform(1.0)}) {
        const Kernel twin = Kernel::tabulated_twin(closed);
        for (double h : {0.0, 1.0, 3.0}) {
            CAPTURE(h);
            CHECK(rel(solve_critical({2.0, h}, twin).c_star, solve_critical({2.0, h}, closed).c_star) < 1e-9);
        }
    }
}

TEST_CASE("scalar seed rho0") {
    CHECK(rel(solve_ivp_rho0(2.0, 1.0), 0.666982321504235867717) < 1e-12);
    CHECK(rel(1.0 / (4.0 * solve_ivp_rho0(2.0, 1.0)), 0.374822528183623) < 1e-12);
    CHECK(rel(1.0 / (4.0 * solve_ivp_rho0(std::exp(1.0), 1.0)), 0.557145598997611) < 1e-12);
    for (double p : {1.5, 3.0, 10.0}) {
        for (double alpha : {0.2, 1.0, 4.0}) {
            CHECK(rel(1.0 / (4.0 * solve_ivp_rho0(p, alpha)), ivp_x(p, alpha)) < 1e-12);
            CHECK(rel(solve_ivp_rho0(p, alpha), solve_critical({p, alpha}, Kernel::gaussian(alpha)).eps0) < 1e-8);
        }
    }
    // as alpha -> 0 the equation tends to 1 + x = p
    CHECK(std::abs(1.0 / (4.0 * solve_ivp_rho0(std::exp(1.0), 1e-9)) - (std::exp(1.0) - 1.0)) < 1e-6);
}

TEST_CASE("cubic roots against companion-matrix eigenvalues") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    int three = 0;
    for (int i = 0; i < 200; ++i) {
        // build from known real roots so the discriminant is positive
        const double r1 = u(rng), r2 = u(rng), r3 = u(rng), a = 0.5 + std::abs(u(rng));
        const double c2 = -a * (r1 + r2 + r3), c1 = a * (r1 * r2 + r1 * r3 + r2 * r3), c0 = -a * r1 * r2 * r3;
        std::vector<double> got;
        try {
            got = cubic_real_roots(a, c2, c1, c0);
        } catch (const Error&) {
            continue;  // near-repeated roots may be classified either way
        }
        const auto want = oracle::companion_real_roots(a, c2, c1, c0);
        if (want.size() != 3) continue;
        ++three;
        REQUIRE(got.size() == 3);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(got[j] - want[j]) < 1e-8 * std::max(1.0, std::abs(want[j])));
        for (double x : got) {
            const double scale = std::abs(a * x * x * x) + std::abs(c2 * x * x) + std::abs(c1 * x) + std::abs(c0);
            CHECK(std::abs(((a * x + c2) * x + c1) * x + c0) <= 1e-12 * std::max(1.0, scale));
        }
    }
    CHECK(three > 150);
    CHECK_THROWS_AS(cubic_real_roots(1.0, 0.0, 1.0, 1.0), Error);
}

TEST_CASE("w0 cubic at the scalar seed") {
    const double rho0 = solve_ivp_rho0(2.0, 1.0);
    const auto c = w0_cubic_coefficients(rho0, 1.0, 1.0);
    const auto roots = cubic_real_roots(c[0], c[1], c[2], c[3]);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(-0.92882).epsilon(1e-4));
    CHECK(roots[1] == doctest::Approx(0.61223).epsilon(1e-4));
    CHECK(roots[2] == doctest::Approx(2.15327).epsilon(1e-4));
    const double w0 = cardano_w0(rho0, 1.0, 1.0);
    CHECK(w0 == doctest::Approx(roots[1]).epsilon(1e-12));
    CHECK(std::abs(wform_residuals(w0, rho0, {2.0, 1.0}, Kernel::gaussian(1.0)).ew) < 1e-8);
    const auto cmp = oracle::companion_real_roots(c[0], c[1], c[2], c[3]);
    REQUIRE(cmp.size() == 3);
    CHECK(std::abs(cmp[1] - w0) < 1e-10);
}

TEST_CASE("cardano w0 matches the generic minimizer along the curve") {
    const Kernel k = Kernel::gaussian(1.0);
    for (double h : {0.0, 1.0, 2.0, 4.0}) {
        const CriticalPoint cp = solve_critical({2.0, h}, k);
        CHECK(std::abs(cardano_w0(cp.eps0, h, 1.0) - cp.w0) < 1e-7);
    }
    CHECK(std::abs(cardano_w0(0.075655398064302, 0.0, 1.0) - 0.506919540003845) < 1e-7);
    CHECK(std::abs(cardano_w0(1.0 / (0.788380476502084 * 0.788380476502084), 2.0, 1.0) - 0.601763804950316) < 1e-7);
}

TEST_CASE("slope of eps0 at the scalar seed") {
    const double s = eps0_slope(2.0, Kernel::gaussian(1.0), 2.0, 1.0 / (0.788380476502084 * 0.788380476502084));
    CHECK(s == doctest::Approx(1.109952157310497).epsilon(1e-6));
    CHECK(eps0_slope(2.0, Kernel::uniform(1.0), 1.0, solve_critical({2.0, 1.0}, Kernel::uniform(1.0)).eps0) > 0.0);
}

TEST_CASE("continuation agrees with direct solves and converges in the step") {
    const Kernel k = Kernel::gaussian(1.0);
    const double seed = solve_ivp_rho0(2.0, 1.0);
    const SpeedCurve coarse = continue_ode(2.0, k, 1.0, seed, 3.0, 200);
    const SpeedCurve fine = continue_ode(2.0, k, 1.0, seed, 3.0, 400);
    REQUIRE(coarse.all_ok());
    CHECK(coarse.endpoint_rel_error < 1e-6);
    CHECK(std::abs(coarse.samples.back().c_star - fine.samples.back().c_star) < 1e-8);
    for (std::size_t i = 1; i < coarse.samples.size(); ++i) {
        CHECK(coarse.samples[i].h > coarse.samples[i - 1].h);
        CHECK(coarse.samples[i].eps0 > coarse.samples[i - 1].eps0);
    }
    const SpeedCurve back = continue_ode(2.0, k, 1.0, seed, 0.0, 100);
    REQUIRE(back.all_ok());
    CHECK(back.samples.front().h == 0.0);
    CHECK(rel(back.samples.front().c_star, 3.635633024112648) < 1e-6);
}

TEST_CASE("continuation for a kernel without the cubic") {
    const Kernel k = Kernel::uniform(1.0);
    const double seed = solve_critical({2.0, 0.5}, k).eps0;
    const SpeedCurve c = continue_ode(2.0, k, 0.5, seed, 5.0, 300);
    REQUIRE(c.all_ok());
    CHECK(c.endpoint_rel_error < 1e-6);
}

TEST_CASE("continuation edge cases") {
    const Kernel k = Kernel::gaussian(1.0);
    const double seed = solve_ivp_rho0(2.0, 1.0);
    const SpeedCurve one = continue_ode(2.0, k, 1.0, seed, 1.0, 10);
    CHECK(one.samples.size() == 1);
    CHECK_THROWS_AS(continue_ode(2.0, k, 1.0, seed * 1.01, 3.0, 10), Error);
}

TEST_CASE("direct sweep is independent of the thread count") {
    const Kernel k = Kernel::gaussian(1.0);
    std::vector<double> hs;
    for (int i = 0; i <= 20; ++i) hs.push_back(0.25 * i);
    const SpeedCurve a = solve_curve_direct(2.0, k, hs, 1);
    const SpeedCurve b = solve_curve_direct(2.0, k, hs, 4);
    REQUIRE(a.all_ok());
    REQUIRE(b.all_ok());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        CHECK(a.samples[i].h == hs[i]);
        CHECK(a.samples[i].c_star == b.samples[i].c_star);
    }
}

TEST_CASE("continuation sweep agrees with the direct sweep") {
    const Kernel k = Kernel::gaussian(1.0);
    const SpeedCurve ode = solve_curve_ode(2.0, k, 0.0, 5.0, 21, 20);
    std::vector<double> hs;
    for (int i = 0; i <= 20; ++i) hs.push_back(0.25 * i);
    const SpeedCurve dir = solve_curve_direct(2.0, k, hs, 2);
    REQUIRE(ode.all_ok());
    REQUIRE(ode.samples.size() == 21);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        CHECK(ode.samples[i].h == doctest::Approx(hs[i]).epsilon(1e-14));
        CHECK(rel(ode.samples[i].c_star, dir.samples[i].c_star) < 1e-6);
    }
}

TEST_CASE("thread count from the environment") {
    ::setenv("WAVESPEED_THREADS", "3", 1);
    CHECK(default_thread_count() == 3);
    ::unsetenv("WAVESPEED_THREADS");
    CHECK(default_thread_count() >= 1);
}

TEST_CASE("solver configuration validation") {
    SolverConfig cfg;
    cfg.eps_rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_THROWS_AS(solve_critical({0.9, 0.0}, Kernel::dirac()), Error);
}
