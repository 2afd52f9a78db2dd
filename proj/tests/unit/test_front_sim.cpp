#include "oracles.hpp"

#include "wavespeed/error.hpp"
#include "wavespeed/front_sim.hpp"
#include "wavespeed/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace wavespeed;

namespace {

SimConfig small_config() {
    SimConfig cfg;
    cfg.length = 40.0;
    cfg.dx = 0.2;
    cfg.t_end = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("birth function basics") {
    const BirthFunction g = BirthFunction::nicholson(3.0);
    CHECK(g(0.0) == 0.0);
    CHECK(g.slope_at_zero() == 3.0);
    CHECK(oracle::central_diff([&](double u) { return g(u); }, 0.0, 1e-6) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(g(g.equilibrium()) == doctest::Approx(g.equilibrium()).epsilon(1e-14));
    for (int i = 1; i <= 50; ++i) CHECK(g(0.2 * i) <= 3.0 * 0.2 * i);
    const BirthFunction c = BirthFunction::capped_linear(2.0, 0.5);
    CHECK(c(0.25) == 0.5);
    CHECK(c(5.0) == 1.0);
    CHECK(c.equilibrium() == 1.0);
    CHECK_THROWS_AS(BirthFunction::nicholson(0.9), Error);
    CHECK_THROWS_AS(BirthFunction::capped_linear(2.0, 0.0), Error);
}

TEST_CASE("time step is snapped to the delay") {
    SimConfig cfg = small_config();
    const FrontSimulator sim(cfg, {2.0, 1.0}, Kernel::gaussian(1.0), BirthFunction::nicholson(2.0));
    CHECK(sim.dt() <= 0.45 * cfg.dx * cfg.dx);
    CHECK(static_cast<double>(sim.delay_steps()) * sim.dt() == doctest::Approx(1.0).epsilon(1e-14));
    cfg.dt_max = 0.5 * cfg.dx * cfg.dx;
    CHECK_THROWS_AS(FrontSimulator(cfg, {2.0, 1.0}, Kernel::gaussian(1.0), BirthFunction::nicholson(2.0)), Error);
}

TEST_CASE("discrete kernel has unit mass") {
    const FrontSimulator sim(small_config(), {2.0, 0.0}, Kernel::gaussian(1.0), BirthFunction::nicholson(2.0));
    const auto w = sim.kernel_weights();
    double mass = w[0];
    for (std::size_t j = 1; j < w.size(); ++j) mass += 2.0 * w[j];
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero state stays zero") {
    FrontSimulator sim(small_config(), {2.0, 0.5}, Kernel::gaussian(1.0), BirthFunction::nicholson(2.0));
    sim.reset(std::vector<double>(sim.size(), 0.0));
    for (int i = 0; i < 200; ++i) sim.step();
    for (double v : sim.state()) CHECK(v == 0.0);
    CHECK(sim.clamp_events() == 0);
}

TEST_CASE("positive equilibrium is preserved") {
    for (const Kernel& k : {Kernel::dirac(), Kernel::gaussian(1.0)}) {
        FrontSimulator sim(small_config(), {2.0, 0.5}, k, BirthFunction::nicholson(2.0));
        const double eq = std::log(2.0);
        sim.reset(std::vector<double>(sim.size(), eq));
        for (int i = 0; i < 200; ++i) {
            sim.step();
            for (double v : sim.state()) REQUIRE(std::abs(v - eq) < 1e-12);
        }
    }
}

TEST_CASE("one step matches a hand-computed stencil") {
    const SimConfig cfg = small_config();
    FrontSimulator sim(cfg, {2.0, 0.0}, Kernel::dirac(), BirthFunction::nicholson(2.0));
    std::vector<double> u0(sim.size(), 0.0);
    const std::size_t i0 = 50;
    u0[i0] = 0.3;
    sim.reset(u0);
    sim.step();
    const double dt = sim.dt(), r = dt / (cfg.dx * cfg.dx);
    const double g = 2.0 * 0.3 * std::exp(-0.3);
    CHECK(sim.state()[i0] == doctest::Approx(0.3 - 2.0 * r * 0.3 + dt * (g - 0.3)).epsilon(1e-15));
    CHECK(sim.state()[i0 - 1] == doctest::Approx(r * 0.3).epsilon(1e-15));
    CHECK(sim.state()[i0 + 1] == doctest::Approx(r * 0.3).epsilon(1e-15));
    CHECK(sim.state()[i0 + 2] == 0.0);
}

TEST_CASE("delayed term reads the initial history") {
    const SimConfig cfg = small_config();
    FrontSimulator sim(cfg, {2.0, 1.0}, Kernel::dirac(), BirthFunction::nicholson(2.0));
    const std::size_t n = sim.size(), d = sim.delay_steps();
    std::vector<double> u0(n, 0.2);
    sim.reset(u0);
    // flat state: the Laplacian vanishes and the birth term is g(0.2) until the delay elapses
    double v = 0.2;
    const double g = 2.0 * 0.2 * std::exp(-0.2);
    for (std::size_t s = 0; s < d; ++s) {
        sim.step();
        v = v + sim.dt() * (g - v);
    }
    CHECK(sim.state()[n / 2] == doctest::Approx(v).epsilon(1e-13));
    CHECK(sim.state()[0] == doctest::Approx(v).epsilon(1e-13));
}

TEST_CASE("blow-up is detected") {
    FrontSimulator sim(small_config(), {2.0, 0.0}, Kernel::dirac(), BirthFunction::capped_linear(2.0, 1.0));
    sim.reset(std::vector<double>(sim.size(), 30.0));
    CHECK_THROWS_AS(sim.step(), Error);
}

TEST_CASE("front speed fit on an exact line") {
    std::vector<TracePoint> trace;
    for (int i = 0; i <= 100; ++i) trace.push_back({0.1 * i, 3.0 + 2.0 * 0.1 * i});
    const SpeedFit f = fit_front_speed(trace, 0.4);
    CHECK(f.speed == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.rms_residual < 1e-12);
    const std::vector<TracePoint> one{{0.0, 0.0}};
    CHECK_THROWS_AS(fit_front_speed(one, 0.4), Error);
}

TEST_CASE("front position interpolates the level crossing") {
    SimConfig cfg = small_config();
    FrontSimulator sim(cfg, {2.0, 0.0}, Kernel::dirac(), BirthFunction::nicholson(2.0));
    std::vector<double> u0(sim.size(), 0.0);
    for (std::size_t i = 0; i <= 10; ++i) u0[i] = 1.0;
    u0[11] = 0.5;
    sim.reset(u0);
    CHECK(sim.front_position(0.75) == doctest::Approx(10.5 * cfg.dx).epsilon(1e-14));
    CHECK(sim.front_position(2.0) < 0.0);
}

TEST_CASE("coarse fronts spread near the minimal speed and slow with delay") {
    SimConfig cfg;
    cfg.length = 200.0;
    cfg.dx = 0.2;
    cfg.t_end = 50.0;
    const Kernel k = Kernel::gaussian(1.0);
    std::vector<double> speeds;
    for (double h : {0.0, 1.0, 2.0}) {
        const SimResult r = run_front(cfg, {2.0, h}, k, BirthFunction::nicholson(2.0));
        CHECK(r.clamp_events == 0);
        const double c = solve_critical({2.0, h}, k).c_star;
        CAPTURE(h);
        CHECK(std::abs(r.speed - c) / c < 0.1);
        speeds.push_back(r.speed);
    }
    CHECK(speeds[0] > speeds[1]);
    CHECK(speeds[1] > speeds[2]);
}

TEST_CASE("grid refinement changes the dirac speed only slightly") {
    SimConfig cfg;
    cfg.length = 150.0;
    cfg.t_end = 40.0;
    cfg.dx = 0.2;
    const SimResult coarse = run_front(cfg, {2.0, 0.0}, Kernel::dirac(), BirthFunction::nicholson(2.0));
    cfg.dx = 0.1;
    const SimResult fine = run_front(cfg, {2.0, 0.0}, Kernel::dirac(), BirthFunction::nicholson(2.0));
    CHECK(std::abs(coarse.speed - fine.speed) / fine.speed < 0.05);
}

TEST_CASE("run stops at the boundary") {
    SimConfig cfg;
    cfg.length = 40.0;
    cfg.dx = 0.2;
    cfg.t_end = 100.0;
    const SimResult r = run_front(cfg, {2.0, 0.0}, Kernel::dirac(), BirthFunction::nicholson(2.0));
    CHECK(r.reached_boundary);
    CHECK(r.t_final < 100.0);
}
