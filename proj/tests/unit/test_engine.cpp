#include "tdsim/engine.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

using Catch::Approx;
using namespace tdsim;

namespace {

// Single stock with a constant net inflow.
struct ConstantFlowSystem {
    double flow = 1.0;
    std::size_t state_size() const { return 1; }
    std::size_t aux_size() const { return 0; }
    std::vector<std::string> state_labels() const { return {"stock"}; }
    std::vector<std::string> aux_labels() const { return {}; }
    void eval(double, std::span<const double>, std::span<double> flows, std::span<double>) const {
        flows[0] = flow;
    }
};

struct ThrowingSystem {
    double fail_at = 3.0;
    std::size_t state_size() const { return 1; }
    std::size_t aux_size() const { return 0; }
    std::vector<std::string> state_labels() const { return {"stock"}; }
    std::vector<std::string> aux_labels() const { return {}; }
    void eval(double t, std::span<const double>, std::span<double> flows, std::span<double>) const {
        if (t >= fail_at) throw std::runtime_error("deliberate failure");
        flows[0] = 0.0;
    }
};

} // namespace

TEST_CASE("table function: clamped piecewise-linear lookup") {
    const TableFunction table({{0.0, 0.2}, {0.95, 0.2}, {1.0, 1.0}});

    SECTION("exact breakpoint") { CHECK(table(1.0) == 1.0); }
    SECTION("segment midpoint") { CHECK(table(0.975) == Approx(0.6)); }
    SECTION("clamps above the last breakpoint") { CHECK(table(1.3) == 1.0); }
    SECTION("clamps below the first breakpoint") { CHECK(table(-0.5) == 0.2); }
    SECTION("flat segment") { CHECK(table(0.5) == 0.2); }
}

TEST_CASE("table function: rejects invalid construction") {
    CHECK_THROWS_AS(TableFunction({{0.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(TableFunction({{0.5, 0.0}, {0.5, 1.0}}), ValidationError);
    CHECK_THROWS_AS(TableFunction({{1.0, 0.0}, {0.0, 1.0}}), ValidationError);
    CHECK_THROWS_WITH(TableFunction({}), Catch::Matchers::ContainsSubstring("2 breakpoints"));
}

TEST_CASE("table function: lookup is the affine interpolant inside a segment") {
    std::mt19937 rng(20240801);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Breakpoint> pts;
        double x = coord(rng);
        const int n = 2 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            pts.push_back({x, coord(rng)});
            x += 0.1 + std::abs(coord(rng));
        }
        const TableFunction table(pts);

        // breakpoints reproduce exactly
        for (const Breakpoint& p : pts) CHECK(table(p.x) == p.y);

        // random interior points match the hand-computed affine form
        std::uniform_int_distribution<std::size_t> seg(0, pts.size() - 2);
        const std::size_t i = seg(rng);
        std::uniform_real_distribution<double> inside(pts[i].x, pts[i + 1].x);
        const double xi = inside(rng);
        const double slope = (pts[i + 1].y - pts[i].y) / (pts[i + 1].x - pts[i].x);
        CHECK(table(xi) == Approx(pts[i].y + slope * (xi - pts[i].x)).margin(1e-12));
    }
}

TEST_CASE("smooth_step: single-step updates") {
    CHECK(smooth_step(1.0, 1.0, 12.0, 0.25) == 1.0);
    CHECK(smooth_step(1.0, 0.2, 12.0, 0.25) == Approx(1.0 + 0.25 * (0.2 - 1.0) / 12.0));
    CHECK(smooth_step(1.0, 0.2, 12.0, 0.25) == Approx(0.9833333333333333));
    CHECK(smooth_step(0.0, 1.0, 2.0, 0.5) == Approx(0.25));
}

TEST_CASE("smooth_step: step response tracks 1 - exp(-T/tau)") {
    const double tau = 12.0;
    const double target = 1.0;
    for (double dt : {tau / 48.0, tau / 96.0, tau / 480.0}) {
        double value = 0.0;
        double t = 0.0;
        for (int multiple = 1; multiple <= 3; ++multiple) {
            const double horizon = multiple * tau;
            while (t < horizon - dt / 2) {
                value = smooth_step(value, target, tau, dt);
                t += dt;
            }
            const double expected = target * (1.0 - std::exp(-horizon / tau));
            CHECK(std::abs(value - expected) <= 0.01 * expected);
        }
    }
}

TEST_CASE("smooth_step: reaches ~63.2% of the gap after one time constant as dt -> 0") {
    const double tau = 7.0;
    const double dt = tau / 2000.0;
    double value = 0.0;
    for (int k = 0; k < 2000; ++k) value = smooth_step(value, 1.0, tau, dt);
    CHECK(value == Approx(1.0 - std::exp(-1.0)).epsilon(0.001));
}

TEST_CASE("integration settings: validation") {
    CHECK_NOTHROW(IntegrationSettings{}.validate());
    CHECK_NOTHROW((IntegrationSettings{0.25, 132.0, 1.0}).validate());
    CHECK((IntegrationSettings{0.25, 132.0, 1.0}).step_count() == 528);
    CHECK((IntegrationSettings{0.25, 132.0, 1.0}).record_stride() == 4);

    CHECK_THROWS_AS((IntegrationSettings{0.0, 132.0, 1.0}).validate(), ValidationError);
    CHECK_THROWS_AS((IntegrationSettings{-0.25, 132.0, 1.0}).validate(), ValidationError);
    CHECK_THROWS_AS((IntegrationSettings{0.25, 0.0, 1.0}).validate(), ValidationError);
    // horizon not a multiple of dt
    CHECK_THROWS_AS((IntegrationSettings{0.25, 132.1, 1.0}).validate(), ValidationError);
    // record_every not a multiple of dt
    CHECK_THROWS_AS((IntegrationSettings{0.3, 132.0, 1.0}).validate(), ValidationError);
    // horizon not a multiple of record_every
    CHECK_THROWS_AS((IntegrationSettings{0.25, 10.0, 3.0}).validate(), ValidationError);
    // near-integer ratios within 1e-9 relative are accepted
    CHECK_NOTHROW((IntegrationSettings{0.1, 132.0, 1.0}).validate());
    // absurd grids are rejected before any integer cast can overflow
    CHECK_THROWS_WITH((IntegrationSettings{1e-300, 132.0, 1.0}).validate(),
                      Catch::Matchers::ContainsSubstring("1e9 steps"));
}

TEST_CASE("integrate: constant inflow accumulates linearly") {
    const ConstantFlowSystem sys{1.0};
    const double initial[] = {0.0};
    const RunResult run = integrate(sys, initial, IntegrationSettings{0.25, 10.0, 1.0});
    CHECK(run.final_value("stock") == 10.0);
    CHECK(run.sample_count() == 11);
    CHECK(run.times().front() == 0.0);
    CHECK(run.times().back() == 10.0);
}

TEST_CASE("integrate: zero flows keep the state fixed") {
    const ConstantFlowSystem sys{0.0};
    const double initial[] = {42.5};
    const RunResult run = integrate(sys, initial, IntegrationSettings{0.5, 20.0, 2.0});
    for (double v : run.values("stock")) CHECK(v == 42.5);
}

TEST_CASE("integrate: linearity holds for random constant flows") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> flow_dist(-50.0, 50.0);
    std::uniform_int_distribution<int> steps_dist(1, 2000);
    for (int trial = 0; trial < 100; ++trial) {
        const double f = flow_dist(rng);
        const double dt = 0.125 * (1 + rng() % 8);
        const int n = steps_dist(rng);
        const double horizon = n * dt;
        const ConstantFlowSystem sys{f};
        const double initial[] = {flow_dist(rng)};
        const RunResult run = integrate(sys, initial, IntegrationSettings{dt, horizon, horizon});
        const double expected = initial[0] + f * horizon;
        CHECK(run.final_value("stock") ==
              Approx(expected).margin(1e-9 * std::max(1.0, std::abs(expected))));
    }
}

TEST_CASE("integrate: recording contract") {
    const ConstantFlowSystem sys{2.0};
    const double initial[] = {0.0};

    SECTION("sample count is horizon/record_every + 1") {
        const RunResult run = integrate(sys, initial, IntegrationSettings{0.25, 132.0, 1.0});
        CHECK(run.sample_count() == 133);
    }
    SECTION("samples are spaced record_every apart and strictly increasing") {
        const RunResult run = integrate(sys, initial, IntegrationSettings{0.5, 24.0, 3.0});
        const TimeSeries ts = run.series("stock");
        REQUIRE(ts.times.size() == 9);
        for (std::size_t i = 1; i < ts.times.size(); ++i) {
            CHECK(ts.times[i] - ts.times[i - 1] == Approx(3.0));
            CHECK(ts.times[i] > ts.times[i - 1]);
        }
    }
    SECTION("recording at every step") {
        const RunResult run = integrate(sys, initial, IntegrationSettings{0.25, 4.0, 0.25});
        CHECK(run.sample_count() == 17);
    }
}

TEST_CASE("integrate: flow errors carry the failing timestamp") {
    const ThrowingSystem sys{3.0};
    const double initial[] = {0.0};
    CHECK_THROWS_MATCHES(integrate(sys, initial, IntegrationSettings{1.0, 10.0, 1.0}),
                         SimulationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("t = 3 months") &&
                             Catch::Matchers::ContainsSubstring("deliberate failure")));
}

TEST_CASE("integrate: initial state size must match the system") {
    const ConstantFlowSystem sys{1.0};
    const std::vector<double> wrong = {0.0, 0.0};
    CHECK_THROWS_AS(integrate(sys, wrong, IntegrationSettings{}), ValidationError);
}

TEST_CASE("run result: label lookup") {
    const ConstantFlowSystem sys{1.0};
    const double initial[] = {0.0};
    const RunResult run = integrate(sys, initial, IntegrationSettings{0.25, 1.0, 1.0});
    CHECK(run.has("stock"));
    CHECK_FALSE(run.has("nope"));
    CHECK_THROWS_AS(run.values("nope"), ValidationError);
}

TEST_CASE("format_double: shortest round-trip decimals") {
    CHECK(format_double(10000.0) == "10000");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(295680.0) == "295680");
    CHECK(format_double(58.333333333333336) == "58.333333333333336");
}
