/*
 Copyright 2026 gbsde contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gbsde/bsde.hpp"
#include "gbsde/expectation.hpp"
#include "oracles.hpp"

using namespace gbsde;

namespace {

const VolatilityBand kBand(0.5, 1.0);

IncrementPayoff of_terminal(std::function<double(double)> f, double horizon = 1.0) {
    return IncrementPayoff({horizon}, [f](std::span<const double> d) { return f(d[0]); });
}

IncrementPayoff two_step(std::function<double(double, double)> f, double t1 = 0.5, double horizon = 1.0) {
    return IncrementPayoff({t1, horizon}, [f](std::span<const double> d) { return f(d[0], d[1]); });
}

Grids grid(int nx = 201) { return align_time_node(Grids::reference(kBand, 1.0, nx), 0.5); }

}  // namespace

TEST_CASE("sublinear second moments") {
    const Grids g = Grids::reference(kBand, 1.0, 401);
    CHECK(std::abs(g_expectation(of_terminal([](double x) { return x * x; }), kBand, g) - 1.0) <= 2e-3);
    CHECK(std::abs(g_expectation(of_terminal([](double x) { return -x * x; }), kBand, g) + 0.25) <= 2e-3);
}

TEST_CASE("classical reduction matches quadrature") {
    const VolatilityBand one(1.0, 1.0);
    const Grids g = Grids::reference(one, 1.0, 401);
    const double v = g_expectation(of_terminal([](double x) { return std::max(x - 0.5, 0.0); }), one, g);
    CHECK(std::abs(v - oracle::kCallHalfStrike) <= 2e-3);
}

TEST_CASE("conditional expectation of a convex function of the second increment") {
    const Grids g = grid();
    const TensorTable t = conditional_g_expectation(two_step([](double x, double d) { return (x + d) * (x + d); }),
                                                    1, kBand, g);
    CHECK(t.dims() == 1);
    for (double x : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
        const double v = t.interpolate(std::span<const double>(&x, 1));
        CHECK(v == doctest::Approx(x * x + 0.5).epsilon(2e-3));
    }
}

TEST_CASE("two increments reproduce the terminal moment and the tower property") {
    const Grids g = grid();
    const auto sq = two_step([](double x, double y) { return (x + y) * (x + y); });
    CHECK(g_expectation(sq, kBand, g) == doctest::Approx(1.0).epsilon(2e-3));
    // -(x+y)^2 mixes signs of curvature; both epochs run at the lower variance.
    const auto neg = two_step([](double x, double y) { return -(x + y) * (x + y); });
    CHECK(g_expectation(neg, kBand, g) == doctest::Approx(-0.25).epsilon(2e-3));

    // Tower: E[phi] = E[E[phi | B_t1]] computed as a one-increment problem.
    const auto mixed = two_step([](double x, double y) { return std::max(x, 0.0) * std::tanh(y) + std::abs(y - x); });
    const TensorTable inner = conditional_g_expectation(mixed, 1, kBand, g);
    const auto outer = IncrementPayoff({0.5}, [&](std::span<const double> d) { return inner.interpolate(d); });
    CHECK(g_expectation(outer, kBand, g) == doctest::Approx(g_expectation(mixed, kBand, g)).epsilon(1e-9));
}

TEST_CASE("sublinear expectation properties") {
    const Grids g = grid();
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng);
        const auto X = [=](double x) { return a * std::max(x - b, 0.0) - c * std::abs(x); };
        const auto Y = [=](double x) { return std::sin(2.0 * x + a) + b * x; };
        const double ex = g_expectation(of_terminal(X), kBand, g);
        const double ey = g_expectation(of_terminal(Y), kBand, g);
        const double exy = g_expectation(of_terminal([&](double x) { return X(x) + Y(x); }), kBand, g);
        const double emx = g_expectation(of_terminal([&](double x) { return -X(x); }), kBand, g);
        const double e3x = g_expectation(of_terminal([&](double x) { return 3.0 * X(x); }), kBand, g);
        const double exc = g_expectation(of_terminal([&](double x) { return X(x) + 0.7; }), kBand, g);
        CHECK(exy <= ex + ey + 1e-10);
        CHECK(-emx <= ex + 1e-10);
        CHECK(e3x == doctest::Approx(3.0 * ex).epsilon(1e-9));
        CHECK(exc == doctest::Approx(ex + 0.7).epsilon(1e-9));
    }
    CHECK(g_expectation(of_terminal([](double) { return 1.25; }), kBand, g) == doctest::Approx(1.25));
}

TEST_CASE("Brownian increments have zero mean and zero lower mean") {
    const Grids g = grid();
    CHECK(std::abs(g_expectation(of_terminal([](double x) { return x; }), kBand, g)) < 1e-9);
    CHECK(std::abs(g_expectation(of_terminal([](double x) { return -x; }), kBand, g)) < 1e-9);
    // A later increment times anything known earlier still has zero mean.
    CHECK(std::abs(g_expectation(two_step([](double x, double y) { return std::tanh(x) * y; }), kBand, g)) < 1e-9);
    // An odd function of the increment need not: the sup picks the volatility by the sign of the curvature.
    CHECK(g_expectation(of_terminal([](double x) { return std::tanh(x); }), kBand, g) > 1e-3);
}

TEST_CASE("lattice budget is enforced") {
    const Grids g = grid();
    CHECK_THROWS_AS(g_expectation(two_step([](double x, double y) { return x * y; }), kBand, g, 1e3), Error);
    CHECK_THROWS_AS(IncrementPayoff({0.5, 0.4}, [](std::span<const double>) { return 0.0; }), Error);
}

TEST_CASE("constant controls give exact quadratic variation") {
    const Grids g = grid();
    const PathBundle hi = simulate_paths(Control::open_loop(VolControl::constant(1.0, g.nt(), kBand)), 20, 3, g, kBand);
    const PathBundle lo = simulate_paths(Control::open_loop(VolControl::constant(0.5, g.nt(), kBand)), 20, 3, g, kBand);
    for (int p = 0; p < 20; ++p) {
        const Path a = hi.path(p), b = lo.path(p);
        CHECK(a.qv.back() == 1.0);
        CHECK(b.qv.back() == 0.25);
        // Common random numbers: the same normals scaled by the volatility.
        CHECK(a.b[7] == doctest::Approx(2.0 * b.b[7]));
    }
}

TEST_CASE("random controls stay in the band and qv in its envelope") {
    const Grids g = grid();
    const auto controls = random_controls(16, 9, kBand, g);
    CHECK(controls.size() == 16);
    const PathBundle bundle = simulate_paths(controls[3], 5, 2, g, kBand);
    for (int p = 0; p < 5; ++p) {
        const Path path = bundle.path(p);
        for (double r : path.rate) {
            CHECK(r >= kBand.lo2());
            CHECK(r <= kBand.hi2());
        }
        for (int k = 0; k <= g.nt(); ++k) {
            CHECK(path.qv[k] >= kBand.lo2() * g.t(k) - 1e-12);
            CHECK(path.qv[k] <= kBand.hi2() * g.t(k) + 1e-12);
        }
    }
    // The family is keyed per member, so a shorter family is a prefix.
    const auto prefix = random_controls(4, 9, kBand, g);
    CHECK(prefix[2] == controls[2]);
}

TEST_CASE("paths are reproducible one at a time") {
    const Grids g = grid();
    const auto c = random_controls(2, 1, kBand, g)[1];
    const PathBundle a = simulate_paths(c, 100, 42, g, kBand);
    const PathBundle b = simulate_paths(c, 10, 42, g, kBand);
    CHECK(a.path(7).b == b.path(7).b);
    CHECK(a.path(7).qv == b.path(7).qv);
    CHECK(a.path(7).b != a.path(8).b);
}

TEST_CASE("piecewise control and band checks") {
    const Grids g = grid();
    const std::vector<double> breaks{0.0, 0.5}, vols{0.5, 1.0};
    const VolControl v = VolControl::piecewise(breaks, vols, g, kBand);
    CHECK(v.vols().front() == 0.5);
    CHECK(v.vols().back() == 1.0);
    CHECK_THROWS_AS(VolControl::constant(2.0, g.nt(), kBand), Error);
}

TEST_CASE("Monte Carlo under sampled controls stays below the lattice value") {
    const Grids g = grid();
    const auto payoff = IncrementPayoff::terminal(Payoff::butterfly(0.0, 1.0), 1.0);
    const double lattice = g_expectation(payoff, kBand, g);
    const auto controls = random_controls(6, 4, kBand, g);
    const SupResult sup = sup_over_controls(payoff, controls, 2000, 8, g, kBand);
    for (const auto& e : sup.estimates) CHECK(e.mean - 3.0 * e.stderr_ <= lattice);
}

TEST_CASE("mc bound rejects a foreign control") {
    const Grids g = grid();
    const auto cs = random_controls(2, 1, kBand, g);
    const PathBundle b = simulate_paths(cs[0], 10, 1, g, kBand);
    CHECK_THROWS_AS(mc_bound(IncrementPayoff::terminal(Payoff::call(0.0), 1.0), cs[1], b), Error);
}

TEST_CASE("summary statistics") {
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    const McEstimate e = summarize(s);
    CHECK(e.mean == 2.5);
    CHECK(e.n == 4);
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
