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

#include "gbsde/core.hpp"
#include "oracles.hpp"

using namespace gbsde;

TEST_CASE("G function on the reference band") {
    const VolatilityBand band(0.5, 1.0);
    CHECK(g_function(2.0, band) == doctest::Approx(1.0));
    CHECK(g_function(-2.0, band) == doctest::Approx(-0.25));
    CHECK(g_function(0.0, band) == 0.0);
}

TEST_CASE("G is sublinear and monotone") {
    const VolatilityBand band(0.3, 1.2);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = d(rng), b = d(rng), s = std::abs(d(rng));
        CHECK(g_function(a + b, band) <= g_function(a, band) + g_function(b, band) + 1e-12);
        CHECK(g_function(s * a, band) == doctest::Approx(s * g_function(a, band)));
        if (a <= b) CHECK(g_function(a, band) <= g_function(b, band));
        // G(a) is the sup of a h^2 / 2 over h in the band.
        const double lo = 0.5 * a * band.lo2(), hi = 0.5 * a * band.hi2();
        CHECK(g_function(a, band) == doctest::Approx(std::max(lo, hi)));
    }
}

TEST_CASE("band validation") {
    CHECK_THROWS_AS(VolatilityBand(0.0, 1.0), Error);
    CHECK_THROWS_AS(VolatilityBand(1.0, 0.5), Error);
    CHECK_NOTHROW(VolatilityBand(1.0, 1.0));
    CHECK(VolatilityBand(1.0, 1.0).degenerate());
}

TEST_CASE("reference grid is stable and refines by 2 in space and 4 in time") {
    const VolatilityBand band(0.5, 1.0);
    const Grids g = Grids::reference(band, 1.0, 401);
    CHECK(g.nx() == 401);
    CHECK(g.x_lo() == doctest::Approx(-6.0));
    CHECK(g.x_hi() == doctest::Approx(6.0));
    CHECK(g.dx() == doctest::Approx(0.03));
    CHECK(g.cfl_ratio(band) <= 0.5);
    CHECK_NOTHROW(g.check_cfl(band));
    const Grids r = g.refined();
    CHECK(r.nx() == 801);
    CHECK(r.nt() == 4 * g.nt());
    CHECK(r.cfl_ratio(band) == doctest::Approx(g.cfl_ratio(band)));
    CHECK_THROWS_AS(g.with_nt(10).check_cfl(band), Error);
}

TEST_CASE("epoch grid covers a sub-interval with the same steps") {
    const Grids g(1.0, 100, -3.0, 3.0, 61);
    const Grids e = g.epoch(0.5, 1.0);
    CHECK(e.t_start() == doctest::Approx(0.5));
    CHECK(e.nt() == 50);
    CHECK(e.dt() == doctest::Approx(g.dt()));
    CHECK(e.t(e.nt()) == doctest::Approx(1.0));
}

TEST_CASE("song constant matches the brute-force grid minimum") {
    const double c = song_constant(1.0, 1.0);
    CHECK(std::abs(c - oracle::kSongGridMin) / oracle::kSongGridMin < 0.01);
    CHECK(c <= oracle::kSongGridMin + 1e-9);
    CHECK(song_constant(1.0, 3.0) == doctest::Approx(oracle::kSongAlpha1Delta3).epsilon(0.01));
    CHECK(song_constant(2.0, 1.0) == doctest::Approx(oracle::kSongAlpha2Delta1).epsilon(0.01));
    CHECK_THROWS_AS(song_constant(0.5, 1.0), Error);
    CHECK_THROWS_AS(song_constant(1.0, 0.0), Error);
}

TEST_CASE("catalog payoffs") {
    CHECK(Payoff::call(1.0)(3.0) == 2.0);
    CHECK(Payoff::call(1.0)(0.0) == 0.0);
    CHECK(Payoff::put(1.0)(0.0) == 1.0);
    CHECK(Payoff::linear(2.0, 1.0)(3.0) == 7.0);
    CHECK(Payoff::square(0.5)(2.0) == doctest::Approx(2.0));
    const Payoff b = Payoff::butterfly(0.0, 1.0);
    CHECK(b(0.0) == doctest::Approx(1.0));
    CHECK(b(1.0) == doctest::Approx(0.0));
    CHECK(b(2.0) == doctest::Approx(0.0));
    CHECK(b.lipschitz() == doctest::Approx(1.0));
    CHECK(std::isinf(Payoff::square(1.0).lipschitz()));
    CHECK(Payoff::square(1.0).realized_lipschitz(-6.0, 6.0) == doctest::Approx(12.0));
}

TEST_CASE("undeclared payoff slope is sampled") {
    const Payoff p(PayoffKind::Expression, [](double x) { return x * x; }, INFINITY);
    CHECK(p.realized_lipschitz(-6.0, 6.0) == doctest::Approx(12.0).epsilon(1e-3));
}

TEST_CASE("generator validation and observed slope") {
    CHECK_THROWS_AS(Generator({}, {}, -1.0), Error);
    const Generator gen([](double, double y, double) { return 0.5 * y; }, {}, 0.5);
    const Grids g(1.0, 100, -3.0, 3.0, 61);
    CHECK(observed_lipschitz(gen, g, 10.0, 10.0) == doctest::Approx(0.5));
    CHECK(observed_lipschitz(Payoff::call(0.0), g) == doctest::Approx(1.0));
}
