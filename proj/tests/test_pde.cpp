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
#include <vector>

#include "gbsde/bsde.hpp"
#include "gbsde/pde.hpp"
#include "oracles.hpp"

using namespace gbsde;

namespace {

const VolatilityBand kBand(0.5, 1.0);

Grids small_grid(const VolatilityBand& band = kBand) { return Grids::reference(band, 1.0, 201); }

}  // namespace

TEST_CASE("square payoff grows at the upper variance") {
    const ValueSurface u = solve_gheat(Payoff::square(1.0), Generator::zero(), kBand, small_grid());
    CHECK(u.at_origin(0) == doctest::Approx(1.0).epsilon(1e-6));
    // Away from the boundary u(t, x) = x^2 + (1 - t) exactly.
    const Grids& g = u.grids();
    const int k = g.nt() / 2;
    for (int j = g.nx() / 4; j <= 3 * g.nx() / 4; j += 10)
        CHECK(u(k, j) == doctest::Approx(g.x(j) * g.x(j) + 1.0 - g.t(k)).epsilon(1e-6));
}

TEST_CASE("negated square uses the lower variance") {
    const Payoff p(PayoffKind::Expression, [](double x) { return -x * x; }, INFINITY);
    const ValueSurface u = solve_gheat(p, Generator::zero(), kBand, small_grid());
    CHECK(u.at_origin(0) == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("convex payoff collapses to the classical price at the upper volatility") {
    const Grids g = Grids::reference(kBand, 1.0, 401);
    const ValueSurface u = solve_gheat(Payoff::call(0.0), Generator::zero(), kBand, g);
    CHECK(std::abs(u.at_origin(0) - oracle::kCallAtTheMoney) <= 2e-3);
}

TEST_CASE("degenerate band is the classical heat equation") {
    const VolatilityBand one(1.0, 1.0);
    const ValueSurface u = solve_gheat(Payoff::call(0.5), Generator::zero(), one, Grids::reference(one, 1.0, 401));
    CHECK(std::abs(u.at_origin(0) - oracle::kCallHalfStrike) <= 2e-3);
}

TEST_CASE("convexity propagates") {
    const ValueSurface u = solve_gheat(Payoff::call(0.0), Generator::zero(), kBand, small_grid());
    const ValueSurface uxx = second_derivative(u);
    const Grids& g = u.grids();
    double worst = 0.0;
    for (int k = 0; k < g.nt(); ++k)
        for (int j = 1; j + 1 < g.nx(); ++j) worst = std::min(worst, uxx(k, j));
    CHECK(worst >= -g.dx());
}

TEST_CASE("comparison: ordered payoffs give ordered solutions") {
    const Grids g = small_grid();
    const ValueSurface a = solve_gheat(Payoff::butterfly(0.0, 1.0), Generator::zero(), kBand, g);
    const ValueSurface b = solve_gheat(Payoff::call(-1.0), Generator::zero(), kBand, g);
    for (std::size_t i = 0; i < a.values().size(); ++i) CHECK_LE(a.values()[i], b.values()[i] + 1e-12);
}

TEST_CASE("constants are preserved and translate") {
    const Grids g = small_grid();
    const ValueSurface c = solve_gheat(Payoff::linear(0.0, 2.5), Generator::zero(), kBand, g);
    for (double v : c.values()) CHECK(v == doctest::Approx(2.5));
    const ValueSurface a = solve_gheat(Payoff::butterfly(0.0, 1.0), Generator::zero(), kBand, g);
    const Payoff shifted(PayoffKind::Expression, [](double x) { return Payoff::butterfly(0.0, 1.0)(x) + 3.0; }, 1.0);
    const ValueSurface b = solve_gheat(shifted, Generator::zero(), kBand, g);
    for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(b.values()[i] == doctest::Approx(a.values()[i] + 3.0));
}

TEST_CASE("positive homogeneity in the payoff") {
    const Grids g = small_grid();
    const ValueSurface a = solve_gheat(Payoff::butterfly(0.0, 1.0), Generator::zero(), kBand, g);
    const Payoff scaled(PayoffKind::Expression, [](double x) { return 3.0 * Payoff::butterfly(0.0, 1.0)(x); }, 3.0);
    const ValueSurface b = solve_gheat(scaled, Generator::zero(), kBand, g);
    for (std::size_t i = 0; i < a.values().size(); i += 97) CHECK(b.values()[i] == doctest::Approx(3.0 * a.values()[i]));
}

TEST_CASE("constant generator adds its integral") {
    const Grids g = small_grid();
    const ValueSurface u = solve_gheat(Payoff::call(0.0), Generator::constant(0.3), kBand, g);
    const ValueSurface v = solve_gheat(Payoff::call(0.0), Generator::zero(), kBand, g);
    CHECK(u.at_origin(0) == doctest::Approx(v.at_origin(0) + 0.3).epsilon(1e-9));
}

TEST_CASE("explicit scheme rejects an unstable step") {
    const Grids g = small_grid().with_nt(5);
    CHECK_THROWS_AS(solve_gheat(Payoff::call(0.0), Generator::zero(), kBand, g), Error);
}

TEST_CASE("initial slice agrees with the full surface") {
    const Grids g = small_grid();
    const ValueSurface u = solve_gheat(Payoff::butterfly(0.0, 1.0), Generator::zero(), kBand, g);
    std::vector<double> terminal(g.nx());
    for (int j = 0; j < g.nx(); ++j) terminal[j] = Payoff::butterfly(0.0, 1.0)(g.x(j));
    const auto slice = gheat_initial_slice(terminal, kBand, g);
    for (int j = 0; j < g.nx(); ++j) CHECK(slice[j] == doctest::Approx(u(0, j)));
}

TEST_CASE("derivative surfaces of a quadratic") {
    const MarkovSurfaces s = solve_markovian(Payoff::square(1.0), Generator::zero(), kBand, small_grid());
    const Grids& g = s.u.grids();
    const int j = g.nx() / 2 + 10;
    CHECK(s.ux(0, j) == doctest::Approx(2.0 * g.x(j)).epsilon(1e-6));
    CHECK(s.uxx(0, j) == doctest::Approx(2.0).epsilon(1e-6));
}
