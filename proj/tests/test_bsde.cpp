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
#include <memory>

#include "gbsde/bsde.hpp"

using namespace gbsde;

namespace {

const VolatilityBand kBand(0.5, 1.0);

Generator tanh_mix() {
    return Generator([](double, double y, double z) { return 0.2 * std::tanh(y) + 0.1 * std::tanh(z); }, {}, 0.2,
                     0.3);
}

}  // namespace

TEST_CASE("K increments are nonpositive and vanish exactly under bang-bang") {
    const Grids g = Grids::reference(kBand, 1.0, 201);
    const auto s = std::make_shared<const MarkovSurfaces>(
        solve_markovian(Payoff::butterfly(0.0, 1.0), Generator::zero(), kBand, g));
    auto controls = random_controls(8, 3, kBand, g);
    controls.push_back(bang_bang(s, Generator::zero(), kBand));
    for (std::size_t c = 0; c < controls.size(); ++c) {
        const PathBundle b = simulate_paths(controls[c], 50, 1, g, kBand);
        for (const auto& tr : extract_triples(*s, b, Generator::zero())) {
            for (double d : tr.dk) {
                CHECK_LE(d, 0.0);
                if (c + 1 == controls.size()) CHECK(d == 0.0);
            }
            CHECK(tr.k.front() == 0.0);
        }
    }
}

TEST_CASE("square payoff under the lower volatility loses exactly 0.75") {
    const Grids g = Grids::reference(kBand, 1.0, 201);
    const MarkovSurfaces s = solve_markovian(Payoff::square(1.0), Generator::zero(), kBand, g);
    const PathBundle b =
        simulate_paths(Control::open_loop(VolControl::constant(0.5, g.nt(), kBand)), 20, 5, g, kBand);
    for (const auto& tr : extract_triples(s, b, Generator::zero())) {
        CHECK(tr.k.back() == doctest::Approx(-0.75).epsilon(1e-9));
        CHECK(tr.clamped == 0);
    }
}

TEST_CASE("pathwise residual is small and shrinks under refinement") {
    const Grids g = Grids::reference(kBand, 1.0, 101);
    double res[2] = {0.0, 0.0};
    for (int level = 0; level < 2; ++level) {
        const Grids gl = level == 0 ? g : g.refined();
        const auto s = std::make_shared<const MarkovSurfaces>(solve_markovian(Payoff::call(0.0), tanh_mix(), kBand, gl));
        const PathBundle b = simulate_paths(bang_bang(s, tanh_mix(), kBand), 100, 2, gl, kBand);
        PathTriple tr;
        for (int p = 0; p < b.size(); ++p) {
            const Path path = b.path(p);
            extract_triple(*s, path, tanh_mix(), kBand, tr);
            res[level] = std::max(res[level], bsde_residual(tr, path, gl, tanh_mix(), terminal_value(Payoff::call(0.0), path, gl)));
        }
    }
    CHECK(res[0] < 0.15);
    CHECK(res[1] < res[0]);
}

TEST_CASE("time alignment puts t1 on a node") {
    const Grids g = Grids::reference(kBand, 1.0, 401);
    const Grids a = align_time_node(g, 0.5);
    CHECK(a.nt() >= g.nt());
    CHECK(a.t(a.nt() / 2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(a.nt() % 2 == 0);
    CHECK_THROWS_AS(align_time_node(g, 1.5), Error);
}

TEST_CASE("two-epoch pasting reproduces the closed form") {
    const Grids g = Grids::reference(kBand, 1.0, 201);
    TwoEpochProblem pb;
    pb.t1 = 0.5;
    pb.psi = [](double x, double y) { return x * x + y * y; };
    pb.gen = Generator::zero();
    pb.band = kBand;
    pb.grids = g;
    const TwoEpochSolution sol = solve_two_epoch(pb);
    CHECK(sol.y0() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.grids().t(sol.k1()) == doctest::Approx(0.5));
    // Y at t1 is x^2 + sigma_hi^2 (T - t1).
    const int j = g.nx() / 2 + 5;
    CHECK(sol.y_t1()[j] == doctest::Approx(sol.grids().x(j) * sol.grids().x(j) + 0.5).epsilon(1e-6));

    pb.psi = [](double x, double y) { return -(x + y) * (x + y); };
    CHECK(solve_two_epoch(pb).y0() == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("two-epoch triple along a path") {
    const Grids g = Grids::reference(kBand, 1.0, 101);
    TwoEpochProblem pb{0.5, [](double x, double y) { return x * x + y * y; }, Generator::zero(), kBand, g};
    const TwoEpochSolution sol = solve_two_epoch(pb);
    const PathBundle b = simulate_paths(random_controls(1, 3, kBand, sol.grids())[0], 4, 1, sol.grids(), kBand);
    PathTriple tr;
    for (int p = 0; p < b.size(); ++p) {
        const Path path = b.path(p);
        extract_two_epoch_triple(sol, path, tr);
        CHECK(tr.y.front() == doctest::Approx(sol.y0()));
        for (double d : tr.dk) CHECK_LE(d, 0.0);
        CHECK(bsde_residual(tr, path, sol.grids(), pb.gen, two_epoch_terminal(sol, path)) < 0.3);
    }
}

TEST_CASE("convergence table") {
    const Grids g = Grids::reference(kBand, 1.0, 51);
    const ControlFactory constant = [](const Grids& gl, std::shared_ptr<const MarkovSurfaces>) {
        return Control::open_loop(VolControl::constant(1.0, gl.nt(), kBand));
    };
    CHECK_THROWS_AS(convergence_table(Payoff::square(1.0), Generator::zero(), kBand, g, 1, constant, 10, 1), Error);

    const auto sq = convergence_table(Payoff::square(1.0), Generator::zero(), kBand, g, 3, constant, 10, 1);
    REQUIRE(sq.size() == 3);
    for (const auto& r : sq) CHECK(r.abs_err < 1e-9);
    CHECK(sq[1].nx == 2 * (g.nx() - 1) + 1);
    CHECK(sq[1].nt == 4 * g.nt());
    CHECK(std::isnan(sq[2].order));

    const auto call = convergence_table(Payoff::call(0.0), Generator::zero(), kBand, g, 3, constant, 10, 1);
    // Each level quarters dt, so first order in time shows as log2 ratio near 2.
    CHECK(call[0].order / 2.0 >= 0.5);
    CHECK(call[0].order / 2.0 <= 1.5);
}
