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

#include "gbsde/verify.hpp"

using namespace gbsde;

namespace {

const VolatilityBand kBand(0.5, 1.0);

VerifyConfig light() {
    VerifyConfig c;
    c.n_controls = 4;
    c.n_paths = 200;
    c.lipschitz_random_pairs = 20000;
    return c;
}

VerifyProblem square_problem(int nx = 201) {
    return {Payoff::square(1.0), Generator::zero(), kBand, Grids::reference(kBand, 1.0, nx)};
}

VerifyProblem call_problem(int nx = 201) {
    return {Payoff::call(0.0),
            Generator([](double, double y, double z) { return 0.2 * std::tanh(y) + 0.1 * std::tanh(z); }, {}, 0.2),
            kBand, Grids::reference(kBand, 1.0, nx)};
}

}  // namespace

TEST_CASE("report finalization") {
    VerifyReport r;
    r.measured = 1.0;
    r.bound = 0.9;
    r.tolerance = 0.1;
    r.finalize();
    CHECK(r.pass);
    r.measured = NAN;
    r.finalize();
    CHECK_FALSE(r.pass);
    r.details.emplace_back("a", 2.0);
    CHECK(r.detail("a") == 2.0);
}

TEST_CASE("check names and dispatch") {
    const auto& names = check_names();
    CHECK(names.size() == 7);
    CHECK(std::is_sorted(names.begin(), names.end()));
    const VerifyContext ctx(square_problem(), light());
    const auto one = run_checks({"decreasing"}, ctx);
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "check_decreasing");
    CHECK_THROWS_AS(run_checks({"nonsense"}, ctx), Error);
}

TEST_CASE("all checks pass on the square problem") {
    const VerifyContext ctx(square_problem(), light());
    for (const auto& r : run_checks({"all"}, ctx)) {
        CAPTURE(r.name);
        CAPTURE(r.measured);
        CHECK(r.pass);
    }
}

TEST_CASE("all checks pass on the call problem with a generator") {
    const VerifyContext ctx(call_problem(), light());
    for (const auto& r : run_checks({"all"}, ctx)) {
        CAPTURE(r.name);
        CAPTURE(r.measured);
        CHECK(r.pass);
    }
}

TEST_CASE("decreasing check is exact") {
    const VerifyContext ctx(square_problem(), light());
    const VerifyReport r = check_decreasing(ctx);
    CHECK(r.measured <= 0.0);
    CHECK(r.detail("equality_mismatches") == 0.0);
}

TEST_CASE("lipschitz check detects a violated constant") {
    const Grids g = Grids::reference(kBand, 1.0, 101);
    const ValueSurface u = solve_gheat(Payoff::call(0.0), Generator::zero(), kBand, g);
    CHECK(check_lipschitz(u, 1.0, 0.0, 0.0, kBand).pass);
    // Declaring half the true slope must fail.
    CHECK_FALSE(check_lipschitz(u, 0.5, 0.0, 0.0, kBand).pass);
}

TEST_CASE("stability responds linearly to scaled perturbations") {
    VerifyConfig c = light();
    c.perturbation = [](double, double y, double) { return 0.1 * std::cos(y); };
    const VerifyContext ctx(call_problem(), c);
    const VerifyReport r = check_stability(ctx);
    CHECK(r.pass);
    CHECK(r.measured == doctest::Approx(1.0).epsilon(0.2));
}
