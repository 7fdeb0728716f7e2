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
#include <cstring>
#include <string>
#include <vector>

#include "gbsde/gbsde.h"
#include "oracles.hpp"

namespace {

struct ProblemGuard {
    gbsde_problem* p = nullptr;
    ~ProblemGuard() { gbsde_problem_free(p); }
};

}  // namespace

TEST_CASE("scalar helpers and error reporting") {
    double v = 0;
    CHECK(gbsde_g_function(2.0, 0.5, 1.0, &v) == GBSDE_OK);
    CHECK(v == doctest::Approx(1.0));
    CHECK(gbsde_g_function(2.0, 1.0, 0.5, &v) == GBSDE_INVALID_ARGUMENT);
    CHECK(std::strlen(gbsde_last_error()) > 0);
    CHECK(gbsde_g_function(2.0, 0.5, 1.0, nullptr) == GBSDE_INVALID_ARGUMENT);
    CHECK(gbsde_song_constant(1.0, 1.0, &v) == GBSDE_OK);
    CHECK(std::abs(v - oracle::kSongGridMin) / oracle::kSongGridMin < 0.01);
    CHECK(gbsde_song_constant(0.5, 1.0, &v) == GBSDE_DOMAIN);
    CHECK(std::string(gbsde_status_name(GBSDE_CFL)) == "cfl");
    CHECK(std::string(gbsde_version()).size() > 0);
}

TEST_CASE("expressions through the C API") {
    gbsde_expression* e = nullptr;
    REQUIRE(gbsde_expression_parse("pos(x-1)", &e) == GBSDE_OK);
    double v = 0;
    CHECK(gbsde_expression_eval(e, 0, 3.0, 0, 0, &v) == GBSDE_OK);
    CHECK(v == 2.0);
    size_t needed = 0;
    CHECK(gbsde_expression_dump(e, nullptr, 0, &needed) == GBSDE_OK);
    std::vector<char> buf(needed);
    CHECK(gbsde_expression_dump(e, buf.data(), buf.size(), &needed) == GBSDE_OK);
    CHECK(std::string(buf.data()) == "call(pos, sub(var x, 1))");
    char small[4];
    CHECK(gbsde_expression_print(e, small, sizeof small, &needed) == GBSDE_INVALID_ARGUMENT);
    CHECK(std::strlen(small) == 3);
    gbsde_expression_free(e);

    e = nullptr;
    CHECK(gbsde_expression_parse("2*x+*3", &e) == GBSDE_PARSE);
    CHECK(e == nullptr);
    CHECK(std::string(gbsde_last_error()).find("column 5") != std::string::npos);
    gbsde_expression_free(nullptr);
}

TEST_CASE("solve, paths and triple") {
    ProblemGuard g;
    REQUIRE(gbsde_problem_create(0.5, 1.0, 1.0, 201, 0, 6.0, &g.p) == GBSDE_OK);
    gbsde_solution* s = nullptr;
    CHECK(gbsde_solve(g.p, &s) == GBSDE_INVALID_ARGUMENT);  // no payoff yet
    REQUIRE(gbsde_problem_set_payoff_expr(g.p, "x^2", INFINITY) == GBSDE_OK);
    CHECK(gbsde_problem_set_payoff_expr(g.p, "x+y", 1.0) == GBSDE_INVALID_ARGUMENT);
    CHECK(gbsde_problem_set_generator(g.p, "x", nullptr, 1.0, -1.0) == GBSDE_INVALID_ARGUMENT);
    REQUIRE(gbsde_problem_set_generator(g.p, "0", "", 0.0, -1.0) == GBSDE_OK);
    REQUIRE(gbsde_solve(g.p, &s) == GBSDE_OK);
    double y0 = 0;
    CHECK(gbsde_solution_y0(s, &y0) == GBSDE_OK);
    CHECK(y0 == doctest::Approx(1.0).epsilon(1e-6));

    int nx = 0, nt = 0;
    CHECK(gbsde_problem_grid(g.p, &nx, &nt, nullptr, nullptr, nullptr) == GBSDE_OK);
    CHECK(nx == 201);
    double u = 0, uxx = 0;
    CHECK(gbsde_solution_node(s, 0, 100, &u, nullptr, &uxx) == GBSDE_OK);
    CHECK(uxx == doctest::Approx(2.0));
    CHECK(gbsde_solution_node(s, nt + 1, 0, &u, nullptr, nullptr) == GBSDE_INVALID_ARGUMENT);

    gbsde_paths* paths = nullptr;
    CHECK(gbsde_paths_simulate(g.p, s, "constant:2", 4, 1, &paths) == GBSDE_DOMAIN);
    CHECK(gbsde_paths_simulate(g.p, s, "wobble", 4, 1, &paths) == GBSDE_INVALID_ARGUMENT);
    CHECK(gbsde_paths_simulate(g.p, nullptr, "bang_bang", 4, 1, &paths) == GBSDE_INVALID_ARGUMENT);
    REQUIRE(gbsde_paths_simulate(g.p, s, "constant:0.5", 400, 1, &paths) == GBSDE_OK);
    std::vector<double> y(nt + 1), z(nt + 1), k(nt + 1), qv(nt + 1);
    double res = 0;
    int clamped = -1;
    CHECK(gbsde_paths_get(paths, 0, nullptr, qv.data(), nullptr) == GBSDE_OK);
    CHECK(qv.back() == 0.25);
    CHECK(gbsde_triple(s, paths, 0, y.data(), z.data(), k.data(), &res, &clamped) == GBSDE_OK);
    CHECK(k.back() == doctest::Approx(-0.75));
    CHECK(clamped == 0);
    // Only the stochastic integral's discretization remains.
    CHECK(res < 0.05);
    double mean = 0, se = 0;
    CHECK(gbsde_mc_bound(g.p, paths, &mean, &se) == GBSDE_OK);
    CHECK(std::abs(mean - 0.25) < 4 * se + 1e-3);
    gbsde_paths_free(paths);

    paths = nullptr;
    REQUIRE(gbsde_paths_simulate(g.p, s, "piecewise:0=0.5;0.5=1", 2, 1, &paths) == GBSDE_OK);
    std::vector<double> rate(nt);
    CHECK(gbsde_paths_get(paths, 1, nullptr, nullptr, rate.data()) == GBSDE_OK);
    CHECK(rate.front() == 0.25);
    CHECK(rate.back() == 1.0);
    gbsde_paths_free(paths);
    gbsde_solution_free(s);
}

TEST_CASE("lattice expectation through the C API") {
    ProblemGuard g;
    REQUIRE(gbsde_problem_create(0.5, 1.0, 1.0, 201, 0, 6.0, &g.p) == GBSDE_OK);
    REQUIRE(gbsde_problem_align_time(g.p, 0.5) == GBSDE_OK);
    const double times[] = {0.5, 1.0};
    double v = 0;
    CHECK(gbsde_g_expectation(g.p, 2, times, "(x+y)^2", &v) == GBSDE_OK);
    CHECK(v == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(gbsde_g_expectation(g.p, 2, times, "t", &v) == GBSDE_INVALID_ARGUMENT);
    size_t count = 0;
    CHECK(gbsde_conditional_g_expectation(g.p, 2, times, "(x+y)^2", 1, nullptr, 0, &count) ==
          GBSDE_INVALID_ARGUMENT);
    CHECK(count == 201);
    std::vector<double> table(count);
    CHECK(gbsde_conditional_g_expectation(g.p, 2, times, "(x+y)^2", 1, table.data(), table.size(), &count) ==
          GBSDE_OK);
    CHECK(table[100] == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("two epochs through the C API") {
    ProblemGuard g;
    REQUIRE(gbsde_problem_create(0.5, 1.0, 1.0, 101, 0, 6.0, &g.p) == GBSDE_OK);
    REQUIRE(gbsde_problem_align_time(g.p, 0.5) == GBSDE_OK);
    gbsde_two_epoch* te = nullptr;
    CHECK(gbsde_two_epoch_solve(g.p, 0.5, "x^2+z", &te) == GBSDE_INVALID_ARGUMENT);
    REQUIRE(gbsde_two_epoch_solve(g.p, 0.5, "x^2+y^2", &te) == GBSDE_OK);
    double y0 = 0;
    int nt = 0, k1 = 0;
    CHECK(gbsde_two_epoch_info(te, &y0, &nt, &k1) == GBSDE_OK);
    CHECK(y0 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(2 * k1 == nt);
    std::vector<double> slice(101);
    CHECK(gbsde_two_epoch_member_slice(te, 50, nt - k1, slice.data(), slice.size()) == GBSDE_OK);
    CHECK(slice[50] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gbsde_two_epoch_early_slice(te, k1 + 1, slice.data(), slice.size()) == GBSDE_INVALID_ARGUMENT);

    gbsde_paths* paths = nullptr;
    REQUIRE(gbsde_paths_simulate(g.p, nullptr, "random:0", 2, 1, &paths) == GBSDE_OK);
    std::vector<double> y(nt + 1);
    double res = 0;
    CHECK(gbsde_two_epoch_triple(te, paths, 0, y.data(), nullptr, nullptr, &res, nullptr) == GBSDE_OK);
    CHECK(y.front() == doctest::Approx(y0));
    gbsde_paths_free(paths);
    gbsde_two_epoch_free(te);
}

TEST_CASE("verification reports through the C API") {
    ProblemGuard g;
    REQUIRE(gbsde_problem_create(0.5, 1.0, 1.0, 201, 0, 6.0, &g.p) == GBSDE_OK);
    REQUIRE(gbsde_problem_set_payoff(g.p, "square", 1.0, 0.0) == GBSDE_OK);
    gbsde_verify_options o;
    gbsde_verify_options_init(&o);
    CHECK(std::isnan(o.lw));
    o.n_controls = 4;
    o.n_paths = 100;
    gbsde_reports* r = nullptr;
    CHECK(gbsde_verify(g.p, &o, "bogus", &r) == GBSDE_INVALID_ARGUMENT);
    REQUIRE(gbsde_verify(g.p, &o, "decreasing, martingale_K", &r) == GBSDE_OK);
    REQUIRE(gbsde_reports_count(r) == 2);
    const char* name = nullptr;
    int pass = 0;
    CHECK(gbsde_reports_get(r, 0, &name, &pass, nullptr, nullptr, nullptr) == GBSDE_OK);
    CHECK(std::string(name) == "check_decreasing");
    CHECK(pass == 1);
    CHECK(gbsde_reports_detail_count(r, 0) > 0);
    const char* key = nullptr;
    CHECK(gbsde_reports_detail(r, 0, 0, &key, nullptr) == GBSDE_OK);
    CHECK(key != nullptr);
    CHECK(gbsde_reports_get(r, 5, &name, nullptr, nullptr, nullptr, nullptr) == GBSDE_INVALID_ARGUMENT);
    gbsde_reports_free(r);
}

TEST_CASE("convergence through the C API") {
    ProblemGuard g;
    REQUIRE(gbsde_problem_create(0.5, 1.0, 1.0, 51, 0, 6.0, &g.p) == GBSDE_OK);
    REQUIRE(gbsde_problem_set_payoff(g.p, "square", 1.0, 0.0) == GBSDE_OK);
    gbsde_convergence_row rows[3];
    size_t count = 0;
    CHECK(gbsde_convergence(g.p, 1, "constant:1", 5, 1, rows, 3, &count) == GBSDE_INVALID_ARGUMENT);
    REQUIRE(gbsde_convergence(g.p, 3, "bang_bang", 5, 1, rows, 3, &count) == GBSDE_OK);
    CHECK(count == 3);
    for (const auto& r : rows) CHECK(r.abs_err < 1e-9);
    CHECK(std::isnan(rows[2].order));
}
