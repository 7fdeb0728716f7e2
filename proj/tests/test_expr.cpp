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
#include <string>

#include "gbsde/expr.hpp"

using namespace gbsde;
using expr::Expression;

TEST_CASE("function call parses to a call node") {
    const Expression e = Expression::parse("pos(x-1)");
    CHECK(e.dump() == "call(pos, sub(var x, 1))");
    CHECK(e.eval(0, 3.0, 0, 0) == 2.0);
    CHECK(e.eval(0, 0.5, 0, 0) == 0.0);
}

TEST_CASE("arithmetic evaluation") {
    CHECK(Expression::parse("0.5*(x^2)").eval(0, 3.0, 0, 0) == doctest::Approx(4.5));
    CHECK(Expression::parse("2^3^2").eval(0, 0, 0, 0) == 512.0);
    CHECK(Expression::parse("-2^2").eval(0, 0, 0, 0) == -4.0);
    CHECK(Expression::parse("1-2-3").eval(0, 0, 0, 0) == -4.0);
    CHECK(Expression::parse("8/2/2").eval(0, 0, 0, 0) == 2.0);
    CHECK(Expression::parse("1+2*3").eval(0, 0, 0, 0) == 7.0);
    CHECK(Expression::parse("min(x, y) + max(x, y)").eval(0, 1.0, 2.0, 0) == 3.0);
    CHECK(Expression::parse("neg(x)").eval(0, -2.0, 0, 0) == 2.0);
    CHECK(Expression::parse("abs(z) + exp(0) + tanh(0)").eval(0, 0, 0, -3.0) == 4.0);
    CHECK(Expression::parse("t*y").eval(2.0, 0, 3.0, 0) == 6.0);
    CHECK(Expression::parse("1e-3").eval(0, 0, 0, 0) == 1e-3);
}

TEST_CASE("stray operator reports its column") {
    try {
        Expression::parse("2*x+*3");
        FAIL("expected a parse error");
    } catch (const expr::ParseError& e) {
        CHECK(e.where().line == 1);
        CHECK(e.where().column == 5);
        CHECK(e.code() == ErrorCode::Parse);
        CHECK_FALSE(e.expected().empty());
    }
}

TEST_CASE("syntax errors") {
    CHECK_THROWS_AS(Expression::parse(""), expr::ParseError);
    CHECK_THROWS_AS(Expression::parse("(x"), expr::ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(x)"), expr::ParseError);
    CHECK_THROWS_AS(Expression::parse("w + 1"), expr::ParseError);
    CHECK_THROWS_AS(Expression::parse("min(x)"), expr::ParseError);
    CHECK_THROWS_AS(Expression::parse("x y"), expr::ParseError);
}

TEST_CASE("division by zero is a run error spanning the quotient") {
    const Expression e = Expression::parse("2 + 1/(x-1)");
    CHECK(e.eval(0, 3.0, 0, 0) == 2.5);
    try {
        e.eval(0, 1.0, 0, 0);
        FAIL("expected an evaluation error");
    } catch (const expr::EvalError& err) {
        CHECK(err.where().column == 5);
        CHECK(err.where().length == 7);
        CHECK(err.code() == ErrorCode::Numerical);
    }
}

TEST_CASE("variable usage") {
    const Expression e = Expression::parse("t + z");
    CHECK(e.uses(expr::Var::T));
    CHECK(e.uses(expr::Var::Z));
    CHECK_FALSE(e.uses(expr::Var::X));
    CHECK(Expression::parse("2*3").is_constant());
}

namespace {

std::string random_expression(std::mt19937& rng, int depth) {
    static const char* leaves[] = {"x", "y", "z", "t", "1", "2.5", "0.125"};
    static const char* unary[] = {"abs", "exp", "tanh", "pos", "neg"};
    static const char* binary[] = {"+", "-", "*", "/", "^"};
    std::uniform_int_distribution<int> pick(0, 9);
    const int r = depth <= 0 ? 0 : pick(rng);
    if (r < 3) return leaves[rng() % 7];
    if (r < 5) return std::string(unary[rng() % 5]) + "(" + random_expression(rng, depth - 1) + ")";
    if (r < 6) return "-" + random_expression(rng, depth - 1);
    if (r < 7)
        return std::string(rng() % 2 ? "min" : "max") + "(" + random_expression(rng, depth - 1) + ", " +
               random_expression(rng, depth - 1) + ")";
    return "(" + random_expression(rng, depth - 1) + ")" + binary[rng() % 5] + random_expression(rng, depth - 1);
}

}  // namespace

TEST_CASE("parse, print, parse round-trips the tree") {
    std::mt19937 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const std::string src = random_expression(rng, 5);
        CAPTURE(src);
        const Expression a = Expression::parse(src);
        const Expression b = Expression::parse(a.print());
        CHECK(a == b);
        CHECK(a.dump() == b.dump());
        CHECK(a.print() == b.print());
    }
}

TEST_CASE("evaluation is total on finite inputs away from division by zero") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    int evaluated = 0;
    for (int i = 0; i < 500; ++i) {
        const Expression e = Expression::parse(random_expression(rng, 4));
        try {
            const double v = e.eval(d(rng), d(rng), d(rng), d(rng));
            (void)v;
            ++evaluated;
        } catch (const expr::EvalError&) {
        }
    }
    CHECK(evaluated > 400);
}
