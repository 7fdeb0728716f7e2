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
#pragma once

// Small arithmetic language for payoffs and generators.
//
//   expr    := sum
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | t | x | y | z | func '(' args ')' | '(' expr ')'
//   func    := abs exp tanh pos neg (one argument) | min max (two)

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "gbsde/error.hpp"

namespace gbsde::expr {

struct SourceSpan {
    int offset = 0;
    int length = 0;
    int line = 1;
    int column = 1;
};

class ParseError : public Error {
  public:
    ParseError(const std::string& message, SourceSpan where, std::vector<std::string> expected);
    const SourceSpan& where() const noexcept { return where_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

  private:
    SourceSpan where_;
    std::vector<std::string> expected_;
};

class EvalError : public Error {
  public:
    EvalError(const std::string& message, SourceSpan where);
    const SourceSpan& where() const noexcept { return where_; }

  private:
    SourceSpan where_;
};

enum class Var : int { T = 0, X = 1, Y = 2, Z = 3 };
enum class Func { Abs, Exp, Tanh, Pos, Neg, Min, Max };
enum class Op { Add, Sub, Mul, Div, Pow };

struct Node {
    enum class Kind { Number, Variable, Negate, Binary, Call } kind = Kind::Number;
    double number = 0.0;
    Var var = Var::X;
    Op op = Op::Add;
    Func func = Func::Abs;
    std::vector<int> children;
    SourceSpan span;
};

/// Variable values in (t, x, y, z) order.
using Bindings = std::array<double, 4>;

class Expression {
  public:
    static Expression parse(std::string_view source);

    double eval(const Bindings& vars) const;
    double eval(double t, double x, double y, double z) const { return eval(Bindings{t, x, y, z}); }

    /// Canonical text with minimal parentheses; parses back to an equal tree.
    std::string print() const;
    /// Tree dump such as call(pos, sub(var x, 1)).
    std::string dump() const;

    bool uses(Var v) const noexcept;
    bool is_constant() const noexcept;
    const std::string& source() const noexcept { return source_; }

    /// Structural equality of the trees; spans are ignored.
    friend bool operator==(const Expression& a, const Expression& b);

  private:
    struct Instr {
        enum class Code { Push, Load, Neg, Add, Sub, Mul, Div, Pow, Abs, Exp, Tanh, Pos, NegPart, Min, Max } code;
        double value = 0.0;
        int slot = 0;
        int node = 0;
    };

    void compile();
    void emit(int node);
    std::string print_node(int node) const;
    std::string dump_node(int node) const;

    std::string source_;
    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<Instr> program_;
    int stack_depth_ = 0;
    unsigned used_vars_ = 0;

    friend class Parser;
};

}  // namespace gbsde::expr
