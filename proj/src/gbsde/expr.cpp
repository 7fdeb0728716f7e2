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
#include "gbsde/expr.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace gbsde::expr {

namespace {

std::string describe(const SourceSpan& s) {
    return "line " + std::to_string(s.line) + ", column " + std::to_string(s.column);
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += i + 1 == items.size() ? " or " : ", ";
        out += items[i];
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::string_view text;
    double number = 0.0;
    SourceSpan span;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Number: return "number";
        case Tok::Ident: return "identifier";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Caret: return "'^'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::End: return "end of input";
    }
    return "?";
}

const std::vector<std::string> kOperandStart = {"number", "variable", "function", "'('", "'-'"};

struct FuncInfo {
    std::string_view name;
    Func func;
    int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"abs", Func::Abs, 1}, {"exp", Func::Exp, 1}, {"tanh", Func::Tanh, 1}, {"pos", Func::Pos, 1},
    {"neg", Func::Neg, 1}, {"min", Func::Min, 2}, {"max", Func::Max, 2},
};

const char* func_name(Func f) {
    for (const auto& info : kFuncs)
        if (info.func == f) return info.name.data();
    return "?";
}

const char* var_name(Var v) {
    switch (v) {
        case Var::T: return "t";
        case Var::X: return "x";
        case Var::Y: return "y";
        case Var::Z: return "z";
    }
    return "?";
}

const char* op_symbol(Op op) {
    switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Pow: return "^";
    }
    return "?";
}

const char* op_dump_name(Op op) {
    switch (op) {
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Pow: return "pow";
    }
    return "?";
}

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
        SourceSpan span{static_cast<int>(pos_), 1, line_, column_};
        if (pos_ >= src_.size()) return {Tok::End, {}, 0.0, {span.offset, 0, line_, column_}};
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(span);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            span.length = static_cast<int>(pos_ - start);
            return {Tok::Ident, src_.substr(start, pos_ - start), 0.0, span};
        }
        Tok kind;
        switch (c) {
            case '+': kind = Tok::Plus; break;
            case '-': kind = Tok::Minus; break;
            case '*': kind = Tok::Star; break;
            case '/': kind = Tok::Slash; break;
            case '^': kind = Tok::Caret; break;
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case ',': kind = Tok::Comma; break;
            default:
                throw ParseError("unexpected character '" + std::string(1, c) + "' at " + describe(span), span,
                                 kOperandStart);
        }
        advance();
        return {kind, src_.substr(span.offset, 1), 0.0, span};
    }

  private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    Token number(SourceSpan span) {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            int save_col = column_;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                pos_ = save;
                column_ = save_col;
            }
        }
        const std::string_view text = src_.substr(start, pos_ - start);
        span.length = static_cast<int>(text.size());
        double value = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value))
            throw ParseError("malformed number '" + std::string(text) + "' at " + describe(span), span,
                             {"number"});
        return {Tok::Number, text, value, span};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

}  // namespace

//---------------------------------------------------------------------------//
ParseError::ParseError(const std::string& message, SourceSpan where, std::vector<std::string> expected)
    : Error(ErrorCode::Parse, message), where_(where), expected_(std::move(expected)) {}

EvalError::EvalError(const std::string& message, SourceSpan where)
    : Error(ErrorCode::Numerical, message), where_(where) {}

//---------------------------------------------------------------------------//
class Parser {
  public:
    Parser(std::string_view src, Expression& out) : lex_(src), out_(out) { tok_ = lex_.next(); }

    void run() {
        out_.root_ = sum();
        if (tok_.kind != Tok::End) unexpected({"operator", "end of input"});
    }

  private:
    [[noreturn]] void unexpected(const std::vector<std::string>& expected) {
        std::string what = tok_.kind == Tok::End ? "end of input" : "'" + std::string(tok_.text) + "'";
        throw ParseError("syntax error at " + describe(tok_.span) + ": unexpected " + what + ", expected " +
                             join(expected),
                         tok_.span, expected);
    }

    void expect(Tok kind) {
        if (tok_.kind != kind) unexpected({tok_name(kind)});
        tok_ = lex_.next();
    }

    int add(Node n) {
        out_.nodes_.push_back(std::move(n));
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    SourceSpan merge(int a, int b) const {
        SourceSpan s = out_.nodes_[a].span;
        const SourceSpan& e = out_.nodes_[b].span;
        s.length = e.offset + e.length - s.offset;
        return s;
    }

    int binary(Op op, int lhs, int rhs) {
        Node n;
        n.kind = Node::Kind::Binary;
        n.op = op;
        n.children = {lhs, rhs};
        n.span = merge(lhs, rhs);
        return add(std::move(n));
    }

    int sum() {
        int lhs = product();
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            const Op op = tok_.kind == Tok::Plus ? Op::Add : Op::Sub;
            tok_ = lex_.next();
            lhs = binary(op, lhs, product());
        }
        return lhs;
    }

    int product() {
        int lhs = unary();
        while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
            const Op op = tok_.kind == Tok::Star ? Op::Mul : Op::Div;
            tok_ = lex_.next();
            lhs = binary(op, lhs, unary());
        }
        return lhs;
    }

    int unary() {
        if (tok_.kind == Tok::Minus) {
            SourceSpan s = tok_.span;
            tok_ = lex_.next();
            const int operand = unary();
            Node n;
            n.kind = Node::Kind::Negate;
            n.children = {operand};
            const SourceSpan& e = out_.nodes_[operand].span;
            s.length = e.offset + e.length - s.offset;
            n.span = s;
            return add(std::move(n));
        }
        return power();
    }

    int power() {
        const int base = primary();
        if (tok_.kind != Tok::Caret) return base;
        tok_ = lex_.next();
        return binary(Op::Pow, base, unary());
    }

    int primary() {
        switch (tok_.kind) {
            case Tok::Number: {
                Node n;
                n.kind = Node::Kind::Number;
                n.number = tok_.number;
                n.span = tok_.span;
                tok_ = lex_.next();
                return add(std::move(n));
            }
            case Tok::LParen: {
                const SourceSpan open = tok_.span;
                tok_ = lex_.next();
                const int inner = sum();
                const int close = tok_.span.offset;
                expect(Tok::RParen);
                // Widen to the parentheses so diagnostics quote the whole group.
                SourceSpan& s = out_.nodes_[inner].span;
                s = open;
                s.length = close + 1 - open.offset;
                return inner;
            }
            case Tok::Ident: return identifier();
            default: unexpected(kOperandStart);
        }
    }

    int identifier() {
        const Token id = tok_;
        tok_ = lex_.next();
        static constexpr std::pair<std::string_view, Var> vars[] = {
            {"t", Var::T}, {"x", Var::X}, {"y", Var::Y}, {"z", Var::Z}};
        for (const auto& [name, var] : vars) {
            if (id.text == name) {
                Node n;
                n.kind = Node::Kind::Variable;
                n.var = var;
                n.span = id.span;
                out_.used_vars_ |= 1u << static_cast<int>(var);
                return add(std::move(n));
            }
        }
        for (const auto& info : kFuncs) {
            if (id.text != info.name) continue;
            if (tok_.kind != Tok::LParen) unexpected({"'('"});
            tok_ = lex_.next();
            Node n;
            n.kind = Node::Kind::Call;
            n.func = info.func;
            for (int i = 0; i < info.arity; ++i) {
                if (i > 0) {
                    if (tok_.kind != Tok::Comma)
                        unexpected({"','"});
                    tok_ = lex_.next();
                }
                n.children.push_back(sum());
            }
            if (tok_.kind == Tok::Comma)
                throw ParseError(std::string(info.name) + " takes " + std::to_string(info.arity) +
                                     " argument(s), extra argument at " + describe(tok_.span),
                                 tok_.span, {"')'"});
            SourceSpan s = id.span;
            s.length = tok_.span.offset + 1 - s.offset;
            expect(Tok::RParen);
            n.span = s;
            return add(std::move(n));
        }
        throw ParseError("unknown identifier '" + std::string(id.text) + "' at " + describe(id.span), id.span,
                         {"t", "x", "y", "z", "abs", "exp", "tanh", "pos", "neg", "min", "max"});
    }

    Lexer lex_;
    Token tok_{};
    Expression& out_;
};

//---------------------------------------------------------------------------//
Expression Expression::parse(std::string_view source) {
    Expression e;
    e.source_ = std::string(source);
    Parser(e.source_, e).run();
    e.compile();
    return e;
}

void Expression::compile() {
    program_.clear();
    emit(root_);
    int depth = 0;
    for (const auto& in : program_) {
        switch (in.code) {
            case Instr::Code::Push:
            case Instr::Code::Load: ++depth; break;
            case Instr::Code::Add:
            case Instr::Code::Sub:
            case Instr::Code::Mul:
            case Instr::Code::Div:
            case Instr::Code::Pow:
            case Instr::Code::Min:
            case Instr::Code::Max: --depth; break;
            default: break;
        }
        stack_depth_ = std::max(stack_depth_, depth);
    }
}

void Expression::emit(int id) {
    const Node& n = nodes_[id];
    using C = Instr::Code;
    switch (n.kind) {
        case Node::Kind::Number: program_.push_back({C::Push, n.number, 0, id}); return;
        case Node::Kind::Variable: program_.push_back({C::Load, 0.0, static_cast<int>(n.var), id}); return;
        case Node::Kind::Negate:
            emit(n.children[0]);
            program_.push_back({C::Neg, 0.0, 0, id});
            return;
        case Node::Kind::Binary: {
            emit(n.children[0]);
            emit(n.children[1]);
            static constexpr C codes[] = {C::Add, C::Sub, C::Mul, C::Div, C::Pow};
            program_.push_back({codes[static_cast<int>(n.op)], 0.0, 0, id});
            return;
        }
        case Node::Kind::Call: {
            for (int c : n.children) emit(c);
            C code = C::Abs;
            switch (n.func) {
                case Func::Abs: code = C::Abs; break;
                case Func::Exp: code = C::Exp; break;
                case Func::Tanh: code = C::Tanh; break;
                case Func::Pos: code = C::Pos; break;
                case Func::Neg: code = C::NegPart; break;
                case Func::Min: code = C::Min; break;
                case Func::Max: code = C::Max; break;
            }
            program_.push_back({code, 0.0, 0, id});
            return;
        }
    }
}

double Expression::eval(const Bindings& vars) const {
    // Expressions are tiny; a fixed stack avoids allocation in the PDE inner loop.
    constexpr int kMaxInline = 64;
    double inline_stack[kMaxInline] = {};
    std::vector<double> heap;
    double* stack = inline_stack;
    if (stack_depth_ > kMaxInline) {
        heap.resize(stack_depth_);
        stack = heap.data();
    }
    int sp = 0;
    using C = Instr::Code;
    for (const auto& in : program_) {
        double r;
        switch (in.code) {
            case C::Push: stack[sp++] = in.value; continue;
            case C::Load: stack[sp++] = vars[in.slot]; continue;
            case C::Neg: r = -stack[sp - 1]; break;
            case C::Abs: r = std::abs(stack[sp - 1]); break;
            case C::Exp: r = std::exp(stack[sp - 1]); break;
            case C::Tanh: r = std::tanh(stack[sp - 1]); break;
            case C::Pos: r = stack[sp - 1] > 0.0 ? stack[sp - 1] : 0.0; break;
            case C::NegPart: r = stack[sp - 1] < 0.0 ? -stack[sp - 1] : 0.0; break;
            default: {
                const double b = stack[--sp];
                const double a = stack[sp - 1];
                switch (in.code) {
                    case C::Add: r = a + b; break;
                    case C::Sub: r = a - b; break;
                    case C::Mul: r = a * b; break;
                    case C::Div:
                        if (b == 0.0) {
                            const auto& s = nodes_[in.node].span;
                            throw EvalError("division by zero at " + describe(s) + " in '" +
                                                source_.substr(s.offset, s.length) + "'",
                                            s);
                        }
                        r = a / b;
                        break;
                    case C::Pow: r = std::pow(a, b); break;
                    case C::Min: r = std::min(a, b); break;
                    case C::Max: r = std::max(a, b); break;
                    default: r = 0.0; break;
                }
            }
        }
        if (!std::isfinite(r)) {
            const auto& s = nodes_[in.node].span;
            throw EvalError("non-finite value at " + describe(s) + " in '" + source_.substr(s.offset, s.length) + "'",
                            s);
        }
        stack[sp - 1] = r;
    }
    return stack[0];
}

//---------------------------------------------------------------------------//
namespace {

int precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Binary:
            switch (n.op) {
                case Op::Add:
                case Op::Sub: return 1;
                case Op::Mul:
                case Op::Div: return 2;
                case Op::Pow: return 4;
            }
            return 0;
        case Node::Kind::Negate: return 3;
        default: return 5;
    }
}

}  // namespace

std::string Expression::print() const { return print_node(root_); }

std::string Expression::print_node(int id) const {
    const Node& n = nodes_[id];
    auto wrap = [this](int child, bool paren) {
        std::string s = print_node(child);
        return paren ? "(" + s + ")" : s;
    };
    switch (n.kind) {
        case Node::Kind::Number: return format_number(n.number);
        case Node::Kind::Variable: return var_name(n.var);
        case Node::Kind::Negate: return "-" + wrap(n.children[0], precedence(nodes_[n.children[0]]) < 3);
        case Node::Kind::Call: {
            std::string s = std::string(func_name(n.func)) + "(";
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) s += ", ";
                s += print_node(n.children[i]);
            }
            return s + ")";
        }
        case Node::Kind::Binary: {
            const int p = precedence(n);
            const int pl = precedence(nodes_[n.children[0]]);
            const int pr = precedence(nodes_[n.children[1]]);
            if (n.op == Op::Pow) {
                // base must be a primary; exponent is parsed as a unary
                return wrap(n.children[0], pl <= 4) + "^" + wrap(n.children[1], pr < 3);
            }
            return wrap(n.children[0], pl < p) + " " + op_symbol(n.op) + " " + wrap(n.children[1], pr <= p);
        }
    }
    return {};
}

std::string Expression::dump() const { return dump_node(root_); }

std::string Expression::dump_node(int id) const {
    const Node& n = nodes_[id];
    switch (n.kind) {
        case Node::Kind::Number: return format_number(n.number);
        case Node::Kind::Variable: return std::string("var ") + var_name(n.var);
        case Node::Kind::Negate: return "neg(" + dump_node(n.children[0]) + ")";
        case Node::Kind::Binary:
            return std::string(op_dump_name(n.op)) + "(" + dump_node(n.children[0]) + ", " +
                   dump_node(n.children[1]) + ")";
        case Node::Kind::Call: {
            std::string s = std::string("call(") + func_name(n.func);
            for (int c : n.children) s += ", " + dump_node(c);
            return s + ")";
        }
    }
    return {};
}

bool Expression::uses(Var v) const noexcept { return (used_vars_ >> static_cast<int>(v)) & 1u; }

bool Expression::is_constant() const noexcept { return used_vars_ == 0; }

bool operator==(const Expression& a, const Expression& b) {
    // Compare trees by a canonical dump; numbers print with round-trip precision.
    return a.dump() == b.dump();
}

}  // namespace gbsde::expr
