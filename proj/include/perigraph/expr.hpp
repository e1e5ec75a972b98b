#pragma once

// Small complex-valued arithmetic expression language used for coefficients,
// kernels and weights in operator spec files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Names are bound to the variables in `Var`; constants pi, e, i.

#include "perigraph/errors.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace perigraph {

enum class Var : int { t = 0, x, y, edge, g1, g2, z1, z2, zabs, r, count };

using ExprEnv = std::array<std::complex<double>, static_cast<std::size_t>(Var::count)>;

class Expr {
public:
    using cplx = std::complex<double>;

    Expr() = default;

    static Expr parse(const std::string& text) {
        Parser p{text, 0};
        Expr e;
        e.source_ = text;
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size()) p.error("unexpected trailing input");
        return e;
    }

    cplx operator()(const ExprEnv& env) const { return root_ ? eval(*root_, env) : cplx{}; }
    const std::string& source() const { return source_; }
    bool empty() const { return !root_; }

    /// True if the expression never reads the given variable.
    bool independent_of(Var v) const { return root_ ? !uses(*root_, v) : true; }

private:
    enum class Op { Num, Var, Add, Sub, Mul, Div, Neg, Pow, Call };
    struct Node {
        Op op = Op::Num;
        cplx value{};
        int var = 0;
        std::string fn;
        std::vector<std::shared_ptr<const Node>> kids;
    };
    using NodePtr = std::shared_ptr<const Node>;

    struct Parser {
        const std::string& s;
        std::size_t pos;

        [[noreturn]] void error(const std::string& msg) const {
            fail(ErrorCode::ParseError, msg + " at position " + std::to_string(pos) + " in '" + s + "'");
        }
        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        static NodePtr make(Op op, std::vector<NodePtr> kids = {}) {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->kids = std::move(kids);
            return n;
        }
        NodePtr parse_expr() {
            NodePtr lhs = parse_term();
            for (;;) {
                if (accept('+')) lhs = make(Op::Add, {lhs, parse_term()});
                else if (accept('-')) lhs = make(Op::Sub, {lhs, parse_term()});
                else return lhs;
            }
        }
        NodePtr parse_term() {
            NodePtr lhs = parse_unary();
            for (;;) {
                if (accept('*')) lhs = make(Op::Mul, {lhs, parse_unary()});
                else if (accept('/')) lhs = make(Op::Div, {lhs, parse_unary()});
                else return lhs;
            }
        }
        NodePtr parse_unary() {
            if (accept('-')) return make(Op::Neg, {parse_unary()});
            if (accept('+')) return parse_unary();
            return parse_power();
        }
        NodePtr parse_power() {
            NodePtr base = parse_primary();
            if (accept('^')) return make(Op::Pow, {base, parse_unary()});
            return base;
        }
        NodePtr parse_primary() {
            skip_ws();
            if (pos >= s.size()) error("unexpected end of expression");
            char c = s[pos];
            if (accept('(')) {
                NodePtr e = parse_expr();
                if (!accept(')')) error("expected ')'");
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                double v = std::strtod(begin, &end);
                if (end == begin) error("bad number");
                pos += static_cast<std::size_t>(end - begin);
                auto n = std::make_shared<Node>();
                n->op = Op::Num;
                n->value = v;
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                std::string name = s.substr(start, pos - start);
                if (accept('(')) {
                    auto n = std::make_shared<Node>();
                    n->op = Op::Call;
                    n->fn = name;
                    n->kids.push_back(parse_expr());
                    while (accept(',')) n->kids.push_back(parse_expr());
                    if (!accept(')')) error("expected ')' after arguments");
                    check_call(*n);
                    return n;
                }
                return named(name);
            }
            error(std::string("unexpected character '") + c + "'");
        }
        void check_call(const Node& n) const {
            static const char* unary[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "atan", "abs", "tanh",
                                          "sinh", "cosh", "erf", "real", "imag", "conj", "sign", "floor"};
            static const char* binary[] = {"pow", "atan2", "min", "max"};
            for (const char* u : unary)
                if (n.fn == u) {
                    if (n.kids.size() != 1) error(n.fn + " takes one argument");
                    return;
                }
            for (const char* b : binary)
                if (n.fn == b) {
                    if (n.kids.size() != 2) error(n.fn + " takes two arguments");
                    return;
                }
            error("unknown function '" + n.fn + "'");
        }
        NodePtr named(const std::string& name) const {
            auto n = std::make_shared<Node>();
            n->op = Op::Num;
            if (name == "pi") { n->value = std::numbers::pi; return n; }
            if (name == "e") { n->value = std::numbers::e; return n; }
            if (name == "i") { n->value = cplx(0.0, 1.0); return n; }
            static const std::pair<const char*, Var> vars[] = {
                {"t", Var::t},        {"x_coord", Var::t}, {"x", Var::x},   {"y", Var::y},
                {"edge", Var::edge},  {"x_edge", Var::edge}, {"g1", Var::g1}, {"g2", Var::g2},
                {"z1", Var::z1},      {"z2", Var::z2},     {"zabs", Var::zabs}, {"z", Var::zabs},
                {"r", Var::r}};
            for (const auto& [k, v] : vars)
                if (name == k) {
                    n->op = Op::Var;
                    n->var = static_cast<int>(v);
                    return n;
                }
            error("unknown name '" + name + "'");
        }
    };

    static double as_real(cplx v) { return v.real(); }

    static cplx eval(const Node& n, const ExprEnv& env) {
        switch (n.op) {
            case Op::Num: return n.value;
            case Op::Var: return env[static_cast<std::size_t>(n.var)];
            case Op::Add: return eval(*n.kids[0], env) + eval(*n.kids[1], env);
            case Op::Sub: return eval(*n.kids[0], env) - eval(*n.kids[1], env);
            case Op::Mul: return eval(*n.kids[0], env) * eval(*n.kids[1], env);
            case Op::Div: return eval(*n.kids[0], env) / eval(*n.kids[1], env);
            case Op::Neg: return -eval(*n.kids[0], env);
            case Op::Pow: return power(eval(*n.kids[0], env), eval(*n.kids[1], env));
            case Op::Call: return call(n, env);
        }
        return {};
    }

    static cplx power(cplx b, cplx ex) {
        if (ex.imag() == 0.0 && b.imag() == 0.0) {
            double p = ex.real();
            if (p == std::round(p) || b.real() >= 0.0) return std::pow(b.real(), p);
        }
        return std::pow(b, ex);
    }

    static cplx call(const Node& n, const ExprEnv& env) {
        cplx a = eval(*n.kids[0], env);
        const std::string& f = n.fn;
        auto real_fn = [&](double (*fn)(double)) -> cplx { return fn(a.real()); };
        bool real_arg = a.imag() == 0.0;
        if (f == "sin") return std::sin(a);
        if (f == "cos") return std::cos(a);
        if (f == "tan") return std::tan(a);
        if (f == "exp") return std::exp(a);
        if (f == "log") return real_arg && a.real() > 0.0 ? cplx(std::log(a.real())) : std::log(a);
        if (f == "sqrt") return real_arg && a.real() >= 0.0 ? cplx(std::sqrt(a.real())) : std::sqrt(a);
        if (f == "atan") return real_arg ? real_fn(std::atan) : std::atan(a);
        if (f == "abs") return std::abs(a);
        if (f == "tanh") return std::tanh(a);
        if (f == "sinh") return std::sinh(a);
        if (f == "cosh") return std::cosh(a);
        if (f == "erf") return std::erf(a.real());
        if (f == "real") return a.real();
        if (f == "imag") return a.imag();
        if (f == "conj") return std::conj(a);
        if (f == "sign") return a.real() > 0.0 ? 1.0 : (a.real() < 0.0 ? -1.0 : 0.0);
        if (f == "floor") return std::floor(a.real());
        cplx b = eval(*n.kids[1], env);
        if (f == "pow") return power(a, b);
        if (f == "atan2") return std::atan2(a.real(), b.real());
        if (f == "min") return std::min(a.real(), b.real());
        if (f == "max") return std::max(a.real(), b.real());
        return {};
    }

    static bool uses(const Node& n, Var v) {
        if (n.op == Op::Var) return n.var == static_cast<int>(v);
        for (const auto& k : n.kids)
            if (uses(*k, v)) return true;
        return false;
    }

    std::string source_;
    NodePtr root_;
};

}  // namespace perigraph
