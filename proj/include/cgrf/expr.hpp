#pragma once

// Minimal arithmetic expression grammar for target functions, closed-form
// weights and mean functions: +, -, *, /, ^, sin, cos, exp, sqrt, log,
// numeric literals and named coordinate variables. Evaluation is
// scalar-generic so jets propagate derivatives through expressions; a small
// symbolic differentiator supplies exact derivatives of mean functions.
//
// sqrt is the clamped square root sqrt(max(u, 1e-16)): the disk weight
// formula divides by sqrt(1-x2^2), which vanishes at the two poles, and the
// clamp keeps it evaluable everywhere (enforcement at the poles holds in the
// clamp limit only).

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "cgrf/common.hpp"
#include "cgrf/jet.hpp"

namespace cgrf {

constexpr double kSqrtClampArg = 1e-16;

inline double clamped_sqrt(double u) { return std::sqrt(u < kSqrtClampArg ? kSqrtClampArg : u); }

template <int N1, int N2>
Jet<N1, N2> clamped_sqrt(const Jet<N1, N2>& u) {
    if (u.value() < kSqrtClampArg) return Jet<N1, N2>(std::sqrt(kSqrtClampArg));
    return sqrt(u);
}

class Expr {
public:
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Log };

    struct Node {
        Op op;
        double value = 0.0;  // Const
        int var = -1;        // Var
        int a = -1, b = -1;  // children
    };

    Expr() { root_ = add({Op::Const, 0.0}); }
    explicit Expr(double c) { root_ = add({Op::Const, c}); }

    static Expr parse(const std::string& text, const std::vector<std::string>& vars);

    // derivative with respect to variable index
    Expr derivative(int var) const {
        Expr d;
        d.nodes_ = nodes_;
        d.root_ = d.diff(root_, var);
        d.source_ = "d(" + source_ + ")";
        return d;
    }

    template <class S, class Vars>
    S eval(const Vars& vars) const {
        return eval_node<S>(root_, vars);
    }

    double operator()(const Point& x) const { return eval<double>(x); }

    const std::string& source() const { return source_; }
    bool is_zero() const {
        const Node& n = nodes_[root_];
        return n.op == Op::Const && n.value == 0.0;
    }

private:
    std::vector<Node> nodes_;
    int root_ = -1;
    std::string source_;

    int add(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }
    bool is_const(int i, double v) const {
        return nodes_[i].op == Op::Const && nodes_[i].value == v;
    }
    int mk_const(double v) { return add({Op::Const, v}); }
    int mk_bin(Op op, int a, int b) {
        // light constant folding keeps derivative trees small
        if (nodes_[a].op == Op::Const && nodes_[b].op == Op::Const) {
            const double x = nodes_[a].value, y = nodes_[b].value;
            switch (op) {
                case Op::Add: return mk_const(x + y);
                case Op::Sub: return mk_const(x - y);
                case Op::Mul: return mk_const(x * y);
                case Op::Div: return mk_const(x / y);
                default: break;
            }
        }
        if (op == Op::Add) {
            if (is_const(a, 0.0)) return b;
            if (is_const(b, 0.0)) return a;
        }
        if (op == Op::Sub && is_const(b, 0.0)) return a;
        if (op == Op::Mul) {
            if (is_const(a, 0.0) || is_const(b, 0.0)) return mk_const(0.0);
            if (is_const(a, 1.0)) return b;
            if (is_const(b, 1.0)) return a;
        }
        if (op == Op::Div && is_const(a, 0.0)) return mk_const(0.0);
        Node n;
        n.op = op;
        n.a = a;
        n.b = b;
        return add(n);
    }
    int mk_un(Op op, int a) {
        Node n;
        n.op = op;
        n.a = a;
        return add(n);
    }

    int diff(int i, int var) {
        const Node n = nodes_[i];
        switch (n.op) {
            case Op::Const: return mk_const(0.0);
            case Op::Var: return mk_const(n.var == var ? 1.0 : 0.0);
            case Op::Add: return mk_bin(Op::Add, diff(n.a, var), diff(n.b, var));
            case Op::Sub: return mk_bin(Op::Sub, diff(n.a, var), diff(n.b, var));
            case Op::Neg: return mk_un(Op::Neg, diff(n.a, var));
            case Op::Mul:
                return mk_bin(Op::Add, mk_bin(Op::Mul, diff(n.a, var), n.b),
                              mk_bin(Op::Mul, n.a, diff(n.b, var)));
            case Op::Div:
                return mk_bin(Op::Div,
                              mk_bin(Op::Sub, mk_bin(Op::Mul, diff(n.a, var), n.b),
                                     mk_bin(Op::Mul, n.a, diff(n.b, var))),
                              mk_bin(Op::Mul, n.b, n.b));
            case Op::Pow: {
                if (nodes_[n.b].op == Op::Const) {
                    const double c = nodes_[n.b].value;
                    const int p = mk_bin(Op::Pow, n.a, mk_const(c - 1.0));
                    return mk_bin(Op::Mul, mk_const(c), mk_bin(Op::Mul, p, diff(n.a, var)));
                }
                // a^b = exp(b log a)
                const int lg = mk_un(Op::Log, n.a);
                const int inner = mk_bin(Op::Add, mk_bin(Op::Mul, diff(n.b, var), lg),
                                         mk_bin(Op::Div, mk_bin(Op::Mul, n.b, diff(n.a, var)), n.a));
                return mk_bin(Op::Mul, i, inner);
            }
            case Op::Sin: return mk_bin(Op::Mul, mk_un(Op::Cos, n.a), diff(n.a, var));
            case Op::Cos:
                return mk_un(Op::Neg, mk_bin(Op::Mul, mk_un(Op::Sin, n.a), diff(n.a, var)));
            case Op::Exp: return mk_bin(Op::Mul, i, diff(n.a, var));
            case Op::Sqrt:
                return mk_bin(Op::Div, diff(n.a, var), mk_bin(Op::Mul, mk_const(2.0), i));
            case Op::Log: return mk_bin(Op::Div, diff(n.a, var), n.a);
        }
        throw std::logic_error("expr diff: bad node");
    }

    template <class S, class Vars>
    S eval_node(int i, const Vars& vars) const {
        const Node& n = nodes_[i];
        switch (n.op) {
            case Op::Const: return S(n.value);
            case Op::Var: return vars[n.var];
            case Op::Add: return eval_node<S>(n.a, vars) + eval_node<S>(n.b, vars);
            case Op::Sub: return eval_node<S>(n.a, vars) - eval_node<S>(n.b, vars);
            case Op::Mul: return eval_node<S>(n.a, vars) * eval_node<S>(n.b, vars);
            case Op::Div: return eval_node<S>(n.a, vars) / eval_node<S>(n.b, vars);
            case Op::Neg: return -eval_node<S>(n.a, vars);
            case Op::Sin: {
                using std::sin;
                return sin(eval_node<S>(n.a, vars));
            }
            case Op::Cos: {
                using std::cos;
                return cos(eval_node<S>(n.a, vars));
            }
            case Op::Exp: {
                using std::exp;
                return exp(eval_node<S>(n.a, vars));
            }
            case Op::Sqrt: return clamped_sqrt(eval_node<S>(n.a, vars));
            case Op::Log: {
                using std::log;
                return log(eval_node<S>(n.a, vars));
            }
            case Op::Pow: {
                const Node& e = nodes_[n.b];
                if (e.op == Op::Const) {
                    using std::pow;
                    return pow(eval_node<S>(n.a, vars), e.value);
                }
                using std::exp;
                using std::log;
                return exp(eval_node<S>(n.b, vars) * log(eval_node<S>(n.a, vars)));
            }
        }
        throw std::logic_error("expr eval: bad node");
    }

    friend class ExprParser;
};

class ExprParser {
public:
    ExprParser(const std::string& s, const std::vector<std::string>& vars, Expr& out)
        : s_(s), vars_(vars), e_(out) {}

    int run() {
        const int r = parse_sum();
        skip_ws();
        if (pos_ != s_.size())
            throw ConfigError("expression: trailing input at column " + std::to_string(pos_ + 1) +
                              " in '" + s_ + "'");
        return r;
    }

private:
    const std::string& s_;
    const std::vector<std::string>& vars_;
    Expr& e_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int parse_sum() {
        int lhs = parse_term();
        for (;;) {
            if (eat('+')) lhs = e_.mk_bin(Expr::Op::Add, lhs, parse_term());
            else if (eat('-')) lhs = e_.mk_bin(Expr::Op::Sub, lhs, parse_term());
            else return lhs;
        }
    }
    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (eat('*')) lhs = e_.mk_bin(Expr::Op::Mul, lhs, parse_unary());
            else if (eat('/')) lhs = e_.mk_bin(Expr::Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }
    int parse_unary() {
        if (eat('-')) return e_.mk_un(Expr::Op::Neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }
    int parse_power() {
        const int base = parse_atom();
        if (eat('^')) {
            // right associative, exponent may itself be signed
            const int ex = parse_unary_power();
            return e_.mk_bin(Expr::Op::Pow, base, ex);
        }
        return base;
    }
    int parse_unary_power() {
        if (eat('-')) return e_.mk_un(Expr::Op::Neg, parse_unary_power());
        const int base = parse_atom();
        if (eat('^')) return e_.mk_bin(Expr::Op::Pow, base, parse_unary_power());
        return base;
    }
    int parse_atom() {
        skip_ws();
        if (pos_ >= s_.size())
            throw ConfigError("expression: unexpected end of input in '" + s_ + "'");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            const int r = parse_sum();
            if (!eat(')'))
                throw ConfigError("expression: missing ')' at column " + std::to_string(pos_ + 1));
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ConfigError("expression: unexpected character '" + std::string(1, c) +
                          "' at column " + std::to_string(pos_ + 1));
    }
    int parse_number() {
        std::size_t used = 0;
        const double v = std::stod(s_.substr(pos_), &used);
        pos_ += used;
        return e_.mk_const(v);
    }
    int parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            const int arg = parse_sum();
            if (!eat(')'))
                throw ConfigError("expression: missing ')' after " + name + " argument");
            if (name == "sin") return e_.mk_un(Expr::Op::Sin, arg);
            if (name == "cos") return e_.mk_un(Expr::Op::Cos, arg);
            if (name == "exp") return e_.mk_un(Expr::Op::Exp, arg);
            if (name == "sqrt") return e_.mk_un(Expr::Op::Sqrt, arg);
            if (name == "log") return e_.mk_un(Expr::Op::Log, arg);
            throw ConfigError("expression: unknown function '" + name + "'");
        }
        if (name == "pi") return e_.mk_const(M_PI);
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) {
                Expr::Node n;
                n.op = Expr::Op::Var;
                n.var = static_cast<int>(i);
                return e_.add(n);
            }
        throw ConfigError("expression: unknown variable '" + name + "'");
    }
};

inline Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
    Expr e;
    e.nodes_.clear();
    e.source_ = text;
    ExprParser p(text, vars, e);
    e.root_ = p.run();
    return e;
}

}  // namespace cgrf
