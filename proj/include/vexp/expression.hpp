#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "vexp/error.hpp"

namespace vexp {

enum class Variable : std::uint8_t { x = 0, y = 1, u = 2, v = 3 };

/// Values bound to (x, y, u, v) during evaluation.
using Bindings = std::array<double, 4>;

/**
 * Immutable arithmetic expression tree over the variables x, y, u, v.
 *
 * Supports + - * / ^, unary minus, and the functions ln (alias log), exp,
 * abs, sign, sqrt, sin, cos and pow(a, b); constants pi and e. Derivatives
 * are symbolic, so checkers that need exact partials of a user formula get
 * them without finite differencing. Subtrees are shared, copies are cheap.
 */
class Expression {
public:
    enum class Op : std::uint8_t {
        Const, Var, Neg, Add, Sub, Mul, Div, Pow, Ln, Exp, Abs, Sign, Sqrt, Sin, Cos
    };

    Expression() : Expression(constant(0.0)) {}

    static Expression constant(double value) {
        auto n = std::make_shared<Node>();
        n->op = Op::Const;
        n->value = value;
        return Expression(std::move(n));
    }

    static Expression variable(Variable var) {
        auto n = std::make_shared<Node>();
        n->op = Op::Var;
        n->var = var;
        return Expression(std::move(n));
    }

    static Expression parse(std::string_view text);

    double evaluate(const Bindings& b) const { return eval(*node_, b); }

    double operator()(double x, double y = 0.0, double u = 0.0, double v = 0.0) const {
        return evaluate(Bindings{x, y, u, v});
    }

    Expression derivative(Variable var) const { return diff(node_, var); }

    bool depends_on(Variable var) const { return depends(*node_, var); }

    bool is_constant() const { return node_->op == Op::Const; }

    /// Constant value of a folded constant expression; DomainError otherwise.
    double constant_value() const {
        if (!is_constant()) throw DomainError("expression is not constant: " + to_string());
        return node_->value;
    }

    /// Fully parenthesised infix form; parse(to_string()) rebuilds an equal tree.
    std::string to_string() const {
        std::string out;
        print(*node_, out);
        return out;
    }

    Op op() const { return node_->op; }

    friend Expression operator+(const Expression& a, const Expression& b) { return make(Op::Add, a.node_, b.node_); }
    friend Expression operator-(const Expression& a, const Expression& b) { return make(Op::Sub, a.node_, b.node_); }
    friend Expression operator*(const Expression& a, const Expression& b) { return make(Op::Mul, a.node_, b.node_); }
    friend Expression operator/(const Expression& a, const Expression& b) { return make(Op::Div, a.node_, b.node_); }
    friend Expression operator-(const Expression& a) { return make(Op::Neg, a.node_, nullptr); }
    friend Expression operator+(const Expression& a, double b) { return a + constant(b); }
    friend Expression operator*(double a, const Expression& b) { return constant(a) * b; }
    friend Expression pow(const Expression& a, const Expression& b) { return make(Op::Pow, a.node_, b.node_); }
    friend Expression ln(const Expression& a) { return make(Op::Ln, a.node_, nullptr); }
    friend Expression exp(const Expression& a) { return make(Op::Exp, a.node_, nullptr); }
    friend Expression abs(const Expression& a) { return make(Op::Abs, a.node_, nullptr); }

private:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Op op = Op::Const;
        double value = 0.0;
        Variable var = Variable::x;
        NodePtr a, b;
    };

    explicit Expression(NodePtr n) : node_(std::move(n)) {}

    static bool is_value(const NodePtr& n, double c) { return n->op == Op::Const && n->value == c; }

    static double apply(Op op, double a, double b) {
        switch (op) {
            case Op::Neg: return -a;
            case Op::Add: return a + b;
            case Op::Sub: return a - b;
            case Op::Mul: return a * b;
            case Op::Div: return a / b;
            case Op::Pow: return std::pow(a, b);
            case Op::Ln: return std::log(a);
            case Op::Exp: return std::exp(a);
            case Op::Abs: return std::fabs(a);
            case Op::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
            case Op::Sqrt: return std::sqrt(a);
            case Op::Sin: return std::sin(a);
            case Op::Cos: return std::cos(a);
            default: return 0.0;
        }
    }

    // Builds a node with light algebraic folding; keeps derivative trees small.
    static Expression make(Op op, const NodePtr& a, const NodePtr& b) {
        const bool unary = (b == nullptr);
        if (a->op == Op::Const && (unary || b->op == Op::Const))
            return constant(apply(op, a->value, unary ? 0.0 : b->value));
        switch (op) {
            case Op::Add:
                if (is_value(a, 0.0)) return Expression(b);
                if (is_value(b, 0.0)) return Expression(a);
                break;
            case Op::Sub:
                if (is_value(b, 0.0)) return Expression(a);
                if (is_value(a, 0.0)) return make(Op::Neg, b, nullptr);
                break;
            case Op::Mul:
                if (is_value(a, 0.0) || is_value(b, 0.0)) return constant(0.0);
                if (is_value(a, 1.0)) return Expression(b);
                if (is_value(b, 1.0)) return Expression(a);
                break;
            case Op::Div:
                if (is_value(a, 0.0)) return constant(0.0);
                if (is_value(b, 1.0)) return Expression(a);
                break;
            case Op::Pow:
                if (is_value(b, 0.0)) return constant(1.0);
                if (is_value(b, 1.0)) return Expression(a);
                break;
            case Op::Neg:
                if (a->op == Op::Neg) return Expression(a->a);
                break;
            default: break;
        }
        auto n = std::make_shared<Node>();
        n->op = op;
        n->a = a;
        n->b = b;
        return Expression(std::move(n));
    }

    static double eval(const Node& n, const Bindings& bind) {
        switch (n.op) {
            case Op::Const: return n.value;
            case Op::Var: return bind[static_cast<std::size_t>(n.var)];
            default: break;
        }
        const double a = eval(*n.a, bind);
        const double b = n.b ? eval(*n.b, bind) : 0.0;
        return apply(n.op, a, b);
    }

    static bool depends(const Node& n, Variable var) {
        if (n.op == Op::Const) return false;
        if (n.op == Op::Var) return n.var == var;
        return depends(*n.a, var) || (n.b && depends(*n.b, var));
    }

    static Expression diff(const NodePtr& n, Variable var) {
        if (!depends(*n, var)) return constant(0.0);
        const Expression A(n->a ? n->a : n);
        switch (n->op) {
            case Op::Var: return constant(1.0);
            case Op::Neg: return -diff(n->a, var);
            case Op::Add: return diff(n->a, var) + diff(n->b, var);
            case Op::Sub: return diff(n->a, var) - diff(n->b, var);
            case Op::Mul: {
                const Expression B(n->b);
                return diff(n->a, var) * B + A * diff(n->b, var);
            }
            case Op::Div: {
                const Expression B(n->b);
                return (diff(n->a, var) * B - A * diff(n->b, var)) / (B * B);
            }
            case Op::Pow: {
                const Expression B(n->b);
                if (!depends(*n->b, var))
                    return B * pow(A, B - constant(1.0)) * diff(n->a, var);
                if (!depends(*n->a, var))
                    return Expression(n) * ln(A) * diff(n->b, var);
                return Expression(n) * (diff(n->b, var) * ln(A) + B * diff(n->a, var) / A);
            }
            case Op::Ln: return diff(n->a, var) / A;
            case Op::Exp: return Expression(n) * diff(n->a, var);
            case Op::Abs: return make(Op::Sign, n->a, nullptr) * diff(n->a, var);
            case Op::Sign: return constant(0.0);
            case Op::Sqrt: return diff(n->a, var) / (constant(2.0) * Expression(n));
            case Op::Sin: return make(Op::Cos, n->a, nullptr) * diff(n->a, var);
            case Op::Cos: return -(make(Op::Sin, n->a, nullptr) * diff(n->a, var));
            default: return constant(0.0);
        }
    }

    static void print(const Node& n, std::string& out) {
        static constexpr const char* names[] = {"x", "y", "u", "v"};
        switch (n.op) {
            case Op::Const: {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                if (n.value < 0.0) { out += '('; out += buf; out += ')'; }
                else out += buf;
                return;
            }
            case Op::Var: out += names[static_cast<int>(n.var)]; return;
            case Op::Neg: out += "(-"; print(*n.a, out); out += ')'; return;
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: {
                static constexpr char sym[] = {'+', '-', '*', '/', '^'};
                out += '(';
                print(*n.a, out);
                out += ' ';
                out += sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
                out += ' ';
                print(*n.b, out);
                out += ')';
                return;
            }
            default: break;
        }
        static constexpr const char* fn[] = {"ln", "exp", "abs", "sign", "sqrt", "sin", "cos"};
        out += fn[static_cast<int>(n.op) - static_cast<int>(Op::Ln)];
        out += '(';
        print(*n.a, out);
        out += ')';
    }

    NodePtr node_;

    friend class ExpressionParser;
};

// Recursive-descent parser; precedence: unary minus < ^ (right associative).
class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : text_(text) {}

    Expression run() {
        Expression e = sum();
        skip();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression \"" + std::string(text_) + "\": " + msg + " at column " +
                          std::to_string(pos_ + 1));
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    Expression sum() {
        Expression e = product();
        for (;;) {
            if (accept('+')) e = e + product();
            else if (accept('-')) e = e - product();
            else return e;
        }
    }

    Expression product() {
        Expression e = unary();
        for (;;) {
            if (accept('*')) e = e * unary();
            else if (accept('/')) e = e / unary();
            else return e;
        }
    }

    Expression unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (accept('^')) return pow(base, unary());
        return base;
    }

    Expression primary() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (accept('(')) {
            Expression e = sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expression number() {
        const std::string rest(text_.substr(pos_));
        char* end = nullptr;
        const double value = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return Expression::constant(value);
    }

    Expression identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "x") return Expression::variable(Variable::x);
        if (name == "y") return Expression::variable(Variable::y);
        if (name == "u") return Expression::variable(Variable::u);
        if (name == "v") return Expression::variable(Variable::v);
        if (name == "pi") return Expression::constant(std::numbers::pi);
        if (name == "e") return Expression::constant(std::numbers::e);

        using Op = Expression::Op;
        Op op;
        if (name == "ln" || name == "log") op = Op::Ln;
        else if (name == "exp") op = Op::Exp;
        else if (name == "abs") op = Op::Abs;
        else if (name == "sign") op = Op::Sign;
        else if (name == "sqrt") op = Op::Sqrt;
        else if (name == "sin") op = Op::Sin;
        else if (name == "cos") op = Op::Cos;
        else if (name == "pow") op = Op::Pow;
        else { pos_ = start; fail("unknown identifier '" + name + "'"); }

        if (!accept('(')) fail("expected '(' after " + name);
        Expression a = sum();
        if (op == Op::Pow) {
            if (!accept(',')) fail("pow takes two arguments");
            Expression b = sum();
            if (!accept(')')) fail("expected ')'");
            return pow(a, b);
        }
        if (!accept(')')) fail("expected ')'");
        return Expression::make(op, a.node_, nullptr);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

} // namespace vexp
