#pragma once

// Expression language for map components.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'pi' | 'e' | x<k> | func '(' args ')' | '(' expr ')'
//
// Variables are x1..xn. atan2 is the only two-argument function.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "minsurf/error.hpp"

namespace minsurf {

enum class Op {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Atan2,
};

inline int arity(Op op) noexcept {
    switch (op) {
    case Op::Constant:
    case Op::Variable: return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
    case Op::Atan2: return 2;
    default: return 1;
    }
}

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree node. Trees are shared freely between maps and
/// threads; nothing mutates a node after construction.
struct ExprNode {
    Op op = Op::Constant;
    double value = 0.0;  // Constant
    int var = -1;        // Variable, 0-based
    std::string name;    // optional display name for constants (pi, e)
    ExprPtr lhs;
    ExprPtr rhs;
};

namespace expr {

inline ExprPtr constant(double v, std::string name = {}) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Constant;
    n->value = v;
    n->name = std::move(name);
    return n;
}

/// 0-based variable index (x1 is index 0).
inline ExprPtr variable(int index) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Variable;
    n->var = index;
    return n;
}

inline ExprPtr unary(Op op, ExprPtr child) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(child);
    return n;
}

inline ExprPtr binary(Op op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

} // namespace expr

inline const char* function_name(Op op) noexcept {
    switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Atan2: return "atan2";
    default: return nullptr;
    }
}

/// True when the subtree references no variable.
inline bool is_constant(const ExprNode& node) {
    if (node.op == Op::Variable) return false;
    if (node.lhs && !is_constant(*node.lhs)) return false;
    if (node.rhs && !is_constant(*node.rhs)) return false;
    return true;
}

/// Largest variable index referenced (0-based), or -1.
inline int max_variable(const ExprNode& node) {
    int m = node.op == Op::Variable ? node.var : -1;
    if (node.lhs) m = std::max(m, max_variable(*node.lhs));
    if (node.rhs) m = std::max(m, max_variable(*node.rhs));
    return m;
}

inline bool structurally_equal(const ExprNode& a, const ExprNode& b) {
    if (a.op != b.op) return false;
    if (a.op == Op::Constant) return a.value == b.value;
    if (a.op == Op::Variable) return a.var == b.var;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
    return true;
}

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline int precedence(const ExprNode& n) {
    switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Constant: return n.value < 0 ? 0 : 5;
    default: return 5;
    }
}

inline void print_to(const ExprNode& n, std::string& out);

inline void print_wrapped(const ExprNode& n, bool parens, std::string& out) {
    if (parens) out += '(';
    print_to(n, out);
    if (parens) out += ')';
}

inline void print_to(const ExprNode& n, std::string& out) {
    switch (n.op) {
    case Op::Constant:
        out += n.name.empty() ? format_double(n.value) : n.name;
        return;
    case Op::Variable:
        out += 'x';
        out += std::to_string(n.var + 1);
        return;
    case Op::Neg:
        out += '-';
        print_wrapped(*n.lhs, precedence(*n.lhs) < 3, out);
        return;
    case Op::Pow:
        print_wrapped(*n.lhs, precedence(*n.lhs) <= 4, out);
        out += '^';
        print_wrapped(*n.rhs, precedence(*n.rhs) < 3, out);
        return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
        const int p = precedence(n);
        static constexpr const char* sym[] = {" + ", " - ", "*", "/"};
        print_wrapped(*n.lhs, precedence(*n.lhs) < p, out);
        out += sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
        print_wrapped(*n.rhs, precedence(*n.rhs) <= p, out);
        return;
    }
    default:
        out += function_name(n.op);
        out += '(';
        print_to(*n.lhs, out);
        if (n.rhs) {
            out += ", ";
            print_to(*n.rhs, out);
        }
        out += ')';
        return;
    }
}

class Parser {
public:
    Parser(std::string_view src, int n) : src_(src), n_(n) {}

    ExprPtr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw SyntaxError(pos_, "expression");
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size()) throw SyntaxError(pos_, "operator or end of input");
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                      src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) throw SyntaxError(pos_, std::string("'") + c + "'");
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = expr::binary(Op::Add, lhs, parse_term());
            else if (accept('-'))
                lhs = expr::binary(Op::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = expr::binary(Op::Mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = expr::binary(Op::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    ExprPtr parse_unary() {
        if (accept('-')) return expr::unary(Op::Neg, parse_unary());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (accept('^')) return expr::binary(Op::Pow, base, parse_unary());
        return base;
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw SyntaxError(pos_, "operand");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            expect(')');
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (is_ident_start(c)) return parse_identifier();
        throw SyntaxError(pos_, "operand");
    }

    ExprPtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t k = 0;
            while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_, ++k;
            return k;
        };
        std::size_t nd = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            nd += digits();
        }
        if (nd == 0) throw SyntaxError(start, "digit");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // "2e" is 2 followed by something else
        }
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec == std::errc::result_out_of_range || !std::isfinite(v))
            throw SyntaxError(start, "finite number");
        if (res.ec != std::errc{} || res.ptr != src_.data() + pos_) throw SyntaxError(start, "number");
        return expr::constant(v);
    }

    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    ExprPtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        const std::string name(src_.substr(start, pos_ - start));

        if (name == "pi") return expr::constant(std::numbers::pi, "pi");
        if (name == "e") return expr::constant(std::numbers::e, "e");

        if (name.size() >= 2 && name[0] == 'x' && name[1] != '0' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos) {
            int k = 0;
            auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (res.ec != std::errc{} || k < 1 || k > n_) throw UnknownIdentifier(start, name);
            return expr::variable(k - 1);
        }

        static constexpr Op funcs[] = {Op::Sin, Op::Cos, Op::Sinh, Op::Cosh, Op::Tanh,
                                       Op::Exp, Op::Log, Op::Sqrt, Op::Atan2};
        for (Op f : funcs) {
            if (name != function_name(f)) continue;
            expect('(');
            std::vector<ExprPtr> args;
            args.push_back(parse_expr());
            while (accept(',')) args.push_back(parse_expr());
            expect(')');
            const auto want = static_cast<std::size_t>(arity(f));
            if (args.size() != want)
                throw ArityError(name + " takes " + std::to_string(want) + " argument(s), got " +
                                 std::to_string(args.size()) + " at offset " + std::to_string(start));
            return want == 1 ? expr::unary(f, args[0]) : expr::binary(f, args[0], args[1]);
        }
        throw UnknownIdentifier(start, name);
    }

    std::string_view src_;
    int n_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parse `source` as an expression over x1..xn.
inline ExprPtr parse(std::string_view source, int n) {
    if (n < 1) throw DimensionError("ambient dimension must be >= 1");
    return detail::Parser(source, n).run();
}

/// Minimal-parenthesis rendering; `parse(to_string(e))` is structurally equal to `e`.
inline std::string to_string(const ExprNode& node) {
    std::string out;
    detail::print_to(node, out);
    return out;
}

namespace detail {

[[noreturn]] inline void singular(const char* what, const ExprNode& node, std::span<const double> x) {
    throw EvaluationError(what, std::vector<double>(x.begin(), x.end()), to_string(node));
}

inline double checked(double v, const ExprNode& node, std::span<const double> x) {
    if (!std::isfinite(v)) singular("non-finite result", node, x);
    return v;
}

/// Real power with the same domain rules as the jet evaluator.
inline double real_pow(double base, double p, bool constant_exponent, const ExprNode& node,
                       std::span<const double> x) {
    const bool integral = constant_exponent && std::nearbyint(p) == p;
    if (base < 0.0 && !integral) singular("negative base with non-integer exponent", node, x);
    if (base == 0.0 && p < 0.0) singular("zero base with negative exponent", node, x);
    return checked(std::pow(base, p), node, x);
}

} // namespace detail

/// Plain value evaluation. Throws EvaluationError at singular points.
inline double evaluate(const ExprNode& node, std::span<const double> x) {
    using detail::checked;
    using detail::singular;
    switch (node.op) {
    case Op::Constant: return node.value;
    case Op::Variable: return x[static_cast<std::size_t>(node.var)];
    case Op::Add: return checked(evaluate(*node.lhs, x) + evaluate(*node.rhs, x), node, x);
    case Op::Sub: return checked(evaluate(*node.lhs, x) - evaluate(*node.rhs, x), node, x);
    case Op::Mul: return checked(evaluate(*node.lhs, x) * evaluate(*node.rhs, x), node, x);
    case Op::Div: {
        const double a = evaluate(*node.lhs, x);
        const double b = evaluate(*node.rhs, x);
        if (b == 0.0) singular("division by zero", node, x);
        return checked(a / b, node, x);
    }
    case Op::Pow:
        return detail::real_pow(evaluate(*node.lhs, x), evaluate(*node.rhs, x), is_constant(*node.rhs), node,
                                x);
    case Op::Neg: return -evaluate(*node.lhs, x);
    case Op::Sin: return std::sin(evaluate(*node.lhs, x));
    case Op::Cos: return std::cos(evaluate(*node.lhs, x));
    case Op::Sinh: return checked(std::sinh(evaluate(*node.lhs, x)), node, x);
    case Op::Cosh: return checked(std::cosh(evaluate(*node.lhs, x)), node, x);
    case Op::Tanh: return std::tanh(evaluate(*node.lhs, x));
    case Op::Exp: return checked(std::exp(evaluate(*node.lhs, x)), node, x);
    case Op::Log: {
        const double a = evaluate(*node.lhs, x);
        if (!(a > 0.0)) singular("log of nonpositive value", node, x);
        return std::log(a);
    }
    case Op::Sqrt: {
        const double a = evaluate(*node.lhs, x);
        if (a < 0.0) singular("sqrt of negative value", node, x);
        return std::sqrt(a);
    }
    case Op::Atan2: {
        const double y = evaluate(*node.lhs, x);
        const double xx = evaluate(*node.rhs, x);
        if (y == 0.0 && xx == 0.0) singular("atan2(0, 0)", node, x);
        return std::atan2(y, xx);
    }
    }
    singular("unknown operator", node, x);
}

} // namespace minsurf
