#pragma once

// Forward-mode second-order jets over expression trees.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/error.hpp"
#include "minsurf/expr.hpp"

namespace minsurf {

/// Value, gradient and (symmetric) Hessian of a scalar expression at a point.
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;

    static Jet2 constant(double v, int n) {
        return {v, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
    }

    static Jet2 variable(double v, int index, int n) {
        Jet2 j = constant(v, n);
        j.gradient[index] = 1.0;
        return j;
    }

    int dim() const noexcept { return static_cast<int>(gradient.size()); }
};

namespace detail {

// Writes only the upper triangle and mirrors it, so symmetry is exact.
template <class F>
void fill_symmetric(Eigen::MatrixXd& h, F&& entry) {
    const auto n = h.rows();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = j; k < n; ++k) {
            const double v = entry(j, k);
            h(j, k) = v;
            h(k, j) = v;
        }
}

/// f(u) given f(u.value), f'(u.value), f''(u.value).
inline Jet2 chain(const Jet2& u, double f, double df, double d2f) {
    Jet2 r;
    r.value = f;
    r.gradient = df * u.gradient;
    r.hessian.resize(u.hessian.rows(), u.hessian.cols());
    fill_symmetric(r.hessian, [&](auto j, auto k) {
        return df * u.hessian(j, k) + d2f * u.gradient[j] * u.gradient[k];
    });
    return r;
}

/// f(u, v) from the value, both partials and the three second partials.
inline Jet2 chain2(const Jet2& u, const Jet2& v, double f, double fu, double fv, double fuu, double fuv,
                   double fvv) {
    Jet2 r;
    r.value = f;
    r.gradient = fu * u.gradient + fv * v.gradient;
    r.hessian.resize(u.hessian.rows(), u.hessian.cols());
    fill_symmetric(r.hessian, [&](auto j, auto k) {
        const double gu = u.gradient[j], gv = v.gradient[j];
        const double hu = u.gradient[k], hv = v.gradient[k];
        return fu * u.hessian(j, k) + fv * v.hessian(j, k) + fuu * gu * hu + fvv * gv * hv +
               fuv * (gu * hv + gv * hu);
    });
    return r;
}

inline bool finite(const Jet2& j) {
    return std::isfinite(j.value) && j.gradient.allFinite() && j.hessian.allFinite();
}

} // namespace detail

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r{a.value + b.value, a.gradient + b.gradient, a.hessian + b.hessian};
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r{a.value - b.value, a.gradient - b.gradient, a.hessian - b.hessian};
    return r;
}

inline Jet2 operator-(const Jet2& a) { return {-a.value, -a.gradient, -a.hessian}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return detail::chain2(a, b, a.value * b.value, b.value, a.value, 0.0, 1.0, 0.0);
}

namespace detail {

[[noreturn]] inline void jet_singular(const char* what, const ExprNode& node, std::span<const double> x) {
    singular(what, node, x);
}

inline Jet2 eval_jet_node(const ExprNode& node, std::span<const double> x, int n) {
    auto sub = [&](const ExprPtr& c) { return eval_jet_node(*c, x, n); };
    Jet2 r;
    switch (node.op) {
    case Op::Constant: return Jet2::constant(node.value, n);
    case Op::Variable: return Jet2::variable(x[static_cast<std::size_t>(node.var)], node.var, n);
    case Op::Add: r = sub(node.lhs) + sub(node.rhs); break;
    case Op::Sub: r = sub(node.lhs) - sub(node.rhs); break;
    case Op::Mul: r = sub(node.lhs) * sub(node.rhs); break;
    case Op::Neg: r = -sub(node.lhs); break;
    case Op::Div: {
        const Jet2 a = sub(node.lhs), b = sub(node.rhs);
        if (b.value == 0.0) jet_singular("division by zero", node, x);
        const double q = a.value / b.value;
        const double ib = 1.0 / b.value;
        // q = a/b: q_a = 1/b, q_b = -a/b^2, q_ab = -1/b^2, q_bb = 2a/b^3
        r = chain2(a, b, q, ib, -q * ib, 0.0, -ib * ib, 2.0 * q * ib * ib);
        break;
    }
    case Op::Pow: {
        const Jet2 a = sub(node.lhs);
        if (is_constant(*node.rhs)) {
            const double p = evaluate(*node.rhs, x);
            const double u = a.value;
            const bool integral = std::nearbyint(p) == p;
            if (u < 0.0 && !integral) jet_singular("negative base with non-integer exponent", node, x);
            if (u == 0.0 && p < 2.0 && !(integral && p >= 0.0))
                jet_singular("derivative of power singular at zero base", node, x);
            const double f = std::pow(u, p);
            const double df = p == 0.0 ? 0.0 : p * std::pow(u, p - 1.0);
            const double d2f = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(u, p - 2.0);
            r = chain(a, f, df, d2f);
        } else {
            const Jet2 b = sub(node.rhs);
            if (!(a.value > 0.0)) jet_singular("variable exponent requires a positive base", node, x);
            // a^b = exp(b log a)
            const double la = std::log(a.value);
            const double f = std::pow(a.value, b.value);
            const double ia = 1.0 / a.value;
            const double fa = b.value * f * ia;
            const double fb = f * la;
            const double faa = b.value * (b.value - 1.0) * f * ia * ia;
            const double fab = f * ia * (1.0 + b.value * la);
            const double fbb = f * la * la;
            r = chain2(a, b, f, fa, fb, faa, fab, fbb);
        }
        break;
    }
    case Op::Sin: {
        const Jet2 a = sub(node.lhs);
        const double s = std::sin(a.value), c = std::cos(a.value);
        r = chain(a, s, c, -s);
        break;
    }
    case Op::Cos: {
        const Jet2 a = sub(node.lhs);
        const double s = std::sin(a.value), c = std::cos(a.value);
        r = chain(a, c, -s, -c);
        break;
    }
    case Op::Sinh: {
        const Jet2 a = sub(node.lhs);
        const double s = std::sinh(a.value), c = std::cosh(a.value);
        r = chain(a, s, c, s);
        break;
    }
    case Op::Cosh: {
        const Jet2 a = sub(node.lhs);
        const double s = std::sinh(a.value), c = std::cosh(a.value);
        r = chain(a, c, s, c);
        break;
    }
    case Op::Tanh: {
        const Jet2 a = sub(node.lhs);
        const double t = std::tanh(a.value);
        const double d = 1.0 - t * t;
        r = chain(a, t, d, -2.0 * t * d);
        break;
    }
    case Op::Exp: {
        const Jet2 a = sub(node.lhs);
        const double e = std::exp(a.value);
        r = chain(a, e, e, e);
        break;
    }
    case Op::Log: {
        const Jet2 a = sub(node.lhs);
        if (!(a.value > 0.0)) jet_singular("log of nonpositive value", node, x);
        const double ia = 1.0 / a.value;
        r = chain(a, std::log(a.value), ia, -ia * ia);
        break;
    }
    case Op::Sqrt: {
        const Jet2 a = sub(node.lhs);
        if (!(a.value > 0.0)) jet_singular("sqrt derivative undefined at nonpositive value", node, x);
        const double s = std::sqrt(a.value);
        r = chain(a, s, 0.5 / s, -0.25 / (s * a.value));
        break;
    }
    case Op::Atan2: {
        const Jet2 y = sub(node.lhs), xx = sub(node.rhs);
        const double r2 = y.value * y.value + xx.value * xx.value;
        if (r2 == 0.0) jet_singular("atan2(0, 0)", node, x);
        const double r4 = r2 * r2;
        const double xy = xx.value * y.value;
        // theta(y, x): d/dy = x/r^2, d/dx = -y/r^2
        r = chain2(y, xx, std::atan2(y.value, xx.value), xx.value / r2, -y.value / r2, -2.0 * xy / r4,
                   (y.value * y.value - xx.value * xx.value) / r4, 2.0 * xy / r4);
        break;
    }
    }
    if (!finite(r)) jet_singular("non-finite derivative", node, x);
    return r;
}

} // namespace detail

/// Exact value, gradient and Hessian of `expr` at `point`.
inline Jet2 eval_jet(const ExprNode& expr, std::span<const double> point) {
    return detail::eval_jet_node(expr, point, static_cast<int>(point.size()));
}

/// Central-difference gradient. Test and cross-check oracle only.
template <class F>
std::vector<double> fd_gradient(F&& f, std::span<const double> point, double h) {
    std::vector<double> x(point.begin(), point.end()), g(point.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double xj = x[j];
        x[j] = xj + h;
        const double fp = f(std::span<const double>(x));
        x[j] = xj - h;
        const double fm = f(std::span<const double>(x));
        x[j] = xj;
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline std::vector<double> fd_gradient(const ExprNode& expr, std::span<const double> point, double h) {
    return fd_gradient([&](std::span<const double> p) { return evaluate(expr, p); }, point, h);
}

/// Central-difference Hessian (second differences on the diagonal, four-point
/// cross stencil off it). Test and cross-check oracle only.
template <class F>
Eigen::MatrixXd fd_hessian(F&& f, std::span<const double> point, double h) {
    const auto n = static_cast<Eigen::Index>(point.size());
    std::vector<double> x(point.begin(), point.end());
    auto at = [&](std::size_t j, double dj, std::size_t k, double dk) {
        const double xj = x[j], xk = x[k];
        x[j] += dj;
        x[k] += dk;
        const double v = f(std::span<const double>(x));
        x[j] = xj;
        x[k] = xk;
        return v;
    };
    const double f0 = f(std::span<const double>(x));
    Eigen::MatrixXd hess(n, n);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double fp = at(j, h, j, 0.0), fm = at(j, -h, j, 0.0);
        hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = (fp - 2.0 * f0 + fm) / (h * h);
        for (std::size_t k = j + 1; k < x.size(); ++k) {
            const double v = (at(j, h, k, h) - at(j, h, k, -h) - at(j, -h, k, h) + at(j, -h, k, -h)) / (4.0 * h * h);
            hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
            hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return hess;
}

inline Eigen::MatrixXd fd_hessian(const ExprNode& expr, std::span<const double> point, double h) {
    return fd_hessian([&](std::span<const double> p) { return evaluate(expr, p); }, point, h);
}

} // namespace minsurf
