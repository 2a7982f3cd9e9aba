#pragma once

// Constant-metric exterior calculus on sampled m-forms, by central differences.
// Components are stored over ascending multi-indices (see multi_indices).

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "minsurf/diffgeo.hpp"
#include "minsurf/error.hpp"
#include "minsurf/mapdef.hpp"

namespace minsurf {

/// Form components at a point, in multi_indices(m, n) order.
using FormField = std::function<std::vector<double>(std::span<const double>)>;

struct FormSample {
    enum class Source { ExteriorDifferential, UserComponents };

    int n = 0;
    int m = 0;
    Box box;
    Source source = Source::UserComponents;
    std::string label;
    FormField field;
    std::vector<std::vector<double>> points;
    std::vector<MFormValue> values;

    std::size_t component_count() const { return static_cast<std::size_t>(binomial(n, m)); }
};

/// Cell-centred grid with `per_axis` points per axis, inset by `margin` on every face.
inline std::vector<std::vector<double>> grid_points(const Box& box, int per_axis, double margin = 0.0) {
    const auto n = box.dim();
    std::vector<std::vector<double>> pts;
    std::vector<int> idx(n, 0);
    for (;;) {
        std::vector<double> p(n);
        for (std::size_t a = 0; a < n; ++a) {
            const double lo = box.min[a] + margin, span = box.extent(a) - 2.0 * margin;
            p[a] = lo + span * (idx[a] + 0.5) / per_axis;
        }
        pts.push_back(std::move(p));
        std::size_t a = n;
        while (a-- > 0) {
            if (++idx[a] < per_axis) break;
            idx[a] = 0;
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
    return pts;
}

inline FormSample sample_form(int n, int m, Box box, FormField field, std::vector<std::vector<double>> points,
                              std::string label = "user") {
    if (m < 0 || m > n) throw DimensionError("form degree out of range");
    FormSample s;
    s.n = n;
    s.m = m;
    s.box = std::move(box);
    s.field = std::move(field);
    s.label = std::move(label);
    s.points = std::move(points);
    for (const auto& p : s.points) {
        auto c = s.field(p);
        if (c.size() != s.component_count()) throw DimensionError("form has wrong component count");
        s.values.push_back(MFormValue{n, m, p, std::move(c)});
    }
    return s;
}

/// d(phi) sampled on a cell-centred grid kept `margin` away from the faces.
inline FormSample sample_exterior_differential(const MapDefinition& map, int per_axis, double margin) {
    const int m = static_cast<int>(map.components.size());
    auto field = [map](std::span<const double> x) { return exterior_differential(map, x).components; };
    auto s = sample_form(map.n, m, map.domain, field, grid_points(map.domain, per_axis, margin), "d(" + map.name + ")");
    s.source = FormSample::Source::ExteriorDifferential;
    return s;
}

namespace detail {

inline std::size_t index_of(const std::vector<MultiIndex>& list, const MultiIndex& J) {
    return static_cast<std::size_t>(std::find(list.begin(), list.end(), J) - list.begin());
}

inline void require_interior(const FormSample& form, double h) {
    for (const auto& p : form.points)
        if (form.box.distance_to_boundary(p) < 2.0 * h)
            throw DomainError("form sample points must stay 2h inside the box");
}

/// Central difference of every component along axis j at p.
inline std::vector<double> partial(const FormSample& form, const std::vector<double>& p, int j, double h) {
    auto x = p;
    x[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(j)] + h;
    const auto fp = form.field(x);
    x[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(j)] - h;
    const auto fm = form.field(x);
    std::vector<double> d(fp.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (fp[k] - fm[k]) / (2.0 * h);
    return d;
}

// d omega at p over multi_indices(m+1, n).
inline std::vector<double> exterior_derivative_at(const FormSample& form, const std::vector<double>& p, double h) {
    if (form.m >= form.n) return {};
    const auto src = multi_indices(form.m, form.n);
    const auto dst = multi_indices(form.m + 1, form.n);
    std::vector<std::vector<double>> partials;
    for (int j = 0; j < form.n; ++j) partials.push_back(partial(form, p, j, h));
    std::vector<double> out;
    for (const auto& K : dst) {
        double s = 0.0;
        for (std::size_t i = 0; i < K.size(); ++i) {
            MultiIndex rest;
            for (std::size_t q = 0; q < K.size(); ++q)
                if (q != i) rest.entries.push_back(K[q]);
            const double term = partials[static_cast<std::size_t>(K[i])][index_of(src, rest)];
            s += (i % 2 == 0) ? term : -term;
        }
        out.push_back(s);
    }
    return out;
}

// delta omega = -sum_j d/dx_j (e_j contracted into omega), over multi_indices(m-1, n).
inline std::vector<double> codifferential_at(const FormSample& form, const std::vector<double>& p, double h) {
    if (form.m == 0) return {};
    const auto src = multi_indices(form.m, form.n);
    const auto dst = multi_indices(form.m - 1, form.n);
    std::vector<std::vector<double>> partials;
    for (int j = 0; j < form.n; ++j) partials.push_back(partial(form, p, j, h));
    std::vector<double> out;
    for (const auto& I : dst) {
        double s = 0.0;
        for (int j = 0; j < form.n; ++j) {
            if (I.contains(j)) continue;
            MultiIndex J;
            std::size_t pos = 0;
            for (int e : I.entries)
                if (e < j) ++pos;
            J.entries = I.entries;
            J.entries.insert(J.entries.begin() + static_cast<std::ptrdiff_t>(pos), j);
            const double term = partials[static_cast<std::size_t>(j)][index_of(src, J)];
            s += (pos % 2 == 0) ? term : -term;
        }
        out.push_back(-s);
    }
    return out;
}

inline double max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

} // namespace detail

/// Max-norm of the numeric exterior derivative over the sample points.
inline double check_closedness(const FormSample& form, double h) {
    detail::require_interior(form, h);
    double r = 0.0;
    for (const auto& p : form.points) r = std::max(r, detail::max_abs(detail::exterior_derivative_at(form, p, h)));
    return r;
}

/// Max-norm of the numeric codifferential over the sample points.
inline double codifferential_norm(const FormSample& form, double h) {
    detail::require_interior(form, h);
    double r = 0.0;
    for (const auto& p : form.points) r = std::max(r, detail::max_abs(detail::codifferential_at(form, p, h)));
    return r;
}

struct HarmonicityResult {
    double d_residual = 0.0;
    double delta_residual = 0.0;
    double hodge_residual = 0.0;
};

/// Residuals of d and delta; (d + delta) omega lands in two degrees, so its norm is their max.
inline HarmonicityResult check_linear_harmonicity(const FormSample& form, double h) {
    HarmonicityResult r;
    r.d_residual = check_closedness(form, h);
    r.delta_residual = codifferential_norm(form, h);
    r.hodge_residual = std::max(r.d_residual, r.delta_residual);
    return r;
}

struct PotentialOptions {
    int intervals = 128;       // Simpson intervals across a full box extent
    int probes_per_axis = 6;   // cell-centred probe grid
    double fd_step = 1e-3;     // for the gradient check, relative to the box extent
    double exact_tol = 1e-6;   // path discrepancy allowed for an exact form
};

struct PotentialResult {
    std::vector<double> base;
    std::function<double(std::span<const double>)> potential;           // axis order x1, x2, ..., xn
    std::function<double(std::span<const double>)> reversed_potential;  // axis order xn, ..., x1
    std::vector<std::vector<double>> probes;
    double max_error = 0.0;          // max |grad(potential) - omega| over the probes
    double path_discrepancy = 0.0;   // max |potential - reversed_potential| over the probes
    std::vector<double> worst_probe; // where the discrepancy peaks
    bool exact = true;
};

namespace detail {

// Integral of omega along the axis-parallel path from base to x, visiting axes in `order`.
inline double path_integral(const FormSample& form, std::span<const double> base, std::span<const double> x,
                            const std::vector<int>& order, int intervals) {
    std::vector<double> p(base.begin(), base.end());
    double total = 0.0;
    for (int a : order) {
        const auto ai = static_cast<std::size_t>(a);
        const double from = p[ai], to = x[ai];
        const double len = to - from;
        if (len != 0.0) {
            int steps = static_cast<int>(std::ceil(std::abs(len) / form.box.extent(ai) * intervals));
            steps = std::max(2, steps + steps % 2);
            const double hstep = len / steps;
            double s = 0.0;
            for (int k = 0; k <= steps; ++k) {
                p[ai] = from + hstep * k;
                if (k == steps) p[ai] = to;
                const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                s += w * form.field(p)[ai];
            }
            total += s * hstep / 3.0;
        }
        p[ai] = to;
    }
    return total;
}

} // namespace detail

/// Potential of a 1-form by axis-parallel path integration from `base`.
/// A second reconstruction with the reversed axis order exposes path
/// dependence; a discrepancy above exact_tol marks the form non-exact.
inline PotentialResult reconstruct_potential(const FormSample& form, std::span<const double> base,
                                             const PotentialOptions& opt = {}) {
    if (form.m != 1) throw DimensionError("potential reconstruction needs a 1-form");
    if (base.size() != static_cast<std::size_t>(form.n)) throw DimensionError("base point has wrong dimension");
    PotentialResult res;
    res.base.assign(base.begin(), base.end());
    std::vector<int> fwd(static_cast<std::size_t>(form.n)), rev;
    for (int a = 0; a < form.n; ++a) fwd[static_cast<std::size_t>(a)] = a;
    rev.assign(fwd.rbegin(), fwd.rend());
    const auto b = res.base;
    const int intervals = opt.intervals;
    res.potential = [form, b, fwd, intervals](std::span<const double> x) {
        return detail::path_integral(form, b, x, fwd, intervals);
    };
    res.reversed_potential = [form, b, rev, intervals](std::span<const double> x) {
        return detail::path_integral(form, b, x, rev, intervals);
    };

    res.probes = grid_points(form.box, opt.probes_per_axis);
    for (const auto& p : res.probes) {
        const double u = res.potential(p);
        const double disc = std::abs(u - res.reversed_potential(p));
        if (res.worst_probe.empty() || disc > res.path_discrepancy) {
            res.path_discrepancy = disc;
            res.worst_probe = p;
        }
        const auto w = form.field(p);
        auto x = p;
        for (std::size_t a = 0; a < x.size(); ++a) {
            const double h = opt.fd_step * form.box.extent(a);
            x[a] = p[a] + h;
            const double up = res.potential(x);
            x[a] = p[a] - h;
            const double um = res.potential(x);
            x[a] = p[a];
            res.max_error = std::max(res.max_error, std::abs((up - um) / (2.0 * h) - w[a]));
        }
    }
    res.exact = res.path_discrepancy <= opt.exact_tol;
    return res;
}

} // namespace minsurf
