#pragma once

// Jacobi matrix, regularity, exterior differential, Hesse and sectional Hesse
// matrices, minimality residuals and implicit mean curvature of m-maps.
//
// Index conventions: component indices and MultiIndex entries are 0-based in
// the API. Textual renderings (reports, tags) use 1-based coordinates.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/autodiff.hpp"
#include "minsurf/error.hpp"
#include "minsurf/linalg.hpp"
#include "minsurf/mapdef.hpp"

namespace minsurf {

/// Strictly ascending selection of `size()` coordinates out of n.
/// Labels the minor components of an m-form (the basis co-vectors e^J).
struct MultiIndex {
    std::vector<int> entries;

    std::size_t size() const noexcept { return entries.size(); }
    int operator[](std::size_t k) const { return entries[k]; }
    bool operator==(const MultiIndex&) const = default;

    bool contains(int j) const { return std::find(entries.begin(), entries.end(), j) != entries.end(); }

    std::string label() const {
        std::string s = "(";
        for (std::size_t k = 0; k < entries.size(); ++k) s += (k ? "," : "") + std::to_string(entries[k] + 1);
        return s + ")";
    }
};

/// All MultiIndex(m, n) in lexicographic order; exactly C(n, m) members.
inline std::vector<MultiIndex> multi_indices(int m, int n) {
    std::vector<MultiIndex> out;
    if (m < 0 || m > n) return out;
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        out.push_back({idx});
        int k = m - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - m + k) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

inline long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

struct JacobianValue {
    Eigen::MatrixXd matrix;  // m x n
    std::vector<double> point;
};

/// Components of d(phi) at a point, aligned with multi_indices(m, n).
struct MFormValue {
    int n = 0;
    int m = 0;
    std::vector<double> point;
    std::vector<double> components;
};

struct MinimalityReading {
    enum class Kind { FullTrace, SectionalAll };
    Kind kind = Kind::FullTrace;
    int section = 0;  // SectionalAll only, 1 <= section <= n

    static MinimalityReading full_trace() { return {Kind::FullTrace, 0}; }
    static MinimalityReading sectional_all(int s) { return {Kind::SectionalAll, s}; }

    bool operator==(const MinimalityReading&) const = default;

    std::string tag() const {
        return kind == Kind::FullTrace ? "FULL_TRACE" : "SECTIONAL_ALL(" + std::to_string(section) + ")";
    }

    /// Whether the reading is defined for ambient dimension n.
    bool applies_to(int n) const { return kind == Kind::FullTrace || (section >= 1 && section <= n); }
};

/// Parses "FULL_TRACE" or "SECTIONAL_ALL(s)".
inline MinimalityReading parse_reading(std::string_view tag) {
    if (tag == "FULL_TRACE") return MinimalityReading::full_trace();
    constexpr std::string_view prefix = "SECTIONAL_ALL(";
    if (tag.starts_with(prefix) && tag.ends_with(")")) {
        const auto body = tag.substr(prefix.size(), tag.size() - prefix.size() - 1);
        int s = 0;
        auto res = std::from_chars(body.data(), body.data() + body.size(), s);
        if (res.ec == std::errc{} && res.ptr == body.data() + body.size() && s >= 1)
            return MinimalityReading::sectional_all(s);
    }
    throw SchemaError("unknown minimality reading '" + std::string(tag) + "'");
}

/// Jets of every component at `point`.
inline std::vector<Jet2> component_jets(const MapDefinition& map, std::span<const double> point) {
    std::vector<Jet2> jets;
    jets.reserve(map.components.size());
    for (const auto& c : map.components) jets.push_back(eval_jet(*c, point));
    return jets;
}

inline JacobianValue jacobi_matrix(const MapDefinition& map, std::span<const double> point) {
    const auto m = static_cast<Eigen::Index>(map.components.size());
    JacobianValue jv{Eigen::MatrixXd(m, map.n), std::vector<double>(point.begin(), point.end())};
    for (Eigen::Index i = 0; i < m; ++i)
        jv.matrix.row(i) = eval_jet(*map.components[static_cast<std::size_t>(i)], point).gradient.transpose();
    return jv;
}

/// Minor m-form of a Jacobian: component k is the determinant of the columns
/// picked by the k-th MultiIndex. For a square Jacobian there is one component.
inline MFormValue exterior_differential(const JacobianValue& jac) {
    const int m = static_cast<int>(jac.matrix.rows());
    const int n = static_cast<int>(jac.matrix.cols());
    MFormValue form{n, m, jac.point, {}};
    for (const auto& J : multi_indices(m, n)) {
        Eigen::MatrixXd minor(m, m);
        for (int k = 0; k < m; ++k) minor.col(k) = jac.matrix.col(J[static_cast<std::size_t>(k)]);
        form.components.push_back(linalg::determinant(minor));
    }
    return form;
}

inline MFormValue exterior_differential(const MapDefinition& map, std::span<const double> point) {
    return exterior_differential(jacobi_matrix(map, point));
}

inline std::vector<Eigen::MatrixXd> hessians(const MapDefinition& map, std::span<const double> point) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& c : map.components) out.push_back(eval_jet(*c, point).hessian);
    return out;
}

/// Principal submatrix of the Hessian of `component` selected by J.
inline Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& h, const MultiIndex& J) {
    const auto s = static_cast<Eigen::Index>(J.size());
    Eigen::MatrixXd sub(s, s);
    for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = 0; b < s; ++b) sub(a, b) = h(J[static_cast<std::size_t>(a)], J[static_cast<std::size_t>(b)]);
    return sub;
}

inline Eigen::MatrixXd sectional_hessian(const MapDefinition& map, int component, const MultiIndex& J,
                                         std::span<const double> point) {
    if (component < 0 || component >= static_cast<int>(map.components.size()))
        throw DimensionError("component index out of range");
    return principal_submatrix(eval_jet(*map.components[static_cast<std::size_t>(component)], point).hessian, J);
}

/// Residual vector from Hessians already evaluated at a point.
inline std::vector<double> minimality_residual(const std::vector<Eigen::MatrixXd>& hess, int n,
                                               const MinimalityReading& reading) {
    std::vector<double> r;
    if (reading.kind == MinimalityReading::Kind::FullTrace) {
        // summed in index order so FULL_TRACE equals the sum of SECTIONAL_ALL(1) exactly
        for (const auto& h : hess) {
            double t = 0.0;
            for (Eigen::Index j = 0; j < h.rows(); ++j) t += h(j, j);
            r.push_back(t);
        }
        return r;
    }
    if (!reading.applies_to(n)) throw DimensionError("section size " + std::to_string(reading.section) +
                                                     " exceeds ambient dimension " + std::to_string(n));
    const auto sections = multi_indices(reading.section, n);
    for (const auto& h : hess)
        for (const auto& J : sections) {
            double t = 0.0;
            for (int j : J.entries) t += h(j, j);
            r.push_back(t);
        }
    return r;
}

/// FULL_TRACE: the m Laplacians. SECTIONAL_ALL(s): m*C(n,s) sectional traces,
/// component-major, sections in lexicographic order. Zero means minimal under
/// the reading at this point.
inline std::vector<double> minimality_residual(const MapDefinition& map, std::span<const double> point,
                                               const MinimalityReading& reading) {
    return minimality_residual(hessians(map, point), map.n, reading);
}

/// H = div(grad phi / |grad phi|) = (|g|^2 tr(Hess) - g^T Hess g) / |g|^3,
/// the sum of principal curvatures of the level hypersurface of one component
/// with respect to the normal grad phi / |grad phi|.
inline double implicit_mean_curvature(const Jet2& jet, double gradient_floor = 1e-12) {
    const double g2 = jet.gradient.squaredNorm();
    const double g = std::sqrt(g2);
    if (!(g > gradient_floor)) throw DegenerateGradient("gradient norm " + format_double(g) + " below floor");
    const double ghg = jet.gradient.dot(jet.hessian * jet.gradient);
    return (g2 * jet.hessian.trace() - ghg) / (g2 * g);
}

inline double implicit_mean_curvature(const MapDefinition& map, std::span<const double> point, int component = 0,
                                      double gradient_floor = 1e-12) {
    if (component < 0 || component >= static_cast<int>(map.components.size()))
        throw DimensionError("component index out of range");
    return implicit_mean_curvature(eval_jet(*map.components[static_cast<std::size_t>(component)], point),
                                   gradient_floor);
}

// ---------------------------------------------------------------------------
// Regularity

struct Sampler {
    enum class Kind { Grid, Random };
    Kind kind = Kind::Grid;
    int count = 17;  // points per axis for Grid, total points for Random
    std::uint64_t seed = 0;

    /// Points in the box. Grid includes both faces of every axis.
    std::vector<std::vector<double>> points(const Box& box) const {
        const std::size_t n = box.dim();
        std::vector<std::vector<double>> pts;
        if (kind == Kind::Random) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int k = 0; k < count; ++k) {
                std::vector<double> p(n);
                for (std::size_t i = 0; i < n; ++i) p[i] = box.min[i] + u(rng) * box.extent(i);
                pts.push_back(std::move(p));
            }
            return pts;
        }
        const int c = std::max(count, 2);
        std::vector<int> idx(n, 0);
        for (;;) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = idx[i] == c - 1 ? box.max[i] : box.min[i] + box.extent(i) * idx[i] / (c - 1);
            pts.push_back(std::move(p));
            std::size_t i = 0;
            while (i < n && ++idx[i] == c) idx[i++] = 0;
            if (i == n) break;
        }
        return pts;
    }
};

struct RegularityWitness {
    std::vector<double> point;
    double singular_value = 0.0;  // m-th singular value; NaN when evaluation failed
    std::string error;
};

struct RegularityReport {
    bool regular = true;
    double min_singular_value = std::numeric_limits<double>::infinity();
    double max_singular_value = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::size_t failures = 0;
    std::vector<RegularityWitness> witnesses;  // at most max_witnesses
};

/// Rank-m test of the Jacobian over the sampled points. A point fails when its
/// m-th singular value is <= tau = max(n, m) * sigma_max * 2^-40, where
/// sigma_max is the largest singular value seen over the whole sample.
inline RegularityReport regularity_check(const MapDefinition& map, const Sampler& sampler,
                                         std::size_t max_witnesses = 10) {
    const int m = static_cast<int>(map.components.size());
    RegularityReport rep;
    struct Sample {
        std::vector<double> point;
        double sigma;
        std::string error;
    };
    std::vector<Sample> samples;
    for (auto& p : sampler.points(map.domain)) {
        try {
            const auto sv = linalg::singular_values(jacobi_matrix(map, p).matrix);
            rep.max_singular_value = std::max(rep.max_singular_value, sv[0]);
            samples.push_back({std::move(p), sv[m - 1], {}});
        } catch (const EvaluationError& e) {
            samples.push_back({std::move(p), std::numeric_limits<double>::quiet_NaN(), e.what()});
        }
    }
    rep.samples = samples.size();
    rep.tolerance = std::max(map.n, m) * rep.max_singular_value * std::ldexp(1.0, -40);
    for (auto& s : samples) {
        const bool failed = !s.error.empty() || !(s.sigma > rep.tolerance);
        if (s.error.empty()) rep.min_singular_value = std::min(rep.min_singular_value, s.sigma);
        if (!failed) continue;
        rep.regular = false;
        ++rep.failures;
        if (rep.witnesses.size() < max_witnesses) rep.witnesses.push_back({s.point, s.sigma, s.error});
    }
    if (samples.empty() || rep.max_singular_value == 0.0) rep.regular = false;
    return rep;
}

} // namespace minsurf
