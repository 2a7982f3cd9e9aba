#pragma once

// Discrete volume functional under compactly supported vertex variations.
// This is the minimality oracle that the differential criteria are compared
// against; it never looks at the map's derivatives except for the normals
// already stored on the extracted geometry.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/error.hpp"
#include "minsurf/levelset.hpp"
#include "minsurf/mapdef.hpp"

namespace minsurf {

/// Smooth bump displacement amplitude * psi(|v - center|) * direction(v),
/// psi(r) = (1 - (r/radius)^2)^3 inside the ball.
struct VariationField {
    enum class Direction { Normal, Fixed };

    std::vector<double> center;
    double radius = 1.0;
    double amplitude = 1.0;
    Direction direction = Direction::Normal;
    Eigen::Vector3d vector = Eigen::Vector3d::Zero();  // used when direction == Fixed

    double kernel(double r) const {
        if (r >= radius) return 0.0;
        const double q = 1.0 - (r / radius) * (r / radius);
        return q * q * q;
    }

    Eigen::Vector3d center3() const {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < center.size() && i < 3; ++i) c[static_cast<Eigen::Index>(i)] = center[i];
        return c;
    }
};

/// Throws SupportOutsideDomain unless the support ball lies strictly inside `box`.
inline void require_support_inside(const VariationField& field, const Box& box) {
    if (field.center.size() != box.dim()) throw DimensionError("variation centre has wrong dimension");
    if (!(field.radius > 0.0)) throw SupportOutsideDomain("variation radius must be positive");
    if (!box.contains(field.center) || !(box.distance_to_boundary(field.center) > field.radius))
        throw SupportOutsideDomain("variation support leaves the domain box");
}

namespace detail {

template <class G>
G perturb_impl(const G& base, const VariationField& field, double eps) {
    const bool normal = field.direction == VariationField::Direction::Normal;
    if (normal && base.normals.size() != base.vertices.size())
        throw Error("normal variation needs per-vertex normals");
    G out = base;
    const Eigen::Vector3d c = field.center3();
    for (std::size_t k = 0; k < out.vertices.size(); ++k) {
        const double psi = field.kernel((base.vertices[k] - c).norm());
        if (psi == 0.0) continue;
        const Eigen::Vector3d& dir = normal ? base.normals[k] : field.vector;
        out.vertices[k] = base.vertices[k] + (eps * field.amplitude * psi) * dir;
    }
    return out;
}

} // namespace detail

/// Displaces every vertex by eps * field(v). Connectivity and normals are kept.
inline LevelGeometry perturb(const LevelGeometry& base, const VariationField& field, double eps) {
    return std::visit([&](const auto& g) -> LevelGeometry { return detail::perturb_impl(g, field, eps); }, base);
}

inline LevelGeometry perturb(const LevelGeometry& base, const VariationField& field, double eps, const Box& box) {
    require_support_inside(field, box);
    return perturb(base, field, eps);
}

struct VariationResult {
    double first_variation = 0.0;
    double second_variation = 0.0;
    double measure = 0.0;
    std::vector<double> epsilons_used;
    bool stationary = false;
};

inline const std::vector<double>& default_epsilons() {
    static const std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
    return eps;
}

/// d/d(eps) of the measure at eps = 0: central differences at each eps,
/// Richardson-extrapolated over the halving schedule. The second variation is
/// the 3-point stencil at the smallest eps.
inline VariationResult first_variation(const LevelGeometry& base, const VariationField& field, const Box& box,
                                       double tol = 1e-3,
                                       const std::vector<double>& epsilons = default_epsilons()) {
    require_support_inside(field, box);
    if (epsilons.empty()) throw Error("empty epsilon schedule");
    VariationResult res;
    res.measure = measure(base);
    res.epsilons_used = epsilons;

    std::vector<double> table;
    double plus = 0.0, minus = 0.0;
    for (double eps : epsilons) {
        plus = measure(perturb(base, field, eps));
        minus = measure(perturb(base, field, -eps));
        table.push_back((plus - minus) / (2.0 * eps));
    }
    // each halving of eps removes the next even power of the error
    double factor = 4.0;
    for (std::size_t level = 1; level < table.size(); ++level, factor *= 4.0)
        for (std::size_t k = table.size() - 1; k >= level; --k) {
            table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
            if (k == level) break;
        }
    res.first_variation = table.back();
    const double h = epsilons.back();
    res.second_variation = (plus - 2.0 * res.measure + minus) / (h * h);
    res.stationary = std::abs(res.first_variation) <= tol * (1.0 + std::abs(res.measure));
    return res;
}

struct SweepOptions {
    int fields = 16;
    std::uint64_t seed = 0;
    double tol = 1e-3;
};

struct SweepResult {
    bool stationary = true;
    int worst_field = -1;
    double max_first_variation = 0.0;
    double measure = 0.0;
    std::vector<VariationField> fields;
    std::vector<VariationResult> results;
};

/// k random bump fields on an extracted leaf. Centres are leaf vertices at
/// least a tenth of the shortest box extent from the boundary; radius is
/// 0.2 * box diagonal, capped at 0.9 of the centre's boundary distance.
/// Normal bumps where the leaf has normals, otherwise a random fixed direction.
inline SweepResult stationarity_sweep(const LevelGeometry& leaf, const Box& box, const SweepOptions& opt = {}) {
    SweepResult out;
    out.measure = measure(leaf);
    const auto& verts = vertices_of(leaf);
    const bool has_normals = normals_of(leaf).size() == verts.size() && !verts.empty();
    const auto dim = box.dim();

    std::vector<std::size_t> admissible;
    const double margin = 0.1 * box.min_extent();
    for (std::size_t k = 0; k < verts.size(); ++k) {
        if (box.distance_to_boundary(std::span<const double>(verts[k].data(), dim)) >= margin) admissible.push_back(k);
    }
    if (admissible.empty()) return out;

    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int f = 0; f < opt.fields; ++f) {
        VariationField field;
        const auto& v = verts[admissible[pick(rng)]];
        field.center.assign(v.data(), v.data() + dim);
        const double dist = box.distance_to_boundary(field.center);
        field.radius = std::min(0.2 * box.diagonal(), 0.9 * dist);
        field.amplitude = 1.0;
        if (has_normals) {
            field.direction = VariationField::Direction::Normal;
        } else {
            field.direction = VariationField::Direction::Fixed;
            Eigen::Vector3d d = Eigen::Vector3d::Zero();
            for (std::size_t a = 0; a < dim; ++a) d[static_cast<Eigen::Index>(a)] = gauss(rng);
            field.vector = d.normalized();
        }
        const auto r = first_variation(leaf, field, box, opt.tol);
        if (std::abs(r.first_variation) > out.max_first_variation || out.worst_field < 0) {
            out.max_first_variation = std::abs(r.first_variation);
            out.worst_field = f;
        }
        out.stationary = out.stationary && r.stationary;
        out.fields.push_back(std::move(field));
        out.results.push_back(r);
    }
    return out;
}

/// Extracts phi^-1(c) and sweeps it. Throws DomainError if the level set is empty.
inline SweepResult stationarity_sweep(const MapDefinition& map, std::span<const double> c,
                                      const std::vector<int>& cells, const SweepOptions& opt = {}) {
    const auto ls = extract_level_set(map, c, cells);
    if (ls.empty) throw DomainError("level set is empty on the domain box");
    return stationarity_sweep(ls.geometry, map.domain, opt);
}

} // namespace minsurf
