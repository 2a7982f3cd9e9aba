#pragma once

// Level sets phi^-1(c) of a map over its domain box and the foliation they
// form. Supported signatures:
//   (n=2, m=1)  marching squares     -> Polyline
//   (n=3, m=1)  marching cubes       -> Mesh
//   (n=3, m=2)  curve continuation   -> Polyline
//
// Inside is phi >= c; normals point toward increasing phi. Vertices and
// simplices are emitted in lexicographic cell order (x1 slowest).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "minsurf/diffgeo.hpp"
#include "minsurf/error.hpp"
#include "minsurf/mapdef.hpp"
#include "minsurf/marching_cubes_table.hpp"

namespace minsurf {

/// Triangle mesh in E^3.
struct Mesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Eigen::Vector3d> normals;  // per vertex, unit grad(phi) direction

    bool empty() const noexcept { return triangles.empty(); }
};

/// Segment set in E^2 or E^3. 2-D vertices keep a zero third coordinate.
struct Polyline {
    int dim = 2;
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 2>> segments;
    std::vector<Eigen::Vector3d> normals;  // per vertex for hypersurface curves (n=2); empty otherwise
    bool closed = false;                   // every chain closes on itself

    bool empty() const noexcept { return segments.empty(); }
};

using LevelGeometry = std::variant<Mesh, Polyline>;

inline double mesh_area(const Mesh& mesh) {
    double a = 0.0;
    for (const auto& t : mesh.triangles) {
        const auto& p = mesh.vertices[static_cast<std::size_t>(t[0])];
        a += 0.5 * (mesh.vertices[static_cast<std::size_t>(t[1])] - p)
                       .cross(mesh.vertices[static_cast<std::size_t>(t[2])] - p)
                       .norm();
    }
    return a;
}

inline double polyline_length(const Polyline& line) {
    double l = 0.0;
    for (const auto& s : line.segments)
        l += (line.vertices[static_cast<std::size_t>(s[1])] - line.vertices[static_cast<std::size_t>(s[0])]).norm();
    return l;
}

/// Area of a mesh or length of a polyline.
inline double measure(const LevelGeometry& g) {
    return std::visit([](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Mesh>)
            return mesh_area(x);
        else
            return polyline_length(x);
    }, g);
}

inline bool is_empty(const LevelGeometry& g) {
    return std::visit([](const auto& x) { return x.empty(); }, g);
}

inline const std::vector<Eigen::Vector3d>& vertices_of(const LevelGeometry& g) {
    return std::visit([](const auto& x) -> const std::vector<Eigen::Vector3d>& { return x.vertices; }, g);
}

inline const std::vector<Eigen::Vector3d>& normals_of(const LevelGeometry& g) {
    return std::visit([](const auto& x) -> const std::vector<Eigen::Vector3d>& { return x.normals; }, g);
}

/// One extracted level set. `empty` flags a level that misses the box.
struct LevelSet {
    std::vector<double> level;
    LevelGeometry geometry;
    bool empty = true;

    double measure() const { return minsurf::measure(geometry); }
};

/// Node samples of one component on a regular grid over the domain box.
struct ScalarGrid {
    Box box;
    std::vector<int> cells;  // per axis
    std::vector<double> values;

    std::size_t nodes(std::size_t axis) const { return static_cast<std::size_t>(cells[axis]) + 1; }

    double coord(std::size_t axis, int i) const {
        if (i == cells[axis]) return box.max[axis];
        return box.min[axis] + box.extent(axis) * i / cells[axis];
    }

    double cell_size(std::size_t axis) const { return box.extent(axis) / cells[axis]; }

    double cell_diagonal() const {
        double s = 0.0;
        for (std::size_t a = 0; a < cells.size(); ++a) s += cell_size(a) * cell_size(a);
        return std::sqrt(s);
    }

    double min_cell() const {
        double s = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < cells.size(); ++a) s = std::min(s, cell_size(a));
        return s;
    }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nodes(1) + static_cast<std::size_t>(j); }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * nodes(1) + static_cast<std::size_t>(j)) * nodes(2) + static_cast<std::size_t>(k);
    }
};

/// Samples every component of `map` at the grid nodes.
inline std::vector<ScalarGrid> sample_grid(const MapDefinition& map, const std::vector<int>& cells) {
    const auto n = static_cast<std::size_t>(map.n);
    if (cells.size() != n) throw DimensionError("grid needs one resolution per axis");
    for (int c : cells)
        if (c < 1) throw DimensionError("grid resolution must be positive");
    std::vector<ScalarGrid> grids(map.components.size());
    for (auto& g : grids) {
        g.box = map.domain;
        g.cells = cells;
    }
    std::size_t total = 1;
    for (std::size_t a = 0; a < n; ++a) total *= static_cast<std::size_t>(cells[a]) + 1;
    for (auto& g : grids) g.values.resize(total);

    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t a = 0; a < n; ++a) x[a] = grids[0].coord(a, idx[a]);
        for (std::size_t c = 0; c < grids.size(); ++c) grids[c].values[flat] = evaluate(*map.components[c], x);
        // last axis fastest
        for (std::size_t a = n; a-- > 0;) {
            if (++idx[a] <= cells[a]) break;
            idx[a] = 0;
        }
    }
    return grids;
}

namespace detail {

inline Eigen::Vector3d unit_gradient(const ExprNode& e, const Eigen::Vector3d& v, int dim) {
    const Jet2 j = eval_jet(e, std::span<const double>(v.data(), static_cast<std::size_t>(dim)));
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (int a = 0; a < dim; ++a) g[a] = j.gradient[a];
    const double len = g.norm();
    return len > 0.0 ? Eigen::Vector3d(g / len) : Eigen::Vector3d::Zero();
}

inline Eigen::Vector3d lerp_point(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, double v0, double v1,
                                  double c) {
    const double t = (c - v0) / (v1 - v0);
    return p0 + t * (p1 - p0);
}

inline void mark_closed(Polyline& line) {
    std::vector<int> degree(line.vertices.size(), 0);
    for (const auto& s : line.segments) {
        ++degree[static_cast<std::size_t>(s[0])];
        ++degree[static_cast<std::size_t>(s[1])];
    }
    line.closed = !line.segments.empty() &&
                  std::all_of(degree.begin(), degree.end(), [](int d) { return d == 2; });
}

inline Polyline marching_squares(const MapDefinition& map, const ScalarGrid& g, double c) {
    Polyline out;
    out.dim = 2;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    const std::uint64_t ni = g.nodes(0), nj = g.nodes(1);

    auto node = [&](int i, int j) { return Eigen::Vector3d(g.coord(0, i), g.coord(1, j), 0.0); };
    auto vertex_on = [&](int axis, int i, int j) {
        const std::uint64_t key = (static_cast<std::uint64_t>(axis) * ni + static_cast<std::uint64_t>(i)) * nj +
                                  static_cast<std::uint64_t>(j);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        const int i1 = i + (axis == 0), j1 = j + (axis == 1);
        const auto p = lerp_point(node(i, j), node(i1, j1), g.values[g.index(i, j)], g.values[g.index(i1, j1)], c);
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(p);
        edge_vertex.emplace(key, id);
        return id;
    };

    for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j) {
            const double v[4] = {g.values[g.index(i, j)], g.values[g.index(i + 1, j)],
                                 g.values[g.index(i + 1, j + 1)], g.values[g.index(i, j + 1)]};
            int code = 0;
            for (int k = 0; k < 4; ++k)
                if (v[k] >= c) code |= 1 << k;
            if (code == 0 || code == 15) continue;
            // edges: 0 bottom, 1 right, 2 top, 3 left
            auto edge = [&](int e) {
                switch (e) {
                case 0: return vertex_on(0, i, j);
                case 1: return vertex_on(1, i + 1, j);
                case 2: return vertex_on(0, i, j + 1);
                default: return vertex_on(1, i, j);
                }
            };
            auto seg = [&](int a, int b) { out.segments.push_back({edge(a), edge(b)}); };
            if (code == 5 || code == 10) {
                const std::vector<double> mid{0.5 * (g.coord(0, i) + g.coord(0, i + 1)),
                                              0.5 * (g.coord(1, j) + g.coord(1, j + 1))};
                const bool center_inside = evaluate(*map.components[0], mid) >= c;
                // corners 0,2 inside (code 5) joined through an inside center
                if ((code == 5) == center_inside) {
                    seg(0, 1);
                    seg(2, 3);
                } else {
                    seg(3, 0);
                    seg(1, 2);
                }
                continue;
            }
            int crossings[2];
            int nc = 0;
            for (int e = 0; e < 4; ++e) {
                const bool a = (code >> e) & 1, b = (code >> ((e + 1) % 4)) & 1;
                if (a != b) crossings[nc++] = e;
            }
            seg(crossings[0], crossings[1]);
        }
    out.normals.reserve(out.vertices.size());
    for (const auto& p : out.vertices) out.normals.push_back(unit_gradient(*map.components[0], p, 2));
    mark_closed(out);
    return out;
}

inline Mesh marching_cubes(const MapDefinition& map, const ScalarGrid& g, double c) {
    Mesh out;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    const std::uint64_t ni = g.nodes(0), nj = g.nodes(1), nk = g.nodes(2);
    auto node = [&](int i, int j, int k) { return Eigen::Vector3d(g.coord(0, i), g.coord(1, j), g.coord(2, k)); };

    for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j)
            for (int k = 0; k < g.cells[2]; ++k) {
                double v[8];
                int code = 0;
                for (int q = 0; q < 8; ++q) {
                    const auto& o = mc::corner_offset[static_cast<std::size_t>(q)];
                    v[q] = g.values[g.index(i + o[0], j + o[1], k + o[2])];
                    if (v[q] < c) code |= 1 << q;
                }
                if (code == 0 || code == 255) continue;

                static constexpr int faces[6][4] = {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4},
                                                    {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5}};
                bool ambiguous = false;
                for (const auto& f : faces) {
                    const bool b0 = (code >> f[0]) & 1, b1 = (code >> f[1]) & 1, b2 = (code >> f[2]) & 1,
                               b3 = (code >> f[3]) & 1;
                    if (b0 == b2 && b1 == b3 && b0 != b1) ambiguous = true;
                }
                int table_case = code;
                if (ambiguous) {
                    const std::vector<double> mid{0.5 * (g.coord(0, i) + g.coord(0, i + 1)),
                                                  0.5 * (g.coord(1, j) + g.coord(1, j + 1)),
                                                  0.5 * (g.coord(2, k) + g.coord(2, k + 1))};
                    if (evaluate(*map.components[0], mid) < c) table_case = 255 - code;
                }

                auto vertex_on = [&](int e) {
                    const auto& ec = mc::edge_corners[static_cast<std::size_t>(e)];
                    const auto& o0 = mc::corner_offset[static_cast<std::size_t>(ec[0])];
                    const auto& o1 = mc::corner_offset[static_cast<std::size_t>(ec[1])];
                    // canonical key: lower endpoint + axis
                    int a0[3] = {i + o0[0], j + o0[1], k + o0[2]};
                    int a1[3] = {i + o1[0], j + o1[1], k + o1[2]};
                    int axis = a0[0] != a1[0] ? 0 : (a0[1] != a1[1] ? 1 : 2);
                    const int* lo = a0[axis] < a1[axis] ? a0 : a1;
                    const std::uint64_t key =
                        ((static_cast<std::uint64_t>(axis) * ni + static_cast<std::uint64_t>(lo[0])) * nj +
                         static_cast<std::uint64_t>(lo[1])) * nk + static_cast<std::uint64_t>(lo[2]);
                    auto it = edge_vertex.find(key);
                    if (it != edge_vertex.end()) return it->second;
                    const auto p = lerp_point(node(a0[0], a0[1], a0[2]), node(a1[0], a1[1], a1[2]), v[ec[0]],
                                              v[ec[1]], c);
                    const int id = static_cast<int>(out.vertices.size());
                    out.vertices.push_back(p);
                    edge_vertex.emplace(key, id);
                    return id;
                };

                const int* tri = mc::triangle_table[table_case];
                for (int t = 0; tri[t] != -1; t += 3) {
                    std::array<int, 3> f{vertex_on(tri[t]), vertex_on(tri[t + 1]), vertex_on(tri[t + 2])};
                    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
                    out.triangles.push_back(f);
                }
            }

    out.normals.reserve(out.vertices.size());
    for (const auto& p : out.vertices) out.normals.push_back(unit_gradient(*map.components[0], p, 3));
    // wind every triangle so its face normal agrees with grad(phi)
    for (auto& t : out.triangles) {
        const auto& p0 = out.vertices[static_cast<std::size_t>(t[0])];
        const Eigen::Vector3d fn = (out.vertices[static_cast<std::size_t>(t[1])] - p0)
                                       .cross(out.vertices[static_cast<std::size_t>(t[2])] - p0);
        const Eigen::Vector3d avg = out.normals[static_cast<std::size_t>(t[0])] +
                                    out.normals[static_cast<std::size_t>(t[1])] +
                                    out.normals[static_cast<std::size_t>(t[2])];
        if (fn.dot(avg) < 0.0) std::swap(t[1], t[2]);
    }
    return out;
}

// ---- codimension-2 curves in E^3 -----------------------------------------

struct CurveTracer {
    const MapDefinition& map;
    const std::vector<ScalarGrid>& grids;
    Eigen::Vector2d level;
    double step;
    double cell;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets;  // cell -> vertex ids
    Polyline out;

    std::uint64_t bucket_key(const Eigen::Vector3d& p) const {
        std::uint64_t key = 0;
        for (std::size_t a = 0; a < 3; ++a) {
            auto c = static_cast<std::int64_t>(std::floor((p[static_cast<Eigen::Index>(a)] - map.domain.min[a]) / cell));
            key = key * 1000003ULL + static_cast<std::uint64_t>(c + 500000);
        }
        return key;
    }

    bool near_existing(const Eigen::Vector3d& p, double radius) const {
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = buckets.find(bucket_key(p + cell * Eigen::Vector3d(dx, dy, dz)));
                    if (it == buckets.end()) continue;
                    for (int id : it->second)
                        if ((out.vertices[static_cast<std::size_t>(id)] - p).norm() < radius) return true;
                }
        return false;
    }

    int add_vertex(const Eigen::Vector3d& p) {
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(p);
        buckets[bucket_key(p)].push_back(id);
        return id;
    }

    bool inside(const Eigen::Vector3d& p) const {
        return map.domain.contains(std::span<const double>(p.data(), 3));
    }

    Eigen::Matrix<double, 2, 3> jacobian(const Eigen::Vector3d& p, Eigen::Vector2d* residual) const {
        Eigen::Matrix<double, 2, 3> J;
        for (int r = 0; r < 2; ++r) {
            const Jet2 j = eval_jet(*map.components[static_cast<std::size_t>(r)], std::span<const double>(p.data(), 3));
            J.row(r) = j.gradient.transpose();
            if (residual) (*residual)[r] = j.value - level[r];
        }
        return J;
    }

    /// Least-norm Newton projection onto both level sets.
    bool correct(Eigen::Vector3d& p) const {
        for (int it = 0; it < 30; ++it) {
            Eigen::Vector2d r;
            const auto J = jacobian(p, &r);
            const Eigen::Matrix2d JJt = J * J.transpose();
            if (std::abs(JJt.determinant()) < 1e-300) return false;
            const Eigen::Vector3d dx = J.transpose() * JJt.ldlt().solve(r);
            p -= dx;
            if (!p.allFinite()) return false;
            if (dx.norm() <= 1e-13 * (1.0 + p.norm())) return true;
        }
        Eigen::Vector2d r;
        jacobian(p, &r);
        return r.norm() <= 1e-10;
    }

    Eigen::Vector3d tangent(const Eigen::Vector3d& p) const {
        const auto J = jacobian(p, nullptr);
        const Eigen::Vector3d a = J.row(0).transpose(), b = J.row(1).transpose();
        Eigen::Vector3d t = a.cross(b);
        const double len = t.norm();
        return len > 0.0 ? Eigen::Vector3d(t / len) : Eigen::Vector3d::Zero();
    }

    /// Walks from `start` along `dir`; returns the visited points (start excluded)
    /// and whether the walk closed back on `start`.
    std::vector<Eigen::Vector3d> walk(const Eigen::Vector3d& start, Eigen::Vector3d dir, std::size_t max_steps,
                                      bool& closed) const {
        std::vector<Eigen::Vector3d> pts;
        Eigen::Vector3d p = start;
        closed = false;
        for (std::size_t s = 0; s < max_steps; ++s) {
            Eigen::Vector3d t = tangent(p);
            if (t.isZero(0)) break;
            if (t.dot(dir) < 0.0) t = -t;
            Eigen::Vector3d q = p + step * t;
            if (!inside(q)) {
                // clip the last step to the box face it crosses
                double frac = 1.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    const auto ai = static_cast<Eigen::Index>(a);
                    if (q[ai] > map.domain.max[a]) frac = std::min(frac, (map.domain.max[a] - p[ai]) / (q[ai] - p[ai]));
                    if (q[ai] < map.domain.min[a]) frac = std::min(frac, (map.domain.min[a] - p[ai]) / (q[ai] - p[ai]));
                }
                if (frac > 1e-9) pts.push_back(p + frac * (q - p));
                break;
            }
            if (!correct(q) || !inside(q)) break;
            if (s >= 3 && (q - start).norm() < 0.75 * step) {
                closed = true;
                break;
            }
            pts.push_back(q);
            dir = q - p;
            p = q;
        }
        return pts;
    }

    void trace_from(Eigen::Vector3d seed, std::size_t max_steps) {
        if (!correct(seed) || !inside(seed)) return;
        if (near_existing(seed, cell)) return;
        const Eigen::Vector3d t0 = tangent(seed);
        if (t0.isZero(0)) return;
        bool closed_fwd = false, closed_bwd = false;
        const auto fwd = walk(seed, t0, max_steps, closed_fwd);
        std::vector<Eigen::Vector3d> bwd;
        if (!closed_fwd) bwd = walk(seed, -t0, max_steps, closed_bwd);

        std::vector<Eigen::Vector3d> chain(bwd.rbegin(), bwd.rend());
        chain.push_back(seed);
        chain.insert(chain.end(), fwd.begin(), fwd.end());
        if (chain.size() < 2) return;
        const int first = add_vertex(chain[0]);
        int prev = first;
        for (std::size_t k = 1; k < chain.size(); ++k) {
            const int id = add_vertex(chain[k]);
            out.segments.push_back({prev, id});
            prev = id;
        }
        if (closed_fwd && chain.size() >= 3) out.segments.push_back({prev, first});
    }
};

inline Polyline trace_curves(const MapDefinition& map, const std::vector<ScalarGrid>& grids, std::span<const double> c) {
    const ScalarGrid& g0 = grids[0];
    CurveTracer tracer{map, grids, Eigen::Vector2d(c[0], c[1]), 0.25 * g0.min_cell(), g0.min_cell(), {}, {}};
    tracer.out.dim = 3;
    std::size_t total_cells = 1;
    for (int n : g0.cells) total_cells *= static_cast<std::size_t>(n);
    const std::size_t max_steps = 8 * total_cells;

    for (int i = 0; i < g0.cells[0]; ++i)
        for (int j = 0; j < g0.cells[1]; ++j)
            for (int k = 0; k < g0.cells[2]; ++k) {
                bool change[2] = {false, false};
                for (int comp = 0; comp < 2; ++comp) {
                    bool above = false, below = false;
                    for (const auto& o : mc::corner_offset) {
                        const double v = grids[static_cast<std::size_t>(comp)].values[g0.index(i + o[0], j + o[1], k + o[2])];
                        (v >= c[static_cast<std::size_t>(comp)] ? above : below) = true;
                    }
                    change[comp] = above && below;
                }
                if (!change[0] || !change[1]) continue;
                const Eigen::Vector3d center(0.5 * (g0.coord(0, i) + g0.coord(0, i + 1)),
                                             0.5 * (g0.coord(1, j) + g0.coord(1, j + 1)),
                                             0.5 * (g0.coord(2, k) + g0.coord(2, k + 1)));
                tracer.trace_from(center, max_steps);
            }
    mark_closed(tracer.out);
    return tracer.out;
}

inline void require_supported(int n, int m) {
    const bool ok = (n == 2 && m == 1) || (n == 3 && m == 1) || (n == 3 && m == 2);
    if (!ok) throw UnsupportedSignature(n, m);
}

} // namespace detail

/// Extracts phi^-1(c) from pre-sampled grids (see sample_grid).
inline LevelSet extract_level_set(const MapDefinition& map, const std::vector<ScalarGrid>& grids,
                                  std::span<const double> c) {
    const int m = static_cast<int>(map.components.size());
    detail::require_supported(map.n, m);
    if (c.size() != static_cast<std::size_t>(m)) throw DimensionError("level needs one value per component");
    LevelSet ls;
    ls.level.assign(c.begin(), c.end());
    if (map.n == 2)
        ls.geometry = detail::marching_squares(map, grids[0], c[0]);
    else if (m == 1)
        ls.geometry = detail::marching_cubes(map, grids[0], c[0]);
    else
        ls.geometry = detail::trace_curves(map, grids, c);
    ls.empty = is_empty(ls.geometry);
    return ls;
}

/// Simplicial approximation of phi^-1(c) on a grid with `cells[a]` cells per axis.
inline LevelSet extract_level_set(const MapDefinition& map, std::span<const double> c, const std::vector<int>& cells) {
    detail::require_supported(map.n, static_cast<int>(map.components.size()));
    return extract_level_set(map, sample_grid(map, cells), c);
}

struct Foliation {
    std::vector<std::vector<double>> levels;
    std::vector<LevelSet> leaves;
    std::vector<std::string> warnings;
};

/// k levels per component spread uniformly over the observed range of each
/// component on the grid (cell-centred in the range), one leaf per level tuple
/// in lexicographic order. A non-regular map yields a warning, not an error.
inline Foliation sample_foliation(const MapDefinition& map, int k, const std::vector<int>& cells) {
    const int m = static_cast<int>(map.components.size());
    detail::require_supported(map.n, m);
    if (k < 1) throw DimensionError("level count must be >= 1");
    Foliation fol;

    const auto reg = regularity_check(map, Sampler{Sampler::Kind::Grid, 9, 0});
    if (!reg.regular)
        fol.warnings.push_back("map is not regular on the domain (" + std::to_string(reg.failures) +
                               " failing sample points)");

    const auto grids = sample_grid(map, cells);
    std::vector<std::vector<double>> per_component;
    for (const auto& g : grids) {
        const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
        std::vector<double> lv;
        for (int j = 0; j < k; ++j) lv.push_back(*lo + (j + 0.5) * (*hi - *lo) / k);
        per_component.push_back(std::move(lv));
    }
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    for (;;) {
        std::vector<double> c(static_cast<std::size_t>(m));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = per_component[i][static_cast<std::size_t>(idx[i])];
        fol.levels.push_back(c);
        fol.leaves.push_back(extract_level_set(map, grids, c));
        std::size_t a = c.size();
        while (a-- > 0) {
            if (++idx[a] < k) break;
            idx[a] = 0;
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
    return fol;
}

// ---- OBJ export ------------------------------------------------------------

namespace detail {

inline void append_vec(std::string& out, const char* tag, const Eigen::Vector3d& v) {
    out += tag;
    for (int a = 0; a < 3; ++a) {
        out += ' ';
        out += format_double(v[a] == 0.0 ? 0.0 : v[a]);
    }
    out += '\n';
}

} // namespace detail

/// Wavefront OBJ: v / vn / f records (1-based, f a//a b//b c//c).
inline std::string to_obj(const Mesh& mesh, const std::string& comment = {}) {
    std::string out;
    if (!comment.empty()) out += "# " + comment + "\n";
    for (const auto& v : mesh.vertices) detail::append_vec(out, "v", v);
    for (const auto& n : mesh.normals) detail::append_vec(out, "vn", n);
    for (const auto& t : mesh.triangles) {
        out += 'f';
        for (int a : t) out += ' ' + std::to_string(a + 1) + "//" + std::to_string(a + 1);
        out += '\n';
    }
    return out;
}

/// Wavefront OBJ with v and l records. 2-D vertices are written with z = 0.
inline std::string to_obj(const Polyline& line, const std::string& comment = {}) {
    std::string out;
    if (!comment.empty()) out += "# " + comment + "\n";
    for (const auto& v : line.vertices) detail::append_vec(out, "v", v);
    for (const auto& s : line.segments) out += "l " + std::to_string(s[0] + 1) + ' ' + std::to_string(s[1] + 1) + '\n';
    return out;
}

inline std::string to_obj(const LevelGeometry& g, const std::string& comment = {}) {
    return std::visit([&](const auto& x) { return to_obj(x, comment); }, g);
}

} // namespace minsurf
