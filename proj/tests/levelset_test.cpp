#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "minsurf/levelset.hpp"
#include "test_support.hpp"

using namespace minsurf;

namespace {

constexpr double pi = std::numbers::pi;

MapDefinition circle_map() { return make_map("circle", 2, {"x1^2 + x2^2"}, Box{{-1.5, -1.5}, {1.5, 1.5}}); }

MapDefinition sphere_map() {
    return make_map("sphere", 3, {"x1^2 + x2^2 + x3^2 - 1"}, Box{{-1.5, -1.5, -1.5}, {1.5, 1.5, 1.5}});
}

double circle_length(int g) {
    const double c[] = {1.0};
    return extract_level_set(circle_map(), c, {g, g}).measure();
}

double max_vertex_residual(const MapDefinition& map, const LevelSet& ls) {
    double worst = 0.0;
    for (const auto& v : vertices_of(ls.geometry)) {
        const double r = evaluate(*map.components[0], std::span<const double>(v.data(), static_cast<std::size_t>(map.n)));
        worst = std::max(worst, std::abs(r - ls.level[0]));
    }
    return worst;
}

} // namespace

TEST(LevelSet, CircleLength) {
    const double c[] = {1.0};
    const auto ls = extract_level_set(circle_map(), c, {256, 256});
    const auto& line = std::get<Polyline>(ls.geometry);
    EXPECT_TRUE(line.closed);
    EXPECT_EQ(line.dim, 2);
    EXPECT_NEAR(polyline_length(line), 2 * pi, 0.005 * 2 * pi);
    for (const auto& v : line.vertices) EXPECT_NEAR(v.norm(), 1.0, 1e-3);
    // normals point outward (toward increasing phi)
    for (std::size_t k = 0; k < line.vertices.size(); ++k) EXPECT_GT(line.normals[k].dot(line.vertices[k]), 0.99);
}

TEST(LevelSet, PlaneArea) {
    auto map = make_map("plane", 3, {"x3"}, Box{{-1, -1, -1}, {1, 1, 1}});
    const double c[] = {0.0};
    const auto ls = extract_level_set(map, c, {32, 32, 32});
    const auto& mesh = std::get<Mesh>(ls.geometry);
    for (const auto& v : mesh.vertices) EXPECT_NEAR(v.z(), 0.0, 1e-15);
    EXPECT_NEAR(mesh_area(mesh), 4.0, 1e-9);
}

TEST(LevelSet, SphereArea) {
    const double c[] = {0.0};
    const auto ls = extract_level_set(sphere_map(), c, {64, 64, 64});
    const auto& mesh = std::get<Mesh>(ls.geometry);
    EXPECT_NEAR(mesh_area(mesh), 4 * pi, 0.02 * 4 * pi);
    for (const auto& t : mesh.triangles)
        for (int i : t) {
            ASSERT_GE(i, 0);
            ASSERT_LT(static_cast<std::size_t>(i), mesh.vertices.size());
        }
    // outward winding everywhere
    for (const auto& t : mesh.triangles) {
        const auto& a = mesh.vertices[static_cast<std::size_t>(t[0])];
        const auto& b = mesh.vertices[static_cast<std::size_t>(t[1])];
        const auto& d = mesh.vertices[static_cast<std::size_t>(t[2])];
        EXPECT_GT((b - a).cross(d - a).dot(a + b + d), 0.0);
    }
}

TEST(LevelSet, SphereMeshIsWatertight) {
    const double c[] = {0.0};
    const auto mesh = std::get<Mesh>(extract_level_set(sphere_map(), c, {24, 24, 24}).geometry);
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[static_cast<std::size_t>(e)], b = t[static_cast<std::size_t>((e + 1) % 3)];
            ++edges[{std::min(a, b), std::max(a, b)}];
        }
    for (const auto& [e, count] : edges) EXPECT_EQ(count, 2);
}

TEST(LevelSet, CircleRefinementHalvesError) {
    double prev = std::abs(circle_length(32) - 2 * pi);
    for (int g : {64, 128, 256}) {
        const double err = std::abs(circle_length(g) - 2 * pi);
        EXPECT_LE(err, 0.5 * prev) << "grid " << g;
        prev = err;
    }
}

TEST(LevelSet, VertexResidualDecreasesWithRefinement) {
    for (const auto& map : support::corpus_maps()) {
        if (map.components.size() != 1) continue;
        const auto grids = sample_grid(map, std::vector<int>(static_cast<std::size_t>(map.n), 8));
        const auto [lo, hi] = std::minmax_element(grids[0].values.begin(), grids[0].values.end());
        const double c[] = {0.5 * (*lo + *hi) + 0.0123 * (*hi - *lo)};
        double prev = std::numeric_limits<double>::infinity();
        for (int g : {8, 16, 32}) {
            const auto ls = extract_level_set(map, c, std::vector<int>(static_cast<std::size_t>(map.n), g));
            ASSERT_FALSE(ls.empty) << map.name;
            const double r = max_vertex_residual(map, ls);
            EXPECT_LE(r, prev + 1e-14) << map.name << " grid " << g;
            prev = r;
        }
    }
}

TEST(LevelSet, Deterministic) {
    const double c[] = {0.0};
    const auto a = extract_level_set(sphere_map(), c, {20, 20, 20});
    const auto b = extract_level_set(sphere_map(), c, {20, 20, 20});
    EXPECT_EQ(to_obj(a.geometry), to_obj(b.geometry));
    const auto& ma = std::get<Mesh>(a.geometry);
    const auto& mb = std::get<Mesh>(b.geometry);
    ASSERT_EQ(ma.vertices.size(), mb.vertices.size());
    for (std::size_t k = 0; k < ma.vertices.size(); ++k) EXPECT_EQ(ma.vertices[k], mb.vertices[k]);
    EXPECT_EQ(ma.triangles, mb.triangles);
}

TEST(LevelSet, EmptyOutsideRange) {
    const double c[] = {10.0};
    const auto ls = extract_level_set(circle_map(), c, {16, 16});
    EXPECT_TRUE(ls.empty);
    EXPECT_EQ(ls.measure(), 0.0);
}

TEST(LevelSet, UnsupportedSignature) {
    auto map4 = make_map("n4", 4, {"x1 + x4"}, Box{{-1, -1, -1, -1}, {1, 1, 1, 1}});
    const double c[] = {0.0};
    EXPECT_THROW(extract_level_set(map4, c, {8, 8, 8, 8}), minsurf::UnsupportedSignature);
    EXPECT_THROW(sample_foliation(map4, 2, {8, 8, 8, 8}), minsurf::UnsupportedSignature);
}

TEST(LevelSet, EvaluationErrorPropagates) {
    auto map = make_map("log", 2, {"log(x1)"}, Box{{-1, -1}, {1, 1}});
    const double c[] = {0.0};
    EXPECT_THROW(extract_level_set(map, c, {8, 8}), minsurf::EvaluationError);
}

TEST(LevelSet, SaddleCellsUseCenterSample) {
    // x1*x2 = 0.01: every saddle cell on the diagonal picks the branch from its centre
    auto map = make_map("saddle", 2, {"x1*x2"}, Box{{-1, -1}, {1, 1}});
    const double c[] = {0.01};
    const auto line = std::get<Polyline>(extract_level_set(map, c, {9, 9}).geometry);
    for (const auto& s : line.segments) {
        const auto& a = line.vertices[static_cast<std::size_t>(s[0])];
        const auto& b = line.vertices[static_cast<std::size_t>(s[1])];
        // both branches stay in one quadrant pair; no segment crosses between hyperbola branches
        EXPECT_GT(a.x() * b.x(), -1e-12);
    }
}

TEST(Measure, UnitTriangleAndSquare) {
    Mesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.triangles = {{0, 1, 2}};
    EXPECT_DOUBLE_EQ(mesh_area(tri), 0.5);

    Polyline sq;
    sq.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    sq.segments = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    EXPECT_DOUBLE_EQ(polyline_length(sq), 4.0);
    EXPECT_EQ(mesh_area(Mesh{}), 0.0);
}

TEST(Foliation, ParallelPlanes) {
    auto map = make_map("linear", 3, {"0.48*x1 + 0.6*x2 + 0.64*x3"}, Box{{-1, -1, -1}, {1, 1, 1}});
    const auto fol = sample_foliation(map, 5, {16, 16, 16});
    ASSERT_EQ(fol.levels.size(), 5u);
    ASSERT_EQ(fol.leaves.size(), 5u);
    EXPECT_TRUE(fol.warnings.empty());
    const Eigen::Vector3d a(0.48, 0.6, 0.64);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto& mesh = std::get<Mesh>(fol.leaves[k].geometry);
        ASSERT_FALSE(mesh.empty());
        for (const auto& v : mesh.vertices) EXPECT_NEAR(a.dot(v), fol.levels[k][0], 1e-12);
        for (const auto& nrm : mesh.normals) EXPECT_NEAR(nrm.dot(a), 1.0, 1e-12);
        if (k > 0) {
            EXPECT_GT(fol.levels[k][0], fol.levels[k - 1][0]);
        }
    }
}

TEST(Foliation, ConcentricCircles) {
    const auto fol = sample_foliation(circle_map(), 4, {128, 128});
    ASSERT_EQ(fol.leaves.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& line = std::get<Polyline>(fol.leaves[k].geometry);
        const double r = std::sqrt(fol.levels[k][0]);
        for (const auto& v : line.vertices) EXPECT_NEAR(v.norm(), r, 2e-3);
        if (r < 1.5) {
            EXPECT_TRUE(line.closed);
            EXPECT_NEAR(polyline_length(line), 2 * pi * r, 0.01 * 2 * pi * r);
        }
    }
}

TEST(Foliation, HelicoidLeavesDisjoint) {
    const auto map = support::corpus_map("helicoid");
    const auto fol = sample_foliation(map, 8, {16, 16, 48});
    ASSERT_EQ(fol.leaves.size(), 8u);
    EXPECT_TRUE(fol.warnings.empty());
    for (std::size_t a = 0; a < 8; ++a) {
        ASSERT_FALSE(fol.leaves[a].empty);
        for (std::size_t b = a + 1; b < 8; ++b) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& p : vertices_of(fol.leaves[a].geometry))
                for (const auto& q : vertices_of(fol.leaves[b].geometry)) nearest = std::min(nearest, (p - q).norm());
            EXPECT_GT(nearest, 0.0) << a << "," << b;
        }
    }
}

TEST(Foliation, NonRegularMapWarns) {
    auto map = make_map("paraboloid", 2, {"x1^2 + x2^2"}, Box{{-1, -1}, {1, 1}});
    const auto fol = sample_foliation(map, 3, {16, 16});
    EXPECT_FALSE(fol.warnings.empty());
    EXPECT_EQ(fol.leaves.size(), 3u);
}

TEST(Curves, VerticalLines) {
    const auto map = support::corpus_map("vertical_lines");
    const double c[] = {0.1, -0.2};
    const auto ls = extract_level_set(map, c, {16, 16, 16});
    const auto& line = std::get<Polyline>(ls.geometry);
    EXPECT_EQ(line.dim, 3);
    EXPECT_FALSE(line.closed);
    EXPECT_NEAR(polyline_length(line), 2.0, 1e-9);
    for (const auto& v : line.vertices) {
        EXPECT_NEAR(v.x(), 0.1, 1e-12);
        EXPECT_NEAR(v.y(), -0.2, 1e-12);
    }
}

TEST(Curves, SphereMeetsPlane) {
    auto map = make_map("ring", 3, {"x1^2 + x2^2 + x3^2", "x3"}, Box{{-1.5, -1.5, -1.5}, {1.5, 1.5, 1.5}});
    const double c[] = {1.0, 0.0};
    const auto line = std::get<Polyline>(extract_level_set(map, c, {16, 16, 16}).geometry);
    EXPECT_TRUE(line.closed);
    EXPECT_NEAR(polyline_length(line), 2 * pi, 0.01 * 2 * pi);
    for (const auto& v : line.vertices) {
        EXPECT_NEAR(v.norm(), 1.0, 1e-10);
        EXPECT_NEAR(v.z(), 0.0, 1e-10);
    }
}

TEST(Curves, FoliationOfVerticalLines) {
    const auto map = support::corpus_map("vertical_lines");
    const auto fol = sample_foliation(map, 3, {16, 16, 16});
    ASSERT_EQ(fol.leaves.size(), 9u);
    for (const auto& leaf : fol.leaves) EXPECT_NEAR(leaf.measure(), 2.0, 1e-9);
}

TEST(Obj, MeshRecords) {
    Mesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.normals = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
    tri.triangles = {{0, 1, 2}};
    EXPECT_EQ(to_obj(tri), "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvn 0 0 1\nvn 0 0 1\nf 1//1 2//2 3//3\n");
}

TEST(Obj, PolylineRecords) {
    Polyline line;
    line.vertices = {{0.1, 0, 0}, {1, 0.25, 0}};
    line.segments = {{0, 1}};
    EXPECT_EQ(to_obj(line, "leaf"), "# leaf\nv 0.1 0 0\nv 1 0.25 0\nl 1 2\n");
}
