#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cryombir/projector.hpp"

using namespace cryombir;

namespace {

std::vector<ViewGeometry> random_views(std::mt19937_64& rng, int n, double max_offset) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> off(-max_offset, max_offset);
    std::vector<ViewGeometry> views(static_cast<std::size_t>(n));
    for (auto& v : views) {
        v.euler = {angle(rng), angle(rng), angle(rng)};
        v.offset = {off(rng), off(rng)};
    }
    return views;
}

Volume random_volume(std::mt19937_64& rng, const GridSpec& g) {
    std::normal_distribution<double> normal;
    Volume v(g);
    for (auto& x : v.data())
        x = normal(rng);
    return v;
}

// Smooth bump well inside the grid, for mass and shift checks.
Volume interior_blob(const GridSpec& g, double cx, double cy, double cz, double width) {
    Volume v(g);
    for (int z = 0; z < g.nz; ++z)
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz);
                v.at(x, y, z) = std::exp(-0.5 * d2 / (width * width));
            }
    return v;
}

double sum(std::span<const double> s) {
    double t = 0.0;
    for (double x : s)
        t += x;
    return t;
}

} // namespace

TEST_CASE("rotation matrix convention") {
    const Mat3 id = rotation_matrix({0, 0, 0});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(id[i][j] == doctest::Approx(i == j ? 1.0 : 0.0));

    // phi = pi/2 maps x to y
    const Mat3 r = rotation_matrix({std::numbers::pi / 2, 0, 0});
    CHECK(r[0][0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r[1][0] == doctest::Approx(1.0));
    CHECK(r[2][0] == doctest::Approx(0.0));
    CHECK(r[0][1] == doctest::Approx(-1.0));

    const Mat3 q = rotation_matrix({0.3, 1.1, -0.7});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double rtr = 0.0;
            for (int k = 0; k < 3; ++k)
                rtr += q[k][i] * q[k][j];
            CHECK(std::abs(rtr - (i == j ? 1.0 : 0.0)) < 1e-12);
        }
    const double det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
                       q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
                       q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
    CHECK(std::abs(det - 1.0) < 1e-12);
}

TEST_CASE("zero volume projects to zero and zero stack back-projects to zero") {
    const GridSpec g = GridSpec::cube(8);
    std::mt19937_64 rng(1);
    const auto views = random_views(rng, 3, 1.0);
    const ProjectionStack p = forward_project(Volume(g), views);
    for (double x : p.data())
        CHECK(x == 0.0);
    const Volume b = back_project(p, g);
    for (double x : b.data())
        CHECK(x == 0.0);
}

TEST_CASE("single voxel at identity orientation") {
    const GridSpec g{8, 8, 8, 1.5};
    Volume v(g);
    v.at(4, 4, 4) = 1.0;
    const std::vector<ViewGeometry> views(1);
    const ProjectionStack p = forward_project(v, views);
    CHECK(std::abs(sum(p.data()) - g.voxel_size) < 1e-6);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            if (std::abs(x - 4) > 1 || std::abs(y - 4) > 1)
                CHECK(p.image(0)[x + 8 * y] == 0.0);
}

TEST_CASE("back-projection of one central pixel fills one column") {
    const GridSpec g = GridSpec::cube(8);
    ProjectionStack s(8, 8, std::vector<ViewGeometry>(1));
    s.image(0)[4 + 8 * 4] = 1.0;
    const Volume b = back_project(s, g);
    double column = 0.0;
    for (int z = 0; z < 8; ++z)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                if (x != 4 || y != 4)
                    CHECK(b.at(x, y, z) == 0.0);
                else
                    column += b.at(x, y, z);
            }
    CHECK(column == doctest::Approx(8.0));
}

TEST_CASE("adjoint dot-product identity") {
    const GridSpec g = GridSpec::cube(16);
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const auto views = random_views(rng, 8, 2.0);
        const Volume f = random_volume(rng, g);
        ProjectionStack y(16, 16, views);
        std::normal_distribution<double> normal;
        for (auto& x : y.data())
            x = normal(rng);
        const double lhs = dot(forward_project(f, views).data(), y.data());
        const double rhs = dot(f.data(), back_project(y, g).data());
        CHECK(std::abs(lhs - rhs) <= 1e-6 * (std::abs(lhs) + std::abs(rhs)));
    }
}

TEST_CASE("adjoint holds for a non-unit step and voxel size") {
    const GridSpec g{10, 10, 10, 0.7};
    ProjectorConfig cfg;
    cfg.step_size = 0.37;
    std::mt19937_64 rng(8);
    const auto views = random_views(rng, 4, 1.5);
    const Volume f = random_volume(rng, g);
    ProjectionStack y(10, 10, views);
    std::normal_distribution<double> normal;
    for (auto& x : y.data())
        x = normal(rng);
    const double lhs = dot(forward_project(f, views, cfg).data(), y.data());
    const double rhs = dot(f.data(), back_project(y, g, cfg).data());
    CHECK(std::abs(lhs - rhs) <= 1e-6 * (std::abs(lhs) + std::abs(rhs)));
}

TEST_CASE("forward projection is linear") {
    const GridSpec g = GridSpec::cube(10);
    std::mt19937_64 rng(4);
    const auto views = random_views(rng, 3, 1.0);
    const Volume f1 = random_volume(rng, g), f2 = random_volume(rng, g);
    const double alpha = -1.7;
    Volume combo = f2;
    axpy(alpha, f1.data(), combo.data());
    const ProjectionStack lhs = forward_project(combo, views);
    ProjectionStack rhs = forward_project(f2, views);
    axpy(alpha, forward_project(f1, views).data(), rhs.data());
    const double scale = norm2(rhs.data());
    for (std::size_t i = 0; i < lhs.data().size(); ++i)
        CHECK(std::abs(lhs.data()[i] - rhs.data()[i]) <= 1e-10 * scale);
}

TEST_CASE("projected mass is conserved and orientation independent") {
    const GridSpec g = GridSpec::cube(24);
    const Volume f = interior_blob(g, 11.0, 12.5, 11.8, 2.5);
    const double mass = sum(f.data());
    std::mt19937_64 rng(77);
    const auto views = random_views(rng, 12, 1.5);
    const ProjectionStack p = forward_project(f, views);
    for (std::size_t i = 0; i < views.size(); ++i)
        CHECK(std::abs(sum(p.image(i)) - mass) <= 0.01 * mass);
}

namespace {

void check_integer_shift(const Volume& f, std::vector<ViewGeometry> views, int tx, int ty, double tol) {
    const int n = f.grid().nx;
    for (auto& v : views)
        v.offset = {0.0, 0.0};
    const ProjectionStack base = forward_project(f, views);
    for (auto& v : views)
        v.offset = {static_cast<double>(tx), static_cast<double>(ty)};
    const ProjectionStack shifted = forward_project(f, views);
    for (std::size_t i = 0; i < views.size(); ++i)
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n; ++u) {
                const int su = u - tx, sv = v - ty;
                const double expected = (su >= 0 && su < n && sv >= 0 && sv < n) ? base.image(i)[su + n * sv] : 0.0;
                CHECK(std::abs(shifted.image(i)[u + n * v] - expected) <= tol);
            }
}

} // namespace

TEST_CASE("integer offsets translate the projection") {
    const GridSpec g = GridSpec::cube(20);
    const Volume f = interior_blob(g, 9.5, 9.0, 10.2, 2.0);
    // Axis-aligned rays move by whole voxels, so the shift is exact.
    check_integer_shift(f, std::vector<ViewGeometry>(1), 2, -1, 1e-12);
    std::vector<ViewGeometry> quarter(1);
    quarter[0].euler = {std::numbers::pi / 2, std::numbers::pi / 2, 0.0};
    check_integer_shift(f, quarter, -3, 2, 1e-12);
    // Rotated rays resample the blob; the shift holds up to interpolation error.
    std::mt19937_64 rng(13);
    const double peak = forward_project(f, std::vector<ViewGeometry>(1)).image(0)[10 + 20 * 9];
    check_integer_shift(f, random_views(rng, 4, 0.0), 2, -1, 1e-4 * peak);
}

TEST_CASE("fractional offsets move the image centroid by the offset") {
    const GridSpec g = GridSpec::cube(24);
    const Volume f = interior_blob(g, 11.5, 11.5, 11.5, 2.5);
    std::vector<ViewGeometry> views(1);
    views[0].euler = {0.4, 1.2, 2.0};
    const ProjectionStack base = forward_project(f, views);
    views[0].offset = {0.6, 1.3};
    const ProjectionStack moved = forward_project(f, views);
    auto centroid = [](std::span<const double> img) {
        double m = 0, cx = 0, cy = 0;
        for (int v = 0; v < 24; ++v)
            for (int u = 0; u < 24; ++u) {
                m += img[u + 24 * v];
                cx += u * img[u + 24 * v];
                cy += v * img[u + 24 * v];
            }
        return std::pair{cx / m, cy / m};
    };
    const auto [bx, by] = centroid(base.image(0));
    const auto [mx, my] = centroid(moved.image(0));
    CHECK(mx - bx == doctest::Approx(0.6).epsilon(0.02));
    CHECK(my - by == doctest::Approx(1.3).epsilon(0.02));
}

TEST_CASE("deterministic back-projection is bitwise reproducible") {
    const GridSpec g = GridSpec::cube(12);
    std::mt19937_64 rng(21);
    const auto views = random_views(rng, 11, 1.0);
    ProjectionStack y(12, 12, views);
    std::normal_distribution<double> normal;
    for (auto& x : y.data())
        x = normal(rng);
    const Volume a = back_project(y, g);
    const Volume b = back_project(y, g);
    CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST_CASE("shape and config errors") {
    ProjectionStack wrong(8, 8, std::vector<ViewGeometry>(1));
    CHECK_THROWS_AS((void)back_project(wrong, GridSpec::cube(9)), DimensionError);
    ProjectorConfig bad;
    bad.step_size = 0.0;
    CHECK_THROWS_AS((void)forward_project(Volume(GridSpec::cube(4)), std::vector<ViewGeometry>(1), bad), DomainError);
}
