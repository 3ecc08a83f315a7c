#include "cryombir/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace cryombir {

namespace {

constexpr double kSupportFraction = 0.35;

struct Ball {
    double cx, cy, cz;
    double radius;
    double density;
};

// Random point inside a ball of the given radius.
std::array<double, 3> point_in_ball(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    while (true) {
        const double x = unit(rng), y = unit(rng), z = unit(rng);
        if (x * x + y * y + z * z <= 1.0)
            return {x * radius, y * radius, z * radius};
    }
}

} // namespace

PhantomKind parse_phantom_kind(std::string_view name) {
    if (name == "spheres")
        return PhantomKind::spheres;
    if (name == "shells")
        return PhantomKind::shells;
    if (name == "blobs")
        return PhantomKind::blobs;
    throw ValidationError("unknown phantom kind '" + std::string(name) + "' (spheres, shells, blobs)");
}

std::string to_string(PhantomKind kind) {
    switch (kind) {
    case PhantomKind::spheres: return "spheres";
    case PhantomKind::shells: return "shells";
    case PhantomKind::blobs: return "blobs";
    }
    return "unknown";
}

GroundTruth make_phantom(const GridSpec& grid, PhantomKind kind, std::uint64_t seed) {
    grid.validate();
    const int n = std::min({grid.nx, grid.ny, grid.nz});
    const double support = kSupportFraction * n;
    const double cx = 0.5 * (grid.nx - 1), cy = 0.5 * (grid.ny - 1), cz = 0.5 * (grid.nz - 1);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Ball> balls;
    std::vector<double> shell_radii;
    std::vector<double> shell_widths;
    switch (kind) {
    case PhantomKind::spheres: {
        // An envelope plus several denser inclusions.
        balls.push_back({0.0, 0.0, 0.0, 0.9 * support, 0.3});
        for (int i = 0; i < 7; ++i) {
            const double r = (0.12 + 0.18 * unit(rng)) * support;
            const auto c = point_in_ball(rng, 0.9 * support - r);
            balls.push_back({c[0], c[1], c[2], r, 0.3 + 0.7 * unit(rng)});
        }
        break;
    }
    case PhantomKind::shells: {
        for (int i = 0; i < 3; ++i) {
            shell_radii.push_back((0.3 + 0.2 * i + 0.08 * unit(rng)) * support);
            shell_widths.push_back((0.06 + 0.04 * unit(rng)) * support);
        }
        for (int i = 0; i < 3; ++i) {
            const double r = (0.08 + 0.08 * unit(rng)) * support;
            const auto c = point_in_ball(rng, 0.25 * support);
            balls.push_back({c[0], c[1], c[2], r, 0.5 + 0.5 * unit(rng)});
        }
        break;
    }
    case PhantomKind::blobs: {
        for (int i = 0; i < 10; ++i) {
            const double r = (0.08 + 0.15 * unit(rng)) * support;
            const auto c = point_in_ball(rng, support - 2.5 * r);
            balls.push_back({c[0], c[1], c[2], r, 0.3 + 0.7 * unit(rng)});
        }
        break;
    }
    }

    Volume v(grid);
    for (int z = 0; z < grid.nz; ++z) {
        for (int y = 0; y < grid.ny; ++y) {
            for (int x = 0; x < grid.nx; ++x) {
                const double dx = x - cx, dy = y - cy, dz = z - cz;
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r > support)
                    continue;
                double value = 0.0;
                for (const auto& b : balls) {
                    const double ex = dx - b.cx, ey = dy - b.cy, ez = dz - b.cz;
                    const double d2 = ex * ex + ey * ey + ez * ez;
                    if (kind == PhantomKind::blobs)
                        value += b.density * std::exp(-0.5 * d2 / (b.radius * b.radius));
                    else if (d2 <= b.radius * b.radius)
                        value += b.density;
                }
                for (std::size_t s = 0; s < shell_radii.size(); ++s)
                    if (std::abs(r - shell_radii[s]) <= 0.5 * shell_widths[s])
                        value += 0.4 + 0.2 * static_cast<double>(s);
                v.at(x, y, z) = value;
            }
        }
    }

    const double peak = v.max();
    if (!(peak > 0.0))
        throw DomainError("phantom grid too small to hold any support");
    for (double& x : v.data())
        x /= peak;
    GroundTruth truth{std::move(v), 0.0};
    truth.max_density = truth.volume.max();
    return truth;
}

} // namespace cryombir
