#include "cryombir/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cryombir {

namespace {

constexpr int kReductionChunks = 8;

struct Vec3 {
    double x, y, z;
};

// Per-view ray parameterisation in voxel index coordinates.
struct ViewRays {
    Vec3 origin;  // position of detector pixel (0, 0) at s = 0
    Vec3 du, dv;  // step per detector pixel
    Vec3 dir;     // step per unit s
};

ViewRays make_rays(const GridSpec& grid, int width, int height, const ViewGeometry& view) {
    const Mat3 r = rotation_matrix(view.euler);
    const Vec3 a{r[0][0], r[1][0], r[2][0]};
    const Vec3 b{r[0][1], r[1][1], r[2][1]};
    const Vec3 d{r[0][2], r[1][2], r[2][2]};
    const Vec3 c{0.5 * (grid.nx - 1), 0.5 * (grid.ny - 1), 0.5 * (grid.nz - 1)};
    const double u0 = -0.5 * (width - 1) - view.offset.tx;
    const double v0 = -0.5 * (height - 1) - view.offset.ty;
    return ViewRays{{c.x + u0 * a.x + v0 * b.x, c.y + u0 * a.y + v0 * b.y, c.z + u0 * a.z + v0 * b.z}, a, b, d};
}

// Clip [lo, hi] to the s-range where p + s*d stays inside (-1, n) on one axis.
inline bool clip_axis(double p, double d, int n, double& lo, double& hi) {
    constexpr double eps = 1e-12;
    if (std::abs(d) < eps)
        return p > -1.0 && p < static_cast<double>(n);
    double s0 = (-1.0 - p) / d;
    double s1 = (static_cast<double>(n) - p) / d;
    if (s0 > s1)
        std::swap(s0, s1);
    lo = std::max(lo, s0);
    hi = std::min(hi, s1);
    return lo <= hi;
}

// Enumerates the (voxel index, weight) pairs of one ray. Forward and back
// projection both go through here, which is what makes them exact transposes.
// Interior samples arrive as one 2x2x2 cell (corner weights in x-fastest
// order), samples touching the boundary as individual points.
template <class Visit>
inline void trace_ray(const GridSpec& grid, const ViewRays& rays, int u, int v, double step, Visit& visit) {
    const Vec3 p{rays.origin.x + u * rays.du.x + v * rays.dv.x, rays.origin.y + u * rays.du.y + v * rays.dv.y,
                 rays.origin.z + u * rays.du.z + v * rays.dv.z};
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (!clip_axis(p.x, rays.dir.x, grid.nx, lo, hi) || !clip_axis(p.y, rays.dir.y, grid.ny, lo, hi) ||
        !clip_axis(p.z, rays.dir.z, grid.nz, lo, hi))
        return;
    const long k0 = static_cast<long>(std::ceil(lo / step));
    const long k1 = static_cast<long>(std::floor(hi / step));
    const int nx = grid.nx, ny = grid.ny, nz = grid.nz;
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    for (long k = k0; k <= k1; ++k) {
        const double s = static_cast<double>(k) * step;
        const double x = p.x + s * rays.dir.x;
        const double y = p.y + s * rays.dir.y;
        const double z = p.z + s * rays.dir.z;
        // Clipping keeps every coordinate >= -1 up to rounding, so truncation
        // of (coordinate + 1) is a floor. A coordinate a rounding error below -1
        // only yields a vanishing negative weight on an in-grid corner.
        const int ix = static_cast<int>(x + 1.0) - 1;
        const int iy = static_cast<int>(y + 1.0) - 1;
        const int iz = static_cast<int>(z + 1.0) - 1;
        const double gx = x - ix, gy = y - iy, gz = z - iz;
        const double hx = 1.0 - gx, hy = 1.0 - gy, hz = 1.0 - gz;
        if (ix >= 0 && iy >= 0 && iz >= 0 && ix + 1 < nx && iy + 1 < ny && iz + 1 < nz) {
            const std::size_t i0 = static_cast<std::size_t>(ix) + sy * static_cast<std::size_t>(iy) +
                                   sz * static_cast<std::size_t>(iz);
            const double w[8] = {hx * hy * hz, gx * hy * hz, hx * gy * hz, gx * gy * hz,
                                 hx * hy * gz, gx * hy * gz, hx * gy * gz, gx * gy * gz};
            visit.cell(i0, sy, sz, w);
            continue;
        }
        const double wx[2] = {hx, gx};
        const double wy[2] = {hy, gy};
        const double wz[2] = {hz, gz};
        for (int c = 0; c < 2; ++c) {
            const int zc = iz + c;
            if (zc < 0 || zc >= nz)
                continue;
            for (int b = 0; b < 2; ++b) {
                const int yb = iy + b;
                if (yb < 0 || yb >= ny)
                    continue;
                for (int a = 0; a < 2; ++a) {
                    const int xa = ix + a;
                    if (xa < 0 || xa >= nx)
                        continue;
                    visit.point(static_cast<std::size_t>(xa) + sy * static_cast<std::size_t>(yb) +
                              sz * static_cast<std::size_t>(zc),
                          wx[a] * wy[b] * wz[c]);
                }
            }
        }
    }
}

struct Gather {
    const double* vol;
    double acc{0.0};

    void cell(std::size_t i0, std::size_t sy, std::size_t sz, const double (&w)[8]) {
        const double* a = vol + i0;
        const double* b = a + sz;
        acc += ((w[0] * a[0] + w[1] * a[1]) + (w[2] * a[sy] + w[3] * a[sy + 1])) +
               ((w[4] * b[0] + w[5] * b[1]) + (w[6] * b[sy] + w[7] * b[sy + 1]));
    }
    void point(std::size_t idx, double w) { acc += w * vol[idx]; }
};

struct Scatter {
    double* vol;
    double value;

    void cell(std::size_t i0, std::size_t sy, std::size_t sz, const double (&w)[8]) {
        double* a = vol + i0;
        double* b = a + sz;
        a[0] += w[0] * value;
        a[1] += w[1] * value;
        a[sy] += w[2] * value;
        a[sy + 1] += w[3] * value;
        b[0] += w[4] * value;
        b[1] += w[5] * value;
        b[sy] += w[6] * value;
        b[sy + 1] += w[7] * value;
    }
    void point(std::size_t idx, double w) { vol[idx] += w * value; }
};

void check_detector(const GridSpec& grid, int width, int height) {
    if (width != grid.nx || height != grid.ny)
        throw DimensionError("detector is " + std::to_string(width) + "x" + std::to_string(height) +
                             ", grid face is " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
}

} // namespace

void ProjectorConfig::validate() const {
    if (!(step_size > 0.0) || !std::isfinite(step_size))
        throw DomainError("projector step size must be positive");
}

Mat3 rotation_matrix(const EulerAngles& e) noexcept {
    const double c1 = std::cos(e.phi), s1 = std::sin(e.phi);
    const double c2 = std::cos(e.theta), s2 = std::sin(e.theta);
    const double c3 = std::cos(e.psi), s3 = std::sin(e.psi);
    // Rz(phi) * Ry(theta) * Rz(psi)
    return Mat3{{{c1 * c2 * c3 - s1 * s3, -c1 * c2 * s3 - s1 * c3, c1 * s2},
                 {s1 * c2 * c3 + c1 * s3, -s1 * c2 * s3 + c1 * c3, s1 * s2},
                 {-s2 * c3, s2 * s3, c2}}};
}

ProjectionStack forward_project(const Volume& f, std::span<const ViewGeometry> views, const ProjectorConfig& cfg) {
    cfg.validate();
    const GridSpec& grid = f.grid();
    const int width = grid.projected_width();
    const int height = grid.ny;
    ProjectionStack out(width, height, std::vector<ViewGeometry>(views.begin(), views.end()));
    const auto vol = f.data();
    auto det = out.data();
    const double scale = cfg.step_size * grid.voxel_size;
    const long n_views = static_cast<long>(views.size());

#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n_views; ++i) {
        const ViewRays rays = make_rays(grid, width, height, views[static_cast<std::size_t>(i)]);
        double* img = det.data() + static_cast<std::size_t>(i) * out.image_size();
        for (int v = 0; v < height; ++v) {
            for (int u = 0; u < width; ++u) {
                Gather gather{vol.data()};
                trace_ray(grid, rays, u, v, cfg.step_size, gather);
                img[u + width * v] = gather.acc * scale;
            }
        }
    }
    return out;
}

Volume back_project(const ProjectionStack& g, const GridSpec& grid, const ProjectorConfig& cfg) {
    cfg.validate();
    grid.validate();
    check_detector(grid, g.width(), g.height());
    const int width = g.width();
    const int height = g.height();
    const double scale = cfg.step_size * grid.voxel_size;
    const long n_views = static_cast<long>(g.n_views());

    int n_chunks = kReductionChunks;
    if (!cfg.deterministic) {
#ifdef _OPENMP
        n_chunks = omp_get_max_threads();
#else
        n_chunks = 1;
#endif
    }
    n_chunks = static_cast<int>(std::max<long>(1, std::min<long>(n_chunks, n_views)));

    // Chunk c owns the contiguous view range [c*n/k, (c+1)*n/k) and a private
    // accumulator; accumulators are then summed in chunk order.
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(n_chunks));
    const auto det = g.data();

#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < n_chunks; ++c) {
        auto& acc = partial[static_cast<std::size_t>(c)];
        acc.assign(grid.voxel_count(), 0.0);
        const long first = n_views * c / n_chunks;
        const long last = n_views * (c + 1) / n_chunks;
        for (long i = first; i < last; ++i) {
            const ViewRays rays = make_rays(grid, width, height, g.views()[static_cast<std::size_t>(i)]);
            const double* img = det.data() + static_cast<std::size_t>(i) * g.image_size();
            for (int v = 0; v < height; ++v) {
                for (int u = 0; u < width; ++u) {
                    const double val = img[u + width * v] * scale;
                    if (val == 0.0)
                        continue;
                    Scatter scatter{acc.data(), val};
                    trace_ray(grid, rays, u, v, cfg.step_size, scatter);
                }
            }
        }
    }

    Volume out(grid);
    auto dst = out.data();
    for (const auto& acc : partial)
        for (std::size_t j = 0; j < dst.size(); ++j)
            dst[j] += acc[j];
    return out;
}

} // namespace cryombir
