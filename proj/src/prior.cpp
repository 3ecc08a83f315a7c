#include "cryombir/prior.hpp"

#include <cmath>

namespace cryombir {

void QggmrfParams::validate() const {
    if (!(p >= 1.0 && p <= 2.0))
        throw DomainError("qGGMRF shape p must lie in [1, 2]");
    if (!(c > 0.0) || !std::isfinite(c))
        throw DomainError("qGGMRF constant c must be positive");
    if (!(sigma_f > 0.0) || !std::isfinite(sigma_f))
        throw DomainError("qGGMRF scale sigma_f must be positive");
}

NeighborStencil NeighborStencil::make(Neighborhood kind) {
    NeighborStencil s;
    std::vector<std::array<int, 3>> positive;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0 || (kind == Neighborhood::k6 && manhattan != 1))
                    continue;
                // positive half: first nonzero component of (dz, dy, dx) is +1
                const bool is_positive = dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0)));
                if (is_positive)
                    positive.push_back({dx, dy, dz});
            }
    for (const auto& o : positive)
        s.offsets.push_back(o);
    for (const auto& o : positive)
        s.offsets.push_back({-o[0], -o[1], -o[2]});

    double total = 0.0;
    for (const auto& o : s.offsets) {
        const double w = 1.0 / std::sqrt(static_cast<double>(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]));
        s.weights.push_back(w);
        total += w;
    }
    for (double& w : s.weights)
        w /= total;
    return s;
}

double rho(double delta, const QggmrfParams& params) {
    const double u = std::abs(delta) / params.sigma_f;
    if (u == 0.0)
        return 0.0;
    return u * u / (params.c + std::pow(u, 2.0 - params.p));
}

double rho_prime(double delta, const QggmrfParams& params) {
    const double u = std::abs(delta) / params.sigma_f;
    if (u == 0.0)
        return 0.0;
    const double uq = std::pow(u, 2.0 - params.p);
    const double denom = params.c + uq;
    const double mag = (u / params.sigma_f) * (2.0 * params.c + params.p * uq) / (denom * denom);
    return delta > 0.0 ? mag : -mag;
}

double prior_cost(const Volume& f, const QggmrfParams& params) {
    params.validate();
    const NeighborStencil stencil = NeighborStencil::make(params.neighborhood);
    const GridSpec& g = f.grid();
    const auto data = f.data();
    const std::size_t n_half = stencil.half();
    // Per-slice partial sums, added in slice order, keep the result independent
    // of the thread count.
    std::vector<double> slice_sums(static_cast<std::size_t>(g.nz), 0.0);
#pragma omp parallel for schedule(static)
    for (int z = 0; z < g.nz; ++z) {
        double acc = 0.0;
        for (int y = 0; y < g.ny; ++y) {
            for (int x = 0; x < g.nx; ++x) {
                const double fj = data[g.index(x, y, z)];
                for (std::size_t n = 0; n < n_half; ++n) {
                    const auto& o = stencil.offsets[n];
                    const int xk = x + o[0], yk = y + o[1], zk = z + o[2];
                    if (xk < 0 || yk < 0 || zk < 0 || xk >= g.nx || yk >= g.ny || zk >= g.nz)
                        continue;
                    acc += stencil.weights[n] * rho(fj - data[g.index(xk, yk, zk)], params);
                }
            }
        }
        slice_sums[static_cast<std::size_t>(z)] = acc;
    }
    double total = 0.0;
    for (double s : slice_sums)
        total += s;
    return total;
}

Volume prior_gradient(const Volume& f, const QggmrfParams& params) {
    params.validate();
    const NeighborStencil stencil = NeighborStencil::make(params.neighborhood);
    const GridSpec& g = f.grid();
    const auto data = f.data();
    Volume out(g);
    auto grad = out.data();
#pragma omp parallel for schedule(static)
    for (int z = 0; z < g.nz; ++z) {
        for (int y = 0; y < g.ny; ++y) {
            for (int x = 0; x < g.nx; ++x) {
                const double fj = data[g.index(x, y, z)];
                double acc = 0.0;
                for (std::size_t n = 0; n < stencil.offsets.size(); ++n) {
                    const auto& o = stencil.offsets[n];
                    const int xk = x + o[0], yk = y + o[1], zk = z + o[2];
                    if (xk < 0 || yk < 0 || zk < 0 || xk >= g.nx || yk >= g.ny || zk >= g.nz)
                        continue;
                    acc += stencil.weights[n] * rho_prime(fj - data[g.index(xk, yk, zk)], params);
                }
                grad[g.index(x, y, z)] = acc;
            }
        }
    }
    return out;
}

double prior_lipschitz_bound(const QggmrfParams& params) {
    params.validate();
    return 2.0 * 2.0 / (params.c * params.sigma_f * params.sigma_f);
}

} // namespace cryombir
