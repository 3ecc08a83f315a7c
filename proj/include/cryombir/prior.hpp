#pragma once

#include <array>
#include <vector>

#include "cryombir/core.hpp"

namespace cryombir {

enum class Neighborhood { k26, k6 };

/// qGGMRF potential parameters: shape p in [1, 2], transition constant c and
/// scale sigma_f.
struct QggmrfParams {
    double p{1.2};
    double c{1.0};
    double sigma_f{1.0};
    Neighborhood neighborhood{Neighborhood::k26};

    void validate() const;
};

/// Neighbor offsets with weights proportional to 1/distance, normalized so the
/// weights of one voxel's full neighborhood sum to 1. Offsets come in +/- pairs;
/// the first half holds the lexicographically positive ones.
struct NeighborStencil {
    std::vector<std::array<int, 3>> offsets;
    std::vector<double> weights;

    static NeighborStencil make(Neighborhood kind);
    [[nodiscard]] std::size_t half() const noexcept { return offsets.size() / 2; }
};

/// u^2 / (c + u^(2-p)) with u = |delta| / sigma_f.
[[nodiscard]] double rho(double delta, const QggmrfParams& params);

/// d rho / d delta.
[[nodiscard]] double rho_prime(double delta, const QggmrfParams& params);

/// Sum over unordered neighbor pairs {j, k} of w_jk * rho(f_j - f_k). Voxels on
/// the grid boundary simply have fewer pairs; weights are not renormalized.
[[nodiscard]] double prior_cost(const Volume& f, const QggmrfParams& params);

/// Component j: sum over neighbors k of w_jk * rho_prime(f_j - f_k).
[[nodiscard]] Volume prior_gradient(const Volume& f, const QggmrfParams& params);

/// Upper bound on the Lipschitz constant of prior_gradient:
/// 2 * max rho'' = 2 * 2 / (c sigma_f^2), using per-voxel weight sums <= 1.
[[nodiscard]] double prior_lipschitz_bound(const QggmrfParams& params);

} // namespace cryombir
