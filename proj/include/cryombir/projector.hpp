#pragma once

#include <array>
#include <span>

#include "cryombir/core.hpp"

namespace cryombir {

struct ProjectorConfig {
    /// Ray sampling interval in voxels.
    double step_size{1.0};
    /// Reduce back-projection partial sums in a fixed order, independent of
    /// the thread count, so results are bitwise reproducible.
    bool deterministic{true};

    void validate() const;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// R = Rz(phi) * Ry(theta) * Rz(psi) (intrinsic ZYZ).
[[nodiscard]] Mat3 rotation_matrix(const EulerAngles& euler) noexcept;

/// Parallel-beam projection of `f` for every view. Detector images are
/// p_w x p_w with p_w = nx; detector pixels have the voxel's size.
///
/// The ray for pixel (u, v) of a view with rotation R and offset (tx, ty) is
///     c + (u - cu - tx) * R e_x + (v - cv - ty) * R e_y + s * R e_z
/// where c is the volume center and (cu, cv) the detector center. Samples sit
/// at s = k * step_size and read f by trilinear interpolation (zero outside
/// the grid); the pixel value is the sample sum times step_size * voxel_size.
/// A positive offset therefore moves the particle image toward +u / +v.
[[nodiscard]] ProjectionStack forward_project(const Volume& f, std::span<const ViewGeometry> views,
                                              const ProjectorConfig& cfg = {});

/// Exact transpose of forward_project: identical samples and weights,
/// scattered into the volume instead of gathered from it.
[[nodiscard]] Volume back_project(const ProjectionStack& g, const GridSpec& grid, const ProjectorConfig& cfg = {});

} // namespace cryombir
