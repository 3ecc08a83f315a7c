#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cryombir/core.hpp"

namespace cryombir {

enum class PhantomKind { spheres, shells, blobs };

[[nodiscard]] PhantomKind parse_phantom_kind(std::string_view name);
[[nodiscard]] std::string to_string(PhantomKind kind);

struct GroundTruth {
    Volume volume;
    double max_density{0.0};
};

/// Synthetic nonnegative density normalized to max 1. Support lies inside a
/// centered ball of radius 0.35 * nx, so every face keeps a zero margin of at
/// least 10% of the side and rotated, offset projections never leave the detector.
[[nodiscard]] GroundTruth make_phantom(const GridSpec& grid, PhantomKind kind, std::uint64_t seed);

} // namespace cryombir
