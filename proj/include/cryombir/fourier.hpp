#pragma once

#include <span>

namespace cryombir {

/// Signed DFT frequency of bin `index` on an axis of length `n`, in cycles
/// per pixel, in [-0.5, 0.5).
[[nodiscard]] double signed_frequency(int index, int n) noexcept;

/// In-place circular filtering of one width x height image by a real,
/// even frequency response given on the full DFT grid (row-major, v slow).
/// Only the non-redundant half of the response is read.
void fourier_multiply(std::span<double> image, int width, int height, std::span<const double> response);

} // namespace cryombir
