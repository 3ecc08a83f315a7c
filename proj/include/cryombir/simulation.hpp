#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cryombir/core.hpp"
#include "cryombir/ctf.hpp"
#include "cryombir/phantom.hpp"

namespace cryombir {

/// Measurement simulation protocol. Euler angles are uniform on [0, 2 pi);
/// offsets are uniform on [0, offset_fraction * p_w] per axis.
struct SimulationSpec {
    GridSpec grid{};
    int n_views{0};
    /// Target PSNR; +infinity disables noise.
    double psnr_db{6.02};
    double offset_fraction{0.05};
    std::uint64_t seed{1};
    CtfParams ctf{};
    /// When false H is the identity.
    bool apply_ctf{true};
    double subsample_fraction{1.0};

    /// Protocol defaults for a grid: n_views = 2 * p_w.
    static SimulationSpec for_grid(const GridSpec& grid);
    void validate() const;
};

inline constexpr double kNoiseDisabled = std::numeric_limits<double>::infinity();

[[nodiscard]] std::vector<ViewGeometry> sample_geometry(const SimulationSpec& spec);

/// sigma = peak / 10^(psnr / 20); zero when psnr is +infinity.
[[nodiscard]] double sigma_from_psnr(double peak, double psnr_db);

/// Sorted indices of the views kept at `fraction`: the first round(fraction * n)
/// entries of a seeded permutation, so smaller fractions give subsets of larger ones.
[[nodiscard]] std::vector<std::size_t> subsample_indices(std::size_t n_views, double fraction, std::uint64_t seed);

struct SimulatedData {
    ProjectionStack stack;       // noisy measurements g
    ProjectionStack clean;       // H A f without noise, same views
    DiagonalWeights weights;     // 1 / sigma^2 everywhere (1 when noise is off)
    std::vector<CtfFilter> ctf_table;
    std::vector<CtfParams> ctf_params;
    std::vector<std::size_t> retained_views; // indices into the full view list
    double peak{0.0};
    double sigma{0.0};
};

/// clean = H A f over the full view list, peak = max |clean|, white Gaussian
/// noise at sigma_from_psnr(peak, psnr), then the seeded view subset. Noise is
/// drawn for all views before subsetting so nested subsets share it.
[[nodiscard]] SimulatedData synthesize(const SimulationSpec& spec, const GroundTruth& truth);

} // namespace cryombir
