#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cryombir/core.hpp"
#include "cryombir/ctf.hpp"
#include "cryombir/projector.hpp"

namespace cryombir {

/// Pre-process-and-reconstruct comparator settings.
struct BaselineConfig {
    double gaussian_sigma{0.1}; // low-pass width, cycles/pixel
    int cgls_iters{50};
    double cgls_tol{1e-6};      // stop when ||A^T r|| / ||A^T g|| drops below this

    void validate() const;
};

/// Multiplies every image spectrum by exp(-(ku^2 + kv^2) / (2 sigma^2)).
[[nodiscard]] ProjectionStack gaussian_lowpass(const ProjectionStack& stack, double sigma);

/// Phase-flip CTF correction: filtering with sign(H).
[[nodiscard]] ProjectionStack phase_flip_correct(const ProjectionStack& stack, const CtfFilter& filter);
[[nodiscard]] ProjectionStack phase_flip_correct(const ProjectionStack& stack, std::span<const CtfFilter> table);

struct CglsResult {
    Volume estimate;
    std::vector<double> residual_norms; // ||A f_k - g||, k = 0..iterations
    int iterations{0};
};

/// Called after each iteration with (iteration count, current iterate).
using CglsObserver = std::function<void(int, const Volume&)>;

/// Conjugate gradients on A^T A f = A^T g from f = 0 (CGLS form). The view
/// geometry comes from the stack. Throws DivergenceError on NaN iterates.
[[nodiscard]] CglsResult cgls_reconstruct(const ProjectionStack& stack, const GridSpec& grid, const BaselineConfig& cfg,
                                          const ProjectorConfig& projector = {}, const CglsObserver& observer = {});

/// gaussian_lowpass -> phase_flip_correct -> cgls_reconstruct.
[[nodiscard]] Volume pr_reconstruct(const ProjectionStack& stack, std::span<const CtfFilter> table, const GridSpec& grid,
                                    const BaselineConfig& cfg, const ProjectorConfig& projector = {});

struct PrTuningEntry {
    double gaussian_sigma{0.0};
    int cgls_iters{0};
    double nrmse_percent{0.0};
};

struct PrTuningResult {
    Volume best_estimate;
    BaselineConfig best_config;
    double best_nrmse{0.0};
    std::vector<PrTuningEntry> entries;
};

/// Grid search of the baseline against a known reference, keeping the lowest
/// NRMSE. One CGLS run per sigma serves every iteration count in the grid.
[[nodiscard]] PrTuningResult tune_pr(const ProjectionStack& stack, std::span<const CtfFilter> table,
                                     const Volume& reference, std::span<const double> sigmas,
                                     std::span<const int> iteration_counts, const ProjectorConfig& projector = {});

/// Default tuning grids.
inline constexpr double kPrSigmaGrid[] = {0.05, 0.1, 0.15, 0.2, 0.25};
inline constexpr int kPrIterationGrid[] = {10, 20, 50, 100};

} // namespace cryombir
