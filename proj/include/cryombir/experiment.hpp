#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cryombir/baseline.hpp"
#include "cryombir/phantom.hpp"
#include "cryombir/simulation.hpp"
#include "cryombir/solver.hpp"

namespace cryombir {

/// Comparison of MBIR against the tuned P+R baseline over noise levels and
/// view subsets of one phantom.
struct TableExperimentConfig {
    std::string dataset{"spheres"};
    GridSpec grid{GridSpec::cube(32)};
    PhantomKind phantom{PhantomKind::spheres};
    std::uint64_t phantom_seed{7};
    std::uint64_t seed{11};
    int n_views{64};
    std::vector<double> psnr_levels{6.02, 0.0};
    std::vector<double> subsample_fractions{1.0, 0.5, 0.25};
    CtfParams ctf{};
    QggmrfParams prior{1.2, 1.0, 0.1};
    SolverConfig solver{};
    ProjectorConfig projector{};
    std::vector<double> pr_sigmas{std::begin(kPrSigmaGrid), std::end(kPrSigmaGrid)};
    std::vector<int> pr_iterations{std::begin(kPrIterationGrid), std::end(kPrIterationGrid)};
};

struct TableCell {
    double psnr_db{0.0};
    double subsample{1.0};
    std::size_t n_views{0};
    double pr_nrmse{0.0};
    double mbir_nrmse{0.0};
    BaselineConfig pr_best{};
    double pr_seconds{0.0};
    double mbir_seconds{0.0};
};

/// Runs every (psnr, subsample) cell. Subsets at one noise level are nested
/// and share one noise realization.
[[nodiscard]] std::vector<TableCell> run_table_experiment(const TableExperimentConfig& cfg,
                                                          const std::function<void(const TableCell&)>& progress = {});

} // namespace cryombir
