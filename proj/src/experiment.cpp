#include "cryombir/experiment.hpp"

#include <chrono>

namespace cryombir {

std::vector<TableCell> run_table_experiment(const TableExperimentConfig& cfg,
                                            const std::function<void(const TableCell&)>& progress) {
    using clock = std::chrono::steady_clock;
    const GroundTruth truth = make_phantom(cfg.grid, cfg.phantom, cfg.phantom_seed);
    std::vector<TableCell> cells;
    for (double psnr : cfg.psnr_levels) {
        for (double fraction : cfg.subsample_fractions) {
            SimulationSpec spec = SimulationSpec::for_grid(cfg.grid);
            spec.n_views = cfg.n_views;
            spec.psnr_db = psnr;
            spec.seed = cfg.seed;
            spec.ctf = cfg.ctf;
            spec.subsample_fraction = fraction;
            const SimulatedData data = synthesize(spec, truth);

            TableCell cell;
            cell.psnr_db = psnr;
            cell.subsample = fraction;
            cell.n_views = data.stack.n_views();

            auto t0 = clock::now();
            const PrTuningResult pr =
                tune_pr(data.stack, data.ctf_table, truth.volume, cfg.pr_sigmas, cfg.pr_iterations, cfg.projector);
            auto t1 = clock::now();
            cell.pr_nrmse = pr.best_nrmse;
            cell.pr_best = pr.best_config;
            cell.pr_seconds = std::chrono::duration<double>(t1 - t0).count();

            const MbirProblem problem{data.stack, data.weights, data.ctf_table, cfg.grid, cfg.prior, cfg.projector};
            const OgmResult mbir = ogm_minimize(problem, Volume(cfg.grid), cfg.solver);
            auto t2 = clock::now();
            cell.mbir_nrmse = nrmse_percent(mbir.estimate, truth.volume);
            cell.mbir_seconds = std::chrono::duration<double>(t2 - t1).count();

            cells.push_back(cell);
            if (progress)
                progress(cell);
        }
    }
    return cells;
}

} // namespace cryombir
