#include "cryombir/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cryombir/fourier.hpp"

namespace cryombir {

void BaselineConfig::validate() const {
    if (!(gaussian_sigma > 0.0))
        throw DomainError("gaussian_sigma must be positive");
    if (cgls_iters < 1)
        throw DomainError("cgls_iters must be >= 1");
    if (!(cgls_tol >= 0.0))
        throw DomainError("cgls_tol must be >= 0");
}

ProjectionStack gaussian_lowpass(const ProjectionStack& stack, double sigma) {
    if (!(sigma > 0.0))
        throw DomainError("low-pass sigma must be positive");
    const int w = stack.width(), h = stack.height();
    std::vector<double> response(static_cast<std::size_t>(w) * h);
    for (int v = 0; v < h; ++v) {
        const double kv = signed_frequency(v, h);
        for (int u = 0; u < w; ++u) {
            const double ku = signed_frequency(u, w);
            response[static_cast<std::size_t>(u) + static_cast<std::size_t>(w) * v] =
                std::exp(-(ku * ku + kv * kv) / (2.0 * sigma * sigma));
        }
    }
    return apply_filter(stack, CtfFilter(w, h, std::move(response)));
}

ProjectionStack phase_flip_correct(const ProjectionStack& stack, const CtfFilter& filter) {
    return apply_filter(stack, phase_flip_filter(filter));
}

ProjectionStack phase_flip_correct(const ProjectionStack& stack, std::span<const CtfFilter> table) {
    std::vector<CtfFilter> flipped;
    flipped.reserve(table.size());
    for (const auto& f : table)
        flipped.push_back(phase_flip_filter(f));
    return apply_filter(stack, flipped);
}

CglsResult cgls_reconstruct(const ProjectionStack& stack, const GridSpec& grid, const BaselineConfig& cfg,
                            const ProjectorConfig& projector, const CglsObserver& observer) {
    cfg.validate();
    const auto& views = stack.views();

    CglsResult result;
    Volume x(grid);
    ProjectionStack r = stack;  // r = g - A x
    Volume s = back_project(r, grid, projector);
    Volume p = s;
    double gamma = dot(s.data(), s.data());
    const double gamma0 = gamma;
    result.residual_norms.push_back(norm2(r.data()));

    int k = 0;
    while (k < cfg.cgls_iters && gamma > 0.0 && std::sqrt(gamma / gamma0) >= cfg.cgls_tol) {
        const ProjectionStack q = forward_project(p, views, projector);
        const double qq = dot(q.data(), q.data());
        if (!(qq > 0.0))
            break;
        const double alpha = gamma / qq;
        axpy(alpha, p.data(), x.data());
        axpy(-alpha, q.data(), r.data());
        s = back_project(r, grid, projector);
        const double gamma_next = dot(s.data(), s.data());
        const double beta = gamma_next / gamma;
        auto pd = p.data();
        const auto sd = s.data();
        for (std::size_t i = 0; i < pd.size(); ++i)
            pd[i] = sd[i] + beta * pd[i];
        gamma = gamma_next;
        ++k;
        if (!std::isfinite(alpha) || !std::isfinite(gamma) || !x.all_finite())
            throw DivergenceError("CGLS produced a non-finite iterate", k);
        result.residual_norms.push_back(norm2(r.data()));
        if (observer)
            observer(k, x);
    }
    result.estimate = std::move(x);
    result.iterations = k;
    return result;
}

Volume pr_reconstruct(const ProjectionStack& stack, std::span<const CtfFilter> table, const GridSpec& grid,
                      const BaselineConfig& cfg, const ProjectorConfig& projector) {
    cfg.validate();
    const ProjectionStack corrected = phase_flip_correct(gaussian_lowpass(stack, cfg.gaussian_sigma), table);
    return cgls_reconstruct(corrected, grid, cfg, projector).estimate;
}

PrTuningResult tune_pr(const ProjectionStack& stack, std::span<const CtfFilter> table, const Volume& reference,
                       std::span<const double> sigmas, std::span<const int> iteration_counts,
                       const ProjectorConfig& projector) {
    if (sigmas.empty() || iteration_counts.empty())
        throw DomainError("tuning grid is empty");
    const int max_iters = *std::max_element(iteration_counts.begin(), iteration_counts.end());
    PrTuningResult result;
    result.best_nrmse = std::numeric_limits<double>::infinity();

    for (double sigma : sigmas) {
        BaselineConfig cfg{sigma, max_iters, 0.0};
        const ProjectionStack corrected = phase_flip_correct(gaussian_lowpass(stack, sigma), table);
        auto consider = [&](int iters, const Volume& x) {
            const double e = nrmse_percent(x, reference);
            result.entries.push_back(PrTuningEntry{sigma, iters, e});
            if (e < result.best_nrmse) {
                result.best_nrmse = e;
                result.best_estimate = x;
                result.best_config = BaselineConfig{sigma, iters, 0.0};
            }
        };
        int last_seen = 0;
        const CglsResult run = cgls_reconstruct(corrected, reference.grid(), cfg, projector, [&](int k, const Volume& x) {
            last_seen = k;
            if (std::find(iteration_counts.begin(), iteration_counts.end(), k) != iteration_counts.end())
                consider(k, x);
        });
        // CGLS can stop early on an exact fit; the remaining counts share the final iterate.
        for (int iters : iteration_counts)
            if (iters > last_seen)
                consider(iters, run.estimate);
    }
    return result;
}

} // namespace cryombir
