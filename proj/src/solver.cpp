#include "cryombir/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <random>
#include <string>

namespace cryombir {

void SolverConfig::validate() const {
    if (max_iters < 1)
        throw DomainError("max_iters must be >= 1");
    if (!(rel_cost_tol >= 0.0))
        throw DomainError("rel_cost_tol must be >= 0");
    if (lipschitz_power_iters < 1)
        throw DomainError("lipschitz_power_iters must be >= 1");
    if (!(lipschitz_safety >= 1.0))
        throw DomainError("lipschitz_safety must be >= 1");
    if (record_cost_every < 1)
        throw DomainError("record_cost_every must be >= 1");
    if (lipschitz && !(*lipschitz > 0.0 && std::isfinite(*lipschitz)))
        throw DomainError("a supplied Lipschitz constant must be positive and finite");
}

void MbirProblem::validate() const {
    grid.validate();
    prior.validate();
    projector.validate();
    if (measurements.width() != grid.nx || measurements.height() != grid.ny)
        throw DimensionError("measurement images do not match the grid face");
    if (weights.size() != measurements.data().size())
        throw DimensionError("weights have " + std::to_string(weights.size()) + " entries, measurements have " +
                             std::to_string(measurements.data().size()));
    if (ctf_table.empty())
        throw ValidationError("CTF table is empty");
}

ProjectionStack forward_model(const MbirProblem& problem, const Volume& f) {
    ProjectionStack hf = forward_project(f, problem.measurements.views(), problem.projector);
    apply_filter_in_place(hf, problem.ctf_table);
    return hf;
}

namespace {

// r = g - H A f
ProjectionStack residual(const MbirProblem& problem, const Volume& f) {
    ProjectionStack r = forward_model(problem, f);
    auto rd = r.data();
    const auto g = problem.measurements.data();
    for (std::size_t i = 0; i < rd.size(); ++i)
        rd[i] = g[i] - rd[i];
    return r;
}

// A^T H^T W r, negated
Volume data_gradient(const MbirProblem& problem, ProjectionStack r) {
    auto rd = r.data();
    const auto w = problem.weights.data();
    for (std::size_t i = 0; i < rd.size(); ++i)
        rd[i] *= -w[i];
    apply_filter_in_place(r, problem.ctf_table);
    return back_project(r, problem.grid, problem.projector);
}

} // namespace

CostTerms cost_terms(const MbirProblem& problem, const Volume& f) {
    problem.validate();
    const ProjectionStack r = residual(problem, f);
    return CostTerms{0.5 * weighted_residual_norm_sq(r.data(), problem.weights), prior_cost(f, problem.prior)};
}

double total_cost(const MbirProblem& problem, const Volume& f) { return cost_terms(problem, f).total(); }

CostAndGradient cost_and_gradient(const MbirProblem& problem, const Volume& f) {
    problem.validate();
    if (!(f.grid() == problem.grid))
        throw DimensionError("iterate grid differs from the problem grid");
    ProjectionStack r = residual(problem, f);
    CostTerms cost{0.5 * weighted_residual_norm_sq(r.data(), problem.weights), prior_cost(f, problem.prior)};
    Volume grad = data_gradient(problem, std::move(r));
    const Volume prior_grad = prior_gradient(f, problem.prior);
    axpy(1.0, prior_grad.data(), grad.data());
    return CostAndGradient{cost, std::move(grad)};
}

Volume total_gradient(const MbirProblem& problem, const Volume& f) { return cost_and_gradient(problem, f).gradient; }

LipschitzEstimate estimate_lipschitz(const MbirProblem& problem, const SolverConfig& cfg) {
    problem.validate();
    cfg.validate();
    std::mt19937_64 rng(cfg.lipschitz_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Volume v(problem.grid);
    for (double& x : v.data())
        x = normal(rng);
    double nv = norm2(v.data());
    for (double& x : v.data())
        x /= nv;

    const auto w = problem.weights.data();
    double lambda = 0.0;
    for (int it = 0; it < cfg.lipschitz_power_iters; ++it) {
        ProjectionStack hv = forward_model(problem, v);
        auto d = hv.data();
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] *= w[i];
        apply_filter_in_place(hv, problem.ctf_table);
        v = back_project(hv, problem.grid, problem.projector);
        lambda = norm2(v.data());
        if (lambda == 0.0)
            break;
        for (double& x : v.data())
            x /= lambda;
    }

    LipschitzEstimate est;
    est.data_term = lambda;
    est.prior_term = prior_lipschitz_bound(problem.prior);
    est.total = cfg.lipschitz_safety * (est.data_term + est.prior_term);
    return est;
}

double ogm_next_t(double t) noexcept { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

OgmResult ogm_minimize(const MbirProblem& problem, const Volume& f0, const SolverConfig& cfg) {
    cfg.validate();
    problem.validate();
    if (!(f0.grid() == problem.grid))
        throw DimensionError("initial volume grid differs from the problem grid");
    if (!f0.all_finite())
        throw DomainError("initial volume must be finite");

    OgmResult result;
    result.lipschitz = cfg.lipschitz ? *cfg.lipschitz : estimate_lipschitz(problem, cfg).total;
    if (!(result.lipschitz > 0.0))
        throw DomainError("Lipschitz constant must be positive");

    constexpr int kPlateauWindow = 5;
    constexpr int kIncreaseLimit = 10;

    Volume f = f0;
    Volume h_prev = f0;
    double t = 1.0;
    double previous_cost = 0.0;
    double previous_recorded = 0.0;
    bool have_recorded = false;
    int increases = 0;
    int plateau = 0;
    result.best_cost = std::numeric_limits<double>::infinity();

    auto observe = [&](int k, const CostTerms& cost, const Volume& iterate) -> bool {
        const double c = cost.total();
        if (!std::isfinite(c))
            throw DivergenceError("non-finite MBIR cost", k);
        if (c < result.best_cost) {
            result.best_cost = c;
            result.best_iteration = k;
            result.estimate = iterate;
        }
        const bool last = k == cfg.max_iters;
        if (k % cfg.record_cost_every != 0 && !last)
            return false;
        result.history.push_back(CostRecord{k, c, cost.data, cost.prior});
        bool stop = false;
        if (have_recorded && cfg.rel_cost_tol > 0.0) {
            const double rel = std::abs(c - previous_recorded) / std::max(std::abs(previous_recorded), 1e-300);
            plateau = rel < cfg.rel_cost_tol ? plateau + 1 : 0;
            stop = plateau >= kPlateauWindow;
        }
        previous_recorded = c;
        have_recorded = true;
        return stop;
    };

    int k = 0;
    for (; k < cfg.max_iters; ++k) {
        CostAndGradient cg = cost_and_gradient(problem, f);
        const double c = cg.cost.total();
        if (observe(k, cg.cost, f))
            break;

        if (k > 0 && c > previous_cost) {
            if (++increases >= kIncreaseLimit) {
                result.lipschitz *= 2.0;
                ++result.step_halvings;
                t = 1.0;
                h_prev = f;
                increases = 0;
            }
        } else {
            increases = 0;
        }
        previous_cost = c;

        // h = f - grad / L
        Volume h = f;
        axpy(-1.0 / result.lipschitz, cg.gradient.data(), h.data());
        const double t_next = ogm_next_t(t);
        const double a = (t - 1.0) / t_next;
        const double b = t / t_next;
        auto fd = f.data();
        const auto hd = h.data();
        const auto hp = h_prev.data();
        for (std::size_t i = 0; i < fd.size(); ++i)
            fd[i] = hd[i] + a * (hd[i] - hp[i]) + b * (hd[i] - fd[i]);
        h_prev = std::move(h);
        t = t_next;
    }
    if (k == cfg.max_iters)
        observe(k, cost_terms(problem, f), f);
    result.iterations = k;
    return result;
}

void write_cost_history_csv(std::ostream& os, std::span<const CostRecord> history) {
    os << "iteration,cost,data_term,prior_term\n";
    os << std::setprecision(17);
    for (const auto& r : history)
        os << r.iteration << ',' << r.cost << ',' << r.data_term << ',' << r.prior_term << '\n';
}

} // namespace cryombir
