#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "cryombir/core.hpp"
#include "cryombir/ctf.hpp"
#include "cryombir/prior.hpp"
#include "cryombir/projector.hpp"

namespace cryombir {

struct SolverConfig {
    int max_iters{200};
    /// Early exit once 5 consecutive recorded costs each change by less than
    /// this fraction. Zero disables the plateau test.
    double rel_cost_tol{1e-7};
    int lipschitz_power_iters{20};
    double lipschitz_safety{1.05};
    int record_cost_every{1};
    std::uint64_t lipschitz_seed{0x5eed};
    /// Use this Lipschitz constant instead of estimating one.
    std::optional<double> lipschitz{};

    void validate() const;
};

/// Everything that defines the MBIR cost
///     c(f) = 1/2 ||g - H A f||_W^2 + s(f).
/// The measurement stack carries the view geometry; H applies ctf_table[view.ctf_index]
/// to each view.
struct MbirProblem {
    const ProjectionStack& measurements;
    const DiagonalWeights& weights;
    std::span<const CtfFilter> ctf_table;
    GridSpec grid;
    QggmrfParams prior;
    ProjectorConfig projector{};

    void validate() const;
};

struct CostTerms {
    double data{0.0};
    double prior{0.0};
    [[nodiscard]] double total() const noexcept { return data + prior; }
};

struct CostAndGradient {
    CostTerms cost;
    Volume gradient;
};

/// H A f for every view of the problem.
[[nodiscard]] ProjectionStack forward_model(const MbirProblem& problem, const Volume& f);

[[nodiscard]] CostTerms cost_terms(const MbirProblem& problem, const Volume& f);
[[nodiscard]] double total_cost(const MbirProblem& problem, const Volume& f);

/// -A^T H^T W (g - H A f) + grad s(f). H is real and even in frequency, hence
/// self-adjoint, so H^T is a second application of H.
[[nodiscard]] Volume total_gradient(const MbirProblem& problem, const Volume& f);

/// Cost and gradient sharing one forward projection.
[[nodiscard]] CostAndGradient cost_and_gradient(const MbirProblem& problem, const Volume& f);

struct LipschitzEstimate {
    double data_term{0.0};  // power-iteration estimate of lambda_max(A^T H W H A)
    double prior_term{0.0}; // analytic curvature bound of the prior
    double total{0.0};      // safety * (data_term + prior_term)
};

[[nodiscard]] LipschitzEstimate estimate_lipschitz(const MbirProblem& problem, const SolverConfig& cfg);

/// Momentum recurrence t' = (1 + sqrt(1 + 4 t^2)) / 2.
[[nodiscard]] double ogm_next_t(double t) noexcept;

struct CostRecord {
    int iteration{0};
    double cost{0.0};
    double data_term{0.0};
    double prior_term{0.0};
};

struct OgmResult {
    Volume estimate;                 // lowest-cost iterate visited
    std::vector<CostRecord> history; // every record_cost_every iterations, plus the last
    int iterations{0};
    int best_iteration{0};
    double best_cost{0.0};
    double lipschitz{0.0}; // final value, after any step halvings
    int step_halvings{0};
};

/// Optimized gradient method:
///     h_{k+1} = f_k - grad c(f_k) / L
///     t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
///     f_{k+1} = h_{k+1} + (t_k - 1)/t_{k+1} (h_{k+1} - h_k) + t_k/t_{k+1} (h_{k+1} - f_k)
/// with t_0 = 1 and h_0 = f_0. If the cost rises for 10 consecutive iterations,
/// L doubles and the momentum restarts. Throws DivergenceError on a non-finite cost.
[[nodiscard]] OgmResult ogm_minimize(const MbirProblem& problem, const Volume& f0, const SolverConfig& cfg);

/// CSV with header `iteration,cost,data_term,prior_term`.
void write_cost_history_csv(std::ostream& os, std::span<const CostRecord> history);

} // namespace cryombir
