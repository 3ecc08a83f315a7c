#include "cryombir/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cryombir/projector.hpp"

namespace cryombir {

namespace {

// Independent generator streams derived from one user seed.
enum class Stream : std::uint32_t { geometry = 1, noise = 2, subsample = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

} // namespace

SimulationSpec SimulationSpec::for_grid(const GridSpec& grid) {
    SimulationSpec spec;
    spec.grid = grid;
    spec.n_views = 2 * grid.projected_width();
    return spec;
}

void SimulationSpec::validate() const {
    grid.validate();
    ctf.validate();
    if (n_views < 1)
        throw DomainError("n_views must be >= 1");
    if (!(offset_fraction >= 0.0) || !std::isfinite(offset_fraction))
        throw DomainError("offset_fraction must be >= 0");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
        throw DomainError("subsample_fraction must lie in (0, 1]");
    if (std::isnan(psnr_db) || psnr_db == -std::numeric_limits<double>::infinity())
        throw DomainError("psnr_db must be a number or +infinity");
}

std::vector<ViewGeometry> sample_geometry(const SimulationSpec& spec) {
    spec.validate();
    auto rng = make_stream(spec.seed, Stream::geometry);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double max_offset = spec.offset_fraction * spec.grid.projected_width();
    std::uniform_real_distribution<double> offset(0.0, max_offset);
    std::vector<ViewGeometry> views(static_cast<std::size_t>(spec.n_views));
    for (auto& v : views) {
        v.euler.phi = angle(rng);
        v.euler.theta = angle(rng);
        v.euler.psi = angle(rng);
        if (max_offset > 0.0) {
            v.offset.tx = offset(rng);
            v.offset.ty = offset(rng);
        }
        v.ctf_index = 0;
    }
    return views;
}

double sigma_from_psnr(double peak, double psnr_db) {
    if (!(peak > 0.0))
        throw DomainError("peak must be positive");
    if (psnr_db == std::numeric_limits<double>::infinity())
        return 0.0;
    return peak / std::pow(10.0, psnr_db / 20.0);
}

std::vector<std::size_t> subsample_indices(std::size_t n_views, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw DomainError("subsample fraction must lie in (0, 1]");
    std::vector<std::size_t> order(n_views);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (fraction == 1.0)
        return order;
    auto rng = make_stream(seed, Stream::subsample);
    // Fisher-Yates with our own index draw; std::shuffle's algorithm is unspecified.
    for (std::size_t i = n_views; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_views)));
    order.resize(std::max<std::size_t>(1, keep));
    std::sort(order.begin(), order.end());
    return order;
}

SimulatedData synthesize(const SimulationSpec& spec, const GroundTruth& truth) {
    spec.validate();
    if (!(truth.volume.grid() == spec.grid))
        throw DimensionError("ground truth grid differs from the simulation grid");

    SimulatedData out;
    const int width = spec.grid.projected_width();
    const int height = spec.grid.ny;
    out.ctf_params = {spec.ctf};
    out.ctf_table = {spec.apply_ctf ? build_filter(width, height, spec.ctf) : CtfFilter::identity(width, height)};

    const auto views = sample_geometry(spec);
    ProjectionStack clean = forward_project(truth.volume, views);
    apply_filter_in_place(clean, out.ctf_table);

    double peak = 0.0;
    for (double x : clean.data())
        peak = std::max(peak, std::abs(x));
    out.peak = peak;
    out.sigma = peak > 0.0 ? sigma_from_psnr(peak, spec.psnr_db) : 0.0;

    ProjectionStack noisy = clean;
    if (out.sigma > 0.0) {
        auto rng = make_stream(spec.seed, Stream::noise);
        std::normal_distribution<double> normal(0.0, out.sigma);
        for (double& x : noisy.data())
            x += normal(rng);
    }

    out.retained_views = subsample_indices(views.size(), spec.subsample_fraction, spec.seed);
    out.stack = noisy.select(out.retained_views);
    out.clean = clean.select(out.retained_views);
    const double w = out.sigma > 0.0 ? 1.0 / (out.sigma * out.sigma) : 1.0;
    out.weights = DiagonalWeights::uniform(out.stack.data().size(), w);
    return out;
}

} // namespace cryombir
