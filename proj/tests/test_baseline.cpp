#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cryombir/baseline.hpp"
#include "cryombir/fourier.hpp"

using namespace cryombir;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ViewGeometry> random_views(std::mt19937_64& rng, int n, double max_offset) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> off(-max_offset, max_offset);
    std::vector<ViewGeometry> views(static_cast<std::size_t>(n));
    for (auto& v : views) {
        v.euler = {angle(rng), std::acos(1.0 - 2.0 * std::uniform_real_distribution<double>()(rng)), angle(rng)};
        v.offset = {off(rng), off(rng)};
    }
    return views;
}

ProjectionStack random_stack(std::mt19937_64& rng, int w, int n) {
    ProjectionStack s(w, w, std::vector<ViewGeometry>(static_cast<std::size_t>(n)));
    std::normal_distribution<double> normal;
    for (auto& x : s.data())
        x = normal(rng);
    return s;
}

// Naive 2D DFT of one image.
std::vector<std::complex<double>> dft(std::span<const double> img, int w, int h) {
    std::vector<std::complex<double>> out(static_cast<std::size_t>(w * h));
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            std::complex<double> acc{};
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    acc += img[x + w * y] * std::polar(1.0, -2.0 * kPi * (double(u * x) / w + double(v * y) / h));
            out[u + w * v] = acc;
        }
    return out;
}

} // namespace

TEST_CASE("gaussian low-pass") {
    ProjectionStack flat(8, 8, std::vector<ViewGeometry>(1), std::vector<double>(64, 3.5));
    const ProjectionStack kept = gaussian_lowpass(flat, 0.1);
    for (double x : kept.data())
        CHECK(std::abs(x - 3.5) < 1e-12);

    std::mt19937_64 rng(1);
    const ProjectionStack noise = random_stack(rng, 16, 4);
    const ProjectionStack wide = gaussian_lowpass(noise, 1e6);
    for (std::size_t i = 0; i < noise.data().size(); ++i)
        CHECK(std::abs(wide.data()[i] - noise.data()[i]) < 1e-9);
    const ProjectionStack narrow = gaussian_lowpass(noise, 0.1);
    CHECK(norm2(narrow.data()) < norm2(noise.data()));

    const auto in = dft(noise.image(0), 16, 16);
    const auto out = dft(narrow.image(0), 16, 16);
    for (int v = 0; v < 16; ++v)
        for (int u = 0; u < 16; ++u) {
            const double ku = signed_frequency(u, 16), kv = signed_frequency(v, 16);
            const double gain = std::exp(-(ku * ku + kv * kv) / (2 * 0.01));
            CHECK(std::abs(out[u + 16 * v] - gain * in[u + 16 * v]) < 1e-9);
        }
    CHECK_THROWS_AS((void)gaussian_lowpass(noise, 0.0), DomainError);
}

TEST_CASE("phase flip yields the magnitude response") {
    std::mt19937_64 rng(2);
    const ProjectionStack clean = random_stack(rng, 16, 2);
    const CtfFilter h = build_filter(16, 16, CtfParams{});
    const ProjectionStack measured = apply_filter(clean, h);
    const ProjectionStack corrected = phase_flip_correct(measured, h);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto c = dft(clean.image(i), 16, 16);
        const auto r = dft(corrected.image(i), 16, 16);
        for (std::size_t b = 0; b < c.size(); ++b)
            CHECK(std::abs(r[b] - std::abs(h.response()[b]) * c[b]) < 1e-9);
    }

    const ProjectionStack zero(16, 16, std::vector<ViewGeometry>(2));
    const ProjectionStack still_zero = phase_flip_correct(zero, h);
    for (double x : still_zero.data())
        CHECK(x == 0.0);

    // Flipping twice only drops the bins where the response is zero.
    const ProjectionStack twice = phase_flip_correct(phase_flip_correct(measured, h), h);
    std::vector<double> mask(h.response().size());
    for (std::size_t b = 0; b < mask.size(); ++b)
        mask[b] = std::abs(phase_flip_filter(h).response()[b]);
    const ProjectionStack masked = apply_filter(measured, CtfFilter(16, 16, mask));
    for (std::size_t i = 0; i < twice.data().size(); ++i)
        CHECK(std::abs(twice.data()[i] - masked.data()[i]) < 1e-12);
}

TEST_CASE("low-pass and phase flip commute") {
    std::mt19937_64 rng(3);
    const ProjectionStack s = random_stack(rng, 16, 3);
    const CtfFilter h = build_filter(16, 16, CtfParams{});
    const ProjectionStack a = phase_flip_correct(gaussian_lowpass(s, 0.15), h);
    const ProjectionStack b = gaussian_lowpass(phase_flip_correct(s, h), 0.15);
    for (std::size_t i = 0; i < a.data().size(); ++i)
        CHECK(std::abs(a.data()[i] - b.data()[i]) < 1e-10);
}

TEST_CASE("CGLS recovers a random volume from many noiseless views") {
    const GridSpec g = GridSpec::cube(8);
    std::mt19937_64 rng(4);
    Volume truth(g);
    std::uniform_real_distribution<double> unit;
    for (auto& x : truth.data())
        x = unit(rng);
    const auto views = random_views(rng, 192, 0.3);
    const ProjectionStack g_stack = forward_project(truth, views);
    BaselineConfig cfg;
    cfg.cgls_iters = 100;
    cfg.cgls_tol = 0.0;
    const CglsResult r = cgls_reconstruct(g_stack, g, cfg);
    CHECK(r.iterations <= 100);
    CHECK(nrmse_percent(r.estimate, truth) < 1.0);
    REQUIRE(r.residual_norms.size() == static_cast<std::size_t>(r.iterations) + 1);
    for (std::size_t k = 1; k < r.residual_norms.size(); ++k)
        CHECK(r.residual_norms[k] <= r.residual_norms[k - 1] * (1 + 1e-12));
}

TEST_CASE("CGLS of zero data stays at zero") {
    const GridSpec g = GridSpec::cube(6);
    std::mt19937_64 rng(5);
    const ProjectionStack zero(6, 6, random_views(rng, 5, 0.5));
    BaselineConfig cfg;
    cfg.cgls_iters = 5;
    int calls = 0;
    const CglsResult r = cgls_reconstruct(zero, g, cfg, {}, [&](int, const Volume& f) {
        ++calls;
        for (double x : f.data())
            CHECK(x == 0.0);
    });
    for (double x : r.estimate.data())
        CHECK(x == 0.0);
    (void)calls;
}

TEST_CASE("CGLS iterates stay within the minimum-norm solution's norm") {
    const GridSpec g = GridSpec::cube(5);
    std::mt19937_64 rng(6);
    const auto views = random_views(rng, 4, 0.5);
    const ProjectionStack y = [&] {
        ProjectionStack s(5, 5, views);
        std::normal_distribution<double> normal;
        for (auto& x : s.data())
            x = normal(rng);
        return s;
    }();

    const Eigen::Index rows = static_cast<Eigen::Index>(y.data().size());
    const Eigen::Index cols = static_cast<Eigen::Index>(g.voxel_count());
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        Volume e(g);
        e.data()[static_cast<std::size_t>(j)] = 1.0;
        const ProjectionStack col = forward_project(e, views);
        for (Eigen::Index i = 0; i < rows; ++i)
            a(i, j) = col.data()[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data().data(), rows);
    const Eigen::VectorXd pinv = a.completeOrthogonalDecomposition().solve(yv);

    BaselineConfig cfg;
    cfg.cgls_iters = 60;
    cfg.cgls_tol = 0.0;
    const double bound = pinv.norm() * (1 + 1e-6);
    const CglsResult r = cgls_reconstruct(y, g, cfg, {}, [&](int, const Volume& f) { CHECK(norm2(f.data()) <= bound); });
    CHECK(norm2(r.estimate.data()) <= bound);
}

TEST_CASE("P+R with all-pass settings is plain CGLS") {
    const GridSpec g = GridSpec::cube(8);
    std::mt19937_64 rng(7);
    const auto views = random_views(rng, 10, 0.5);
    Volume truth(g);
    std::uniform_real_distribution<double> unit;
    for (auto& x : truth.data())
        x = unit(rng);
    const ProjectionStack y = forward_project(truth, views);
    BaselineConfig cfg;
    cfg.gaussian_sigma = 1e9;
    cfg.cgls_iters = 15;
    const std::vector<CtfFilter> table{CtfFilter::identity(8, 8)};
    const Volume pr = pr_reconstruct(y, table, g, cfg);
    const Volume plain = cgls_reconstruct(y, g, cfg).estimate;
    const double scale = norm2(plain.data());
    for (std::size_t j = 0; j < pr.size(); ++j)
        CHECK(std::abs(pr.data()[j] - plain.data()[j]) <= 1e-9 * scale);

    const Volume again = pr_reconstruct(y, table, g, cfg);
    CHECK(std::equal(pr.data().begin(), pr.data().end(), again.data().begin()));
}

TEST_CASE("tuning keeps the best grid point") {
    const GridSpec g = GridSpec::cube(8);
    std::mt19937_64 rng(8);
    const auto views = random_views(rng, 24, 0.5);
    Volume truth(g);
    for (int z = 2; z < 6; ++z)
        for (int y = 2; y < 6; ++y)
            for (int x = 2; x < 6; ++x)
                truth.at(x, y, z) = 1.0;
    const std::vector<CtfFilter> table{build_filter(8, 8, CtfParams{})};
    ProjectionStack y = apply_filter(forward_project(truth, views), table[0]);
    std::normal_distribution<double> normal(0.0, 0.2);
    for (auto& x : y.data())
        x += normal(rng);

    const std::vector<double> sigmas{0.1, 0.2};
    const std::vector<int> iters{3, 10};
    const PrTuningResult r = tune_pr(y, table, truth, sigmas, iters);
    REQUIRE(r.entries.size() == 4);
    double best = INFINITY;
    for (const auto& e : r.entries)
        best = std::min(best, e.nrmse_percent);
    CHECK(r.best_nrmse == best);
    CHECK(nrmse_percent(r.best_estimate, truth) == doctest::Approx(best).epsilon(1e-12));
    BaselineConfig cfg = r.best_config;
    cfg.cgls_tol = 0.0;
    CHECK(nrmse_percent(pr_reconstruct(y, table, g, cfg), truth) == doctest::Approx(best).epsilon(1e-9));
}
