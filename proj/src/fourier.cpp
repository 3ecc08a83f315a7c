#include "cryombir/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "cryombir/errors.hpp"

namespace cryombir {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is. Plans are
// created once per image shape and kept for the life of the process.
struct PlanPair {
    fftw_plan forward{};
    fftw_plan inverse{};
};

PlanPair plans_for(int width, int height) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({width, height});
    if (it != cache.end())
        return it->second;
    const std::size_t n_real = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t n_cplx = static_cast<std::size_t>(width / 2 + 1) * static_cast<std::size_t>(height);
    double* real = fftw_alloc_real(n_real);
    fftw_complex* cplx = fftw_alloc_complex(n_cplx);
    PlanPair pp;
    pp.forward = fftw_plan_dft_r2c_2d(height, width, real, cplx, FFTW_ESTIMATE);
    pp.inverse = fftw_plan_dft_c2r_2d(height, width, cplx, real, FFTW_ESTIMATE);
    fftw_free(real);
    fftw_free(cplx);
    cache.emplace(std::make_pair(width, height), pp);
    return pp;
}

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

} // namespace

double signed_frequency(int index, int n) noexcept {
    const int shifted = index < (n + 1) / 2 ? index : index - n;
    return static_cast<double>(shifted) / static_cast<double>(n);
}

void fourier_multiply(std::span<double> image, int width, int height, std::span<const double> response) {
    const std::size_t n_real = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (image.size() != n_real || response.size() != n_real)
        throw DimensionError("image, response and declared shape disagree");
    const int half = width / 2 + 1;
    const PlanPair plans = plans_for(width, height);

    std::unique_ptr<double, FftwDeleter> real(fftw_alloc_real(n_real));
    std::unique_ptr<fftw_complex, FftwDeleter> cplx(
        fftw_alloc_complex(static_cast<std::size_t>(half) * static_cast<std::size_t>(height)));
    std::copy(image.begin(), image.end(), real.get());

    fftw_execute_dft_r2c(plans.forward, real.get(), cplx.get());
    const double norm = 1.0 / static_cast<double>(n_real);
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < half; ++u) {
            const double h = response[static_cast<std::size_t>(u) + static_cast<std::size_t>(width) * v] * norm;
            fftw_complex& z = cplx.get()[u + half * v];
            z[0] *= h;
            z[1] *= h;
        }
    }
    fftw_execute_dft_c2r(plans.inverse, cplx.get(), real.get());
    std::copy(real.get(), real.get() + n_real, image.begin());
}

} // namespace cryombir
