#include "cryombir/ctf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cryombir/fourier.hpp"

namespace cryombir {

void CtfParams::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(dz_lambda) || !std::isfinite(cs_lambda3))
        throw DomainError("CTF parameters must be finite");
    if (alpha < 0.0)
        throw DomainError("CTF attenuation alpha must be >= 0");
}

double ctf_transfer(double k, const CtfParams& params) {
    if (!(k >= 0.0))
        throw DomainError("radial frequency must be >= 0");
    const double k2 = k * k;
    const double phase = -std::numbers::pi * params.dz_lambda * k2 + 0.5 * std::numbers::pi * params.cs_lambda3 * k2 * k2;
    return std::exp(-params.alpha * k) * std::sin(phase);
}

CtfFilter::CtfFilter(int width, int height, std::vector<double> response)
    : width_(width), height_(height), response_(std::move(response)) {
    if (width_ < 1 || height_ < 1)
        throw DimensionError("filter must be at least 1x1");
    if (response_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
        throw DimensionError("filter response size does not match its shape");
    for (int v = 0; v < height_; ++v) {
        for (int u = 0; u < width_; ++u) {
            const double r = at(u, v);
            if (!std::isfinite(r))
                throw DomainError("filter response must be finite");
            if (r != at((width_ - u) % width_, (height_ - v) % height_))
                throw DomainError("filter response must be even under frequency negation");
        }
    }
}

CtfFilter CtfFilter::identity(int width, int height) {
    return CtfFilter(width, height, std::vector<double>(static_cast<std::size_t>(width) * height, 1.0));
}

double CtfFilter::max_abs() const noexcept {
    double m = 0.0;
    for (double r : response_)
        m = std::max(m, std::abs(r));
    return m;
}

CtfFilter build_filter(int width, int height, const CtfParams& params) {
    params.validate();
    if (width < 1 || height < 1)
        throw DimensionError("filter must be at least 1x1");
    std::vector<double> response(static_cast<std::size_t>(width) * height);
    for (int v = 0; v < height; ++v) {
        const double kv = signed_frequency(v, height);
        for (int u = 0; u < width; ++u) {
            const double ku = signed_frequency(u, width);
            response[static_cast<std::size_t>(u) + static_cast<std::size_t>(width) * v] =
                ctf_transfer(std::sqrt(ku * ku + kv * kv), params);
        }
    }
    return CtfFilter(width, height, std::move(response));
}

void apply_filter_in_place(ProjectionStack& stack, std::span<const CtfFilter> table) {
    for (const auto& f : table)
        if (f.width() != stack.width() || f.height() != stack.height())
            throw DimensionError("filter is " + std::to_string(f.width()) + "x" + std::to_string(f.height()) +
                                 ", images are " + std::to_string(stack.width()) + "x" + std::to_string(stack.height()));
    const long n = static_cast<long>(stack.n_views());
    for (long i = 0; i < n; ++i) {
        const int idx = stack.views()[static_cast<std::size_t>(i)].ctf_index;
        if (idx < 0 || static_cast<std::size_t>(idx) >= table.size())
            throw ValidationError("view " + std::to_string(i) + " references CTF " + std::to_string(idx) +
                                  " but the table has " + std::to_string(table.size()) + " entries");
    }
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto& f = table[static_cast<std::size_t>(stack.views()[static_cast<std::size_t>(i)].ctf_index)];
        fourier_multiply(stack.image(static_cast<std::size_t>(i)), stack.width(), stack.height(), f.response());
    }
}

ProjectionStack apply_filter(const ProjectionStack& stack, std::span<const CtfFilter> table) {
    ProjectionStack out = stack;
    apply_filter_in_place(out, table);
    return out;
}

ProjectionStack apply_filter(const ProjectionStack& stack, const CtfFilter& filter) {
    if (filter.width() != stack.width() || filter.height() != stack.height())
        throw DimensionError("filter and image dimensions differ");
    ProjectionStack out = stack;
    const long n = static_cast<long>(out.n_views());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i)
        fourier_multiply(out.image(static_cast<std::size_t>(i)), out.width(), out.height(), filter.response());
    return out;
}

CtfFilter phase_flip_filter(const CtfFilter& filter) {
    std::vector<double> flipped(filter.response().begin(), filter.response().end());
    for (double& r : flipped)
        r = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    return CtfFilter(filter.width(), filter.height(), std::move(flipped));
}

} // namespace cryombir
