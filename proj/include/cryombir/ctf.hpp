#pragma once

#include <span>
#include <vector>

#include "cryombir/core.hpp"

namespace cryombir {

/// Radial CTF coefficients. Defocus and wavelength only ever appear as the
/// products dz*lambda and Cs*lambda^3, so those products are stored.
struct CtfParams {
    double alpha{1.0};
    double dz_lambda{100.0};
    double cs_lambda3{10.0};

    void validate() const;
    friend bool operator==(const CtfParams&, const CtfParams&) = default;
};

/// h(k) = exp(-alpha k) * sin(-pi dz_lambda k^2 + (pi/2) cs_lambda3 k^4),
/// k in cycles per pixel.
[[nodiscard]] double ctf_transfer(double k, const CtfParams& params);

/// A real, even transfer function sampled on the full width x height DFT grid;
/// response[u + width * v] belongs to frequency (signed_frequency(u, width),
/// signed_frequency(v, height)).
class CtfFilter {
public:
    CtfFilter() = default;
    CtfFilter(int width, int height, std::vector<double> response);

    static CtfFilter identity(int width, int height);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::span<const double> response() const noexcept { return response_; }
    [[nodiscard]] double at(int u, int v) const noexcept {
        return response_[static_cast<std::size_t>(u) + static_cast<std::size_t>(width_) * static_cast<std::size_t>(v)];
    }
    [[nodiscard]] double max_abs() const noexcept;

private:
    int width_{0};
    int height_{0};
    std::vector<double> response_;
};

[[nodiscard]] CtfFilter build_filter(int width, int height, const CtfParams& params);

/// Circular convolution of every image with the filter.
[[nodiscard]] ProjectionStack apply_filter(const ProjectionStack& stack, const CtfFilter& filter);

/// Per-view filtering: image i uses table[views[i].ctf_index].
[[nodiscard]] ProjectionStack apply_filter(const ProjectionStack& stack, std::span<const CtfFilter> table);

void apply_filter_in_place(ProjectionStack& stack, std::span<const CtfFilter> table);

/// sign(response), with sign(0) = 0.
[[nodiscard]] CtfFilter phase_flip_filter(const CtfFilter& filter);

} // namespace cryombir
