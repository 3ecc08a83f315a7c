#include "cryombir/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cryombir {

void GridSpec::validate() const {
    if (nx < 1 || ny < 1 || nz < 1)
        throw DimensionError("grid dimensions must be >= 1, got " + std::to_string(nx) + "x" +
                             std::to_string(ny) + "x" + std::to_string(nz));
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
        throw DomainError("voxel size must be positive and finite");
}

Volume::Volume(const GridSpec& grid) : grid_(grid) {
    grid_.validate();
    data_.assign(grid_.voxel_count(), 0.0);
}

Volume::Volume(const GridSpec& grid, std::vector<double> data) : grid_(grid), data_(std::move(data)) {
    grid_.validate();
    if (data_.size() != grid_.voxel_count())
        throw DimensionError("volume data has " + std::to_string(data_.size()) + " values, grid needs " +
                             std::to_string(grid_.voxel_count()));
    if (!all_finite())
        throw DomainError("volume contains non-finite values");
}

double Volume::max() const {
    if (data_.empty())
        throw DimensionError("empty volume");
    return *std::max_element(data_.begin(), data_.end());
}

bool Volume::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ProjectionStack::ProjectionStack(int width, int height, std::vector<ViewGeometry> views)
    : width_(width), height_(height), views_(std::move(views)) {
    if (width_ < 1 || height_ < 1)
        throw DimensionError("projection images must be at least 1x1");
    data_.assign(image_size() * views_.size(), 0.0);
}

ProjectionStack::ProjectionStack(int width, int height, std::vector<ViewGeometry> views, std::vector<double> data)
    : width_(width), height_(height), views_(std::move(views)), data_(std::move(data)) {
    if (width_ < 1 || height_ < 1)
        throw DimensionError("projection images must be at least 1x1");
    if (data_.size() != image_size() * views_.size())
        throw DimensionError("projection data has " + std::to_string(data_.size()) + " values, expected " +
                             std::to_string(image_size() * views_.size()));
    if (!all_finite())
        throw DomainError("projection stack contains non-finite values");
}

ProjectionStack ProjectionStack::zeros_like() const { return ProjectionStack(width_, height_, views_); }

ProjectionStack ProjectionStack::select(std::span<const std::size_t> indices) const {
    std::vector<ViewGeometry> views;
    std::vector<double> data;
    views.reserve(indices.size());
    data.reserve(indices.size() * image_size());
    for (std::size_t i : indices) {
        if (i >= n_views())
            throw DimensionError("view index " + std::to_string(i) + " out of range");
        views.push_back(views_[i]);
        auto img = image(i);
        data.insert(data.end(), img.begin(), img.end());
    }
    return ProjectionStack(width_, height_, std::move(views), std::move(data));
}

bool ProjectionStack::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DiagonalWeights::DiagonalWeights(std::vector<double> data) : data_(std::move(data)) {
    for (double w : data_)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw DomainError("weights must be finite and nonnegative");
}

DiagonalWeights DiagonalWeights::uniform(std::size_t n, double value) {
    return DiagonalWeights(std::vector<double>(n, value));
}

DiagonalWeights DiagonalWeights::select_views(std::span<const std::size_t> indices, std::size_t image_size) const {
    std::vector<double> out;
    out.reserve(indices.size() * image_size);
    for (std::size_t i : indices) {
        if ((i + 1) * image_size > data_.size())
            throw DimensionError("weight view index " + std::to_string(i) + " out of range");
        auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * image_size);
        out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(image_size));
    }
    return DiagonalWeights(std::move(out));
}

double weighted_residual_norm_sq(std::span<const double> residual, const DiagonalWeights& w) {
    if (residual.size() != w.size())
        throw DimensionError("residual has " + std::to_string(residual.size()) + " entries, weights have " +
                             std::to_string(w.size()));
    const auto weights = w.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i)
        sum += weights[i] * residual[i] * residual[i];
    return sum;
}

double nrmse_percent(const Volume& estimate, const Volume& reference) {
    if (!(estimate.grid() == reference.grid()))
        throw DimensionError("estimate and reference grids differ");
    const double peak = reference.max();
    if (!(peak > 0.0))
        throw DegenerateReferenceError("reference maximum must be positive for NRMSE");
    const auto e = estimate.data();
    const auto r = reference.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double d = e[i] - r[i];
        sum += d * d;
    }
    return 100.0 * std::sqrt(sum / static_cast<double>(e.size())) / peak;
}

double psnr_db(double peak, double sigma) {
    if (!(peak > 0.0) || !(sigma > 0.0))
        throw DomainError("PSNR needs positive peak and sigma");
    return 20.0 * std::log10(peak / sigma);
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dot product of vectors with different lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size())
        throw DimensionError("axpy on vectors with different lengths");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

} // namespace cryombir
