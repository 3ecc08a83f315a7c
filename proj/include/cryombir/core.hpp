#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cryombir/errors.hpp"

namespace cryombir {

/// Regular voxel grid. Volumes in this project are cubic, so the projected
/// width of a volume (detector side length in pixels) is `nx`.
struct GridSpec {
    int nx{1};
    int ny{1};
    int nz{1};
    double voxel_size{1.0};

    [[nodiscard]] std::size_t voxel_count() const noexcept {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    [[nodiscard]] int projected_width() const noexcept { return nx; }
    [[nodiscard]] std::size_t index(int x, int y, int z) const noexcept {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(z));
    }
    void validate() const;

    static GridSpec cube(int n, double voxel_size = 1.0) { return GridSpec{n, n, n, voxel_size}; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Scalar density on a GridSpec, x fastest then y then z.
class Volume {
public:
    Volume() = default;
    explicit Volume(const GridSpec& grid);
    Volume(const GridSpec& grid, std::vector<double> data);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] double& at(int x, int y, int z) noexcept { return data_[grid_.index(x, y, z)]; }
    [[nodiscard]] double at(int x, int y, int z) const noexcept { return data_[grid_.index(x, y, z)]; }

    [[nodiscard]] double max() const;
    [[nodiscard]] bool all_finite() const noexcept;

private:
    GridSpec grid_{};
    std::vector<double> data_;
};

struct EulerAngles {
    double phi{0.0};
    double theta{0.0};
    double psi{0.0};
};

/// In-plane particle offset in detector pixels.
struct DetectorOffset {
    double tx{0.0};
    double ty{0.0};
};

/// Orientation and centering of one particle image.
struct ViewGeometry {
    EulerAngles euler{};
    DetectorOffset offset{};
    int ctf_index{0};
};

/// A stack of square-pixel images, one ViewGeometry per image. Pixel (u, v)
/// of image i lives at `data[u + width * (v + height * i)]`.
class ProjectionStack {
public:
    ProjectionStack() = default;
    ProjectionStack(int width, int height, std::vector<ViewGeometry> views);
    ProjectionStack(int width, int height, std::vector<ViewGeometry> views, std::vector<double> data);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t n_views() const noexcept { return views_.size(); }
    [[nodiscard]] std::size_t image_size() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    [[nodiscard]] const std::vector<ViewGeometry>& views() const noexcept { return views_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> image(std::size_t view) const noexcept {
        return std::span<const double>(data_).subspan(view * image_size(), image_size());
    }
    [[nodiscard]] std::span<double> image(std::size_t view) noexcept {
        return std::span<double>(data_).subspan(view * image_size(), image_size());
    }

    /// Same shape and geometry, data zeroed.
    [[nodiscard]] ProjectionStack zeros_like() const;
    /// Views selected by index, in the order given.
    [[nodiscard]] ProjectionStack select(std::span<const std::size_t> indices) const;
    [[nodiscard]] bool all_finite() const noexcept;

private:
    int width_{0};
    int height_{0};
    std::vector<ViewGeometry> views_;
    std::vector<double> data_;
};

/// Diagonal of W: per-pixel inverse noise variance. Zero entries mask pixels.
class DiagonalWeights {
public:
    DiagonalWeights() = default;
    explicit DiagonalWeights(std::vector<double> data);
    static DiagonalWeights uniform(std::size_t n, double value);

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] DiagonalWeights select_views(std::span<const std::size_t> indices, std::size_t image_size) const;

private:
    std::vector<double> data_;
};

/// Sum_i w_i * r_i^2.
[[nodiscard]] double weighted_residual_norm_sq(std::span<const double> residual, const DiagonalWeights& w);

/// 100 * RMS(estimate - reference) / max(reference).
[[nodiscard]] double nrmse_percent(const Volume& estimate, const Volume& reference);

/// 20 log10(peak / sigma).
[[nodiscard]] double psnr_db(double peak, double sigma);

// Small dense-vector helpers shared by the iterative methods.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

} // namespace cryombir
