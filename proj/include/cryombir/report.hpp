#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cryombir/core.hpp"

namespace cryombir {

/// One line of the evaluation report.
struct ReportRow {
    std::string dataset;
    double psnr_db{0.0};
    double subsample{1.0};
    std::string method;
    double nrmse_percent{0.0};
    double wall_seconds{0.0};
};

inline constexpr const char* kReportHeader = "dataset,psnr_db,subsample,method,nrmse_percent,wall_seconds";

/// Appends rows to a report CSV, creating it (with header) if needed.
void append_report_csv(const std::filesystem::path& path, std::span<const ReportRow> rows);
[[nodiscard]] std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// "<dataset>  <pr>|<mbir>" with two decimals, the comparison-table layout.
[[nodiscard]] std::string format_table_row(const std::string& dataset, double pr_nrmse, double mbir_nrmse);

enum class SliceAxis { x, y, z };

/// Cross-section of a volume as a row-major image (width, height, pixels).
struct Image {
    int width{0};
    int height{0};
    std::vector<double> pixels;
};

[[nodiscard]] Image volume_slice(const Volume& volume, SliceAxis axis, int index);

/// Binary 8-bit PGM (P5), linearly mapping [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, const Image& image, double lo, double hi);
/// Same, with lo/hi taken from the image's own range.
void write_pgm(const std::filesystem::path& path, const Image& image);

} // namespace cryombir
