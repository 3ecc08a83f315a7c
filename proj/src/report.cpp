#include "cryombir/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cryombir/atomic_file.hpp"

namespace cryombir {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

double to_double(const std::string& s, const std::string& what) {
    double v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("report field '" + what + "' is not a number: '" + s + "'");
    return v;
}

} // namespace

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw ValidationError("cannot open report '" + path.string() + "'");
    std::vector<ReportRow> rows;
    std::string line;
    if (!std::getline(is, line) || line != kReportHeader)
        throw ValidationError("report '" + path.string() + "' lacks the expected header");
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != 6)
            throw ValidationError("report row needs 6 fields: '" + line + "'");
        rows.push_back(ReportRow{f[0], to_double(f[1], "psnr_db"), to_double(f[2], "subsample"), f[3],
                                 to_double(f[4], "nrmse_percent"), to_double(f[5], "wall_seconds")});
    }
    return rows;
}

void append_report_csv(const std::filesystem::path& path, std::span<const ReportRow> rows) {
    std::vector<ReportRow> all;
    if (std::filesystem::exists(path))
        all = read_report_csv(path);
    all.insert(all.end(), rows.begin(), rows.end());
    write_file_atomically(path, [&](std::ofstream& os) {
        os << kReportHeader << '\n';
        for (const auto& r : all)
            os << r.dataset << ',' << fixed(r.psnr_db, 2) << ',' << fixed(r.subsample, 2) << ',' << r.method << ','
               << fixed(r.nrmse_percent, 4) << ',' << fixed(r.wall_seconds, 3) << '\n';
    });
}

std::string format_table_row(const std::string& dataset, double pr_nrmse, double mbir_nrmse) {
    return dataset + "  " + fixed(pr_nrmse, 2) + "|" + fixed(mbir_nrmse, 2);
}

Image volume_slice(const Volume& volume, SliceAxis axis, int index) {
    const GridSpec& g = volume.grid();
    const int depth = axis == SliceAxis::x ? g.nx : axis == SliceAxis::y ? g.ny : g.nz;
    if (index < 0 || index >= depth)
        throw DomainError("slice index " + std::to_string(index) + " outside [0, " + std::to_string(depth) + ")");
    Image img;
    switch (axis) {
    case SliceAxis::z:
        img = Image{g.nx, g.ny, {}};
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x)
                img.pixels.push_back(volume.at(x, y, index));
        break;
    case SliceAxis::y:
        img = Image{g.nx, g.nz, {}};
        for (int z = 0; z < g.nz; ++z)
            for (int x = 0; x < g.nx; ++x)
                img.pixels.push_back(volume.at(x, index, z));
        break;
    case SliceAxis::x:
        img = Image{g.ny, g.nz, {}};
        for (int z = 0; z < g.nz; ++z)
            for (int y = 0; y < g.ny; ++y)
                img.pixels.push_back(volume.at(index, y, z));
        break;
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image, double lo, double hi) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height))
        throw DimensionError("image pixel count does not match its shape");
    const double span = hi > lo ? hi - lo : 1.0;
    write_file_atomically(
        path,
        [&](std::ofstream& os) {
            os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
            for (double v : image.pixels) {
                const double t = std::clamp((v - lo) / span, 0.0, 1.0);
                os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
            }
        },
        true);
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
    if (image.pixels.empty())
        throw DimensionError("empty image");
    const auto [lo, hi] = std::minmax_element(image.pixels.begin(), image.pixels.end());
    write_pgm(path, image, *lo, *hi);
}

} // namespace cryombir
