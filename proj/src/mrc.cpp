#include "cryombir/mrc.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "cryombir/atomic_file.hpp"

namespace cryombir {

static_assert(std::endian::native == std::endian::little, "MRC I/O assumes a little-endian host");

namespace {

// Header word offsets (bytes).
constexpr std::size_t kNx = 0, kNy = 4, kNz = 8, kMode = 12;
constexpr std::size_t kMx = 28, kMy = 32, kMz = 36;
constexpr std::size_t kCella = 40, kCellb = 52;
constexpr std::size_t kMapc = 64, kMapr = 68, kMaps = 72;
constexpr std::size_t kDmin = 76, kDmax = 80, kDmean = 84;
constexpr std::size_t kIspg = 88, kNsymbt = 92;
constexpr std::size_t kExttyp = 104, kNversion = 108;
constexpr std::size_t kMap = 208, kMachst = 212, kRms = 216, kNlabl = 220, kLabel = 224;

using Header = std::array<unsigned char, kMrcHeaderBytes>;

template <class T>
T get(const Header& h, std::size_t offset) {
    T value;
    std::memcpy(&value, h.data() + offset, sizeof(T));
    return value;
}

template <class T>
void put(Header& h, std::size_t offset, T value) {
    std::memcpy(h.data() + offset, &value, sizeof(T));
}

} // namespace

MrcArray read_mrc_array(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ValidationError("cannot open MRC file '" + path.string() + "'");
    is.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(is.tellg());
    is.seekg(0);
    if (file_size < kMrcHeaderBytes)
        throw FormatError("MRC file '" + path.string() + "' is shorter than its 1024-byte header", file_size);

    Header h{};
    is.read(reinterpret_cast<char*>(h.data()), static_cast<std::streamsize>(h.size()));

    if (std::memcmp(h.data() + kMap, "MAP ", 4) != 0)
        throw FormatError("missing 'MAP ' identifier in '" + path.string() + "'", kMap);
    const unsigned char m0 = h[kMachst], m1 = h[kMachst + 1];
    if (!(m0 == 0x44 && (m1 == 0x44 || m1 == 0x41)))
        throw FormatError("unsupported machine stamp (only little-endian files are read)", kMachst);
    const auto mode = get<std::int32_t>(h, kMode);
    if (mode != 2)
        throw FormatError("unsupported MRC mode " + std::to_string(mode) + " (only mode 2, float32)", kMode);

    MrcArray out;
    out.nx = get<std::int32_t>(h, kNx);
    out.ny = get<std::int32_t>(h, kNy);
    out.nz = get<std::int32_t>(h, kNz);
    if (out.nx < 1 || out.ny < 1 || out.nz < 1)
        throw FormatError("non-positive dimensions in MRC header", kNx);
    const auto mapc = get<std::int32_t>(h, kMapc), mapr = get<std::int32_t>(h, kMapr), maps = get<std::int32_t>(h, kMaps);
    if (!(mapc == 1 && mapr == 2 && maps == 3))
        throw FormatError("unsupported axis order (MAPC/MAPR/MAPS must be 1/2/3)", kMapc);
    const auto nsymbt = get<std::int32_t>(h, kNsymbt);
    if (nsymbt < 0)
        throw FormatError("negative extended header length", kNsymbt);

    const auto mx = get<std::int32_t>(h, kMx);
    const auto cella = get<float>(h, kCella);
    out.voxel_size = (mx > 0 && cella > 0.0f) ? static_cast<double>(cella) / mx : 1.0;

    const std::uint64_t data_start = kMrcHeaderBytes + static_cast<std::uint64_t>(nsymbt);
    const std::uint64_t n = static_cast<std::uint64_t>(out.nx) * static_cast<std::uint64_t>(out.ny) *
                            static_cast<std::uint64_t>(out.nz);
    const std::uint64_t needed = data_start + n * sizeof(float);
    if (file_size < needed)
        throw FormatError("MRC data truncated: expected " + std::to_string(needed) + " bytes, file has " +
                              std::to_string(file_size),
                          file_size);

    out.data.resize(static_cast<std::size_t>(n));
    is.seekg(static_cast<std::streamoff>(data_start));
    is.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!is)
        throw FormatError("failed reading MRC data", data_start);
    return out;
}

void write_mrc_array(const std::filesystem::path& path, const MrcArray& a, bool is_stack) {
    const std::size_t n = static_cast<std::size_t>(a.nx) * static_cast<std::size_t>(a.ny) * static_cast<std::size_t>(a.nz);
    if (a.nx < 1 || a.ny < 1 || a.nz < 1 || a.data.size() != n)
        throw DimensionError("MRC array dimensions do not match its data");

    Header h{};
    put<std::int32_t>(h, kNx, a.nx);
    put<std::int32_t>(h, kNy, a.ny);
    put<std::int32_t>(h, kNz, a.nz);
    put<std::int32_t>(h, kMode, 2);
    put<std::int32_t>(h, kMx, a.nx);
    put<std::int32_t>(h, kMy, a.ny);
    put<std::int32_t>(h, kMz, is_stack ? 1 : a.nz);
    put<float>(h, kCella, static_cast<float>(a.nx * a.voxel_size));
    put<float>(h, kCella + 4, static_cast<float>(a.ny * a.voxel_size));
    put<float>(h, kCella + 8, static_cast<float>((is_stack ? 1 : a.nz) * a.voxel_size));
    put<float>(h, kCellb, 90.0f);
    put<float>(h, kCellb + 4, 90.0f);
    put<float>(h, kCellb + 8, 90.0f);
    put<std::int32_t>(h, kMapc, 1);
    put<std::int32_t>(h, kMapr, 2);
    put<std::int32_t>(h, kMaps, 3);

    double lo = n ? a.data[0] : 0.0, hi = lo, sum = 0.0;
    for (float v : a.data) {
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
        sum += v;
    }
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (float v : a.data)
        var += (v - mean) * (v - mean);
    put<float>(h, kDmin, static_cast<float>(lo));
    put<float>(h, kDmax, static_cast<float>(hi));
    put<float>(h, kDmean, static_cast<float>(mean));
    put<std::int32_t>(h, kIspg, is_stack ? 0 : 1);
    put<std::int32_t>(h, kNsymbt, 0);
    std::memcpy(h.data() + kExttyp, "MRCO", 4);
    put<std::int32_t>(h, kNversion, 20140);
    std::memcpy(h.data() + kMap, "MAP ", 4);
    h[kMachst] = 0x44;
    h[kMachst + 1] = 0x44;
    put<float>(h, kRms, static_cast<float>(std::sqrt(var / static_cast<double>(n))));
    put<std::int32_t>(h, kNlabl, 1);
    const char label[] = "cryombir";
    std::memcpy(h.data() + kLabel, label, sizeof(label) - 1);

    write_file_atomically(
        path,
        [&](std::ofstream& os) {
            os.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
            os.write(reinterpret_cast<const char*>(a.data.data()), static_cast<std::streamsize>(n * sizeof(float)));
        },
        true);
}

Volume read_mrc(const std::filesystem::path& path) {
    MrcArray a = read_mrc_array(path);
    std::vector<double> data(a.data.begin(), a.data.end());
    return Volume(GridSpec{a.nx, a.ny, a.nz, a.voxel_size}, std::move(data));
}

void write_mrc(const std::filesystem::path& path, const Volume& volume) {
    const GridSpec& g = volume.grid();
    MrcArray a{g.nx, g.ny, g.nz, g.voxel_size, {}};
    a.data.reserve(volume.size());
    for (double v : volume.data())
        a.data.push_back(static_cast<float>(v));
    write_mrc_array(path, a, false);
}

void write_mrc_stack(const std::filesystem::path& path, const ProjectionStack& stack) {
    MrcArray a{stack.width(), stack.height(), static_cast<int>(stack.n_views()), 1.0, {}};
    a.data.reserve(stack.data().size());
    for (double v : stack.data())
        a.data.push_back(static_cast<float>(v));
    write_mrc_array(path, a, true);
}

ProjectionStack read_mrc_stack(const std::filesystem::path& path, std::vector<ViewGeometry> views) {
    MrcArray a = read_mrc_array(path);
    if (static_cast<std::size_t>(a.nz) != views.size())
        throw ValidationError("stack '" + path.string() + "' has " + std::to_string(a.nz) + " images but " +
                              std::to_string(views.size()) + " views were given");
    std::vector<double> data(a.data.begin(), a.data.end());
    return ProjectionStack(a.nx, a.ny, std::move(views), std::move(data));
}

} // namespace cryombir
