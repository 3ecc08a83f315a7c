#pragma once

#include <filesystem>
#include <vector>

#include "cryombir/core.hpp"

namespace cryombir {

/// Raw contents of a mode-2 MRC file.
struct MrcArray {
    int nx{0};
    int ny{0};
    int nz{0};
    double voxel_size{1.0};
    std::vector<float> data; // x fastest
};

inline constexpr std::size_t kMrcHeaderBytes = 1024;

/// Reads a little-endian MRC2014 file with mode 2 (float32) data, skipping any
/// extended header. Throws FormatError carrying the offending byte offset.
[[nodiscard]] MrcArray read_mrc_array(const std::filesystem::path& path);

/// Writes a 1024-byte MRC2014 header (no extended header) followed by float32
/// data. `is_stack` selects space group 0 (image stack) instead of 1 (volume).
/// The file is written to a temporary name and renamed into place.
void write_mrc_array(const std::filesystem::path& path, const MrcArray& array, bool is_stack = false);

[[nodiscard]] Volume read_mrc(const std::filesystem::path& path);
void write_mrc(const std::filesystem::path& path, const Volume& volume);

/// Projection stacks: image data only; view geometry lives in the geometry file.
void write_mrc_stack(const std::filesystem::path& path, const ProjectionStack& stack);
[[nodiscard]] ProjectionStack read_mrc_stack(const std::filesystem::path& path, std::vector<ViewGeometry> views);

} // namespace cryombir
