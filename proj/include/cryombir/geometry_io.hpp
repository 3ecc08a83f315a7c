#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cryombir/core.hpp"
#include "cryombir/ctf.hpp"

namespace cryombir {

/// Per-view geometry plus the CTF table its ctf_index values refer to.
struct GeometryFile {
    std::vector<ViewGeometry> views;
    std::vector<CtfParams> ctf_table;

    /// Every ctf_index resolves and the table is non-empty.
    void validate() const;
};

/// CSV layout:
///     index,phi,theta,psi,tx,ty,ctf_index
///     0,<17 significant digits>,...
///     # ctf <index> <alpha> <dz_lambda> <cs_lambda3>
/// Angles in radians, offsets in pixels. CTF rows follow the view rows.
void write_geometry_csv(std::ostream& os, const GeometryFile& geometry);
void write_geometry_csv(const std::filesystem::path& path, const GeometryFile& geometry);

[[nodiscard]] GeometryFile read_geometry_csv(std::istream& is);
[[nodiscard]] GeometryFile read_geometry_csv(const std::filesystem::path& path);

} // namespace cryombir
