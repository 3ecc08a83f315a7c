#pragma once

#include <filesystem>
#include <fstream>
#include <functional>

namespace cryombir {

/// Writes through `fill` into `<path>.tmp`, then renames over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ofstream&)>& fill,
                           bool binary = false);

} // namespace cryombir
