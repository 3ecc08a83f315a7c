#include "cryombir/atomic_file.hpp"

#include "cryombir/errors.hpp"

namespace cryombir {

void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ofstream&)>& fill,
                           bool binary) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
        if (!os)
            throw ValidationError("cannot open '" + tmp.string() + "' for writing");
        fill(os);
        os.flush();
        if (!os)
            throw ValidationError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace cryombir
