#include "cryombir/geometry_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "cryombir/atomic_file.hpp"

namespace cryombir {

namespace {

constexpr std::string_view kHeader = "index,phi,theta,psi,tx,ty,ctf_index";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view field, std::uint64_t offset) {
    field = trim(field);
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError("cannot parse '" + std::string(field) + "' as a number", offset);
    return value;
}

} // namespace

void GeometryFile::validate() const {
    if (ctf_table.empty())
        throw ValidationError("geometry has no CTF table entries");
    for (std::size_t i = 0; i < views.size(); ++i) {
        const int idx = views[i].ctf_index;
        if (idx < 0 || static_cast<std::size_t>(idx) >= ctf_table.size())
            throw ValidationError("view " + std::to_string(i) + " references missing CTF " + std::to_string(idx));
    }
}

void write_geometry_csv(std::ostream& os, const GeometryFile& geometry) {
    os << kHeader << '\n';
    for (std::size_t i = 0; i < geometry.views.size(); ++i) {
        const auto& v = geometry.views[i];
        os << i << ',' << format_double(v.euler.phi) << ',' << format_double(v.euler.theta) << ','
           << format_double(v.euler.psi) << ',' << format_double(v.offset.tx) << ',' << format_double(v.offset.ty)
           << ',' << v.ctf_index << '\n';
    }
    for (std::size_t i = 0; i < geometry.ctf_table.size(); ++i) {
        const auto& c = geometry.ctf_table[i];
        os << "# ctf " << i << ' ' << format_double(c.alpha) << ' ' << format_double(c.dz_lambda) << ' '
           << format_double(c.cs_lambda3) << '\n';
    }
}

void write_geometry_csv(const std::filesystem::path& path, const GeometryFile& geometry) {
    write_file_atomically(path, [&](std::ofstream& os) { write_geometry_csv(os, geometry); });
}

GeometryFile read_geometry_csv(std::istream& is) {
    GeometryFile out;
    std::string line;
    std::uint64_t offset = 0;
    bool seen_header = false;
    while (std::getline(is, line)) {
        const std::uint64_t line_offset = offset;
        offset += line.size() + 1;
        const std::string_view text = trim(line);
        if (text.empty())
            continue;
        if (text.front() == '#') {
            std::istringstream ss{std::string(text.substr(1))};
            std::string tag;
            ss >> tag;
            if (tag != "ctf")
                continue;
            std::string fields[4];
            ss >> fields[0] >> fields[1] >> fields[2] >> fields[3];
            if (fields[3].empty())
                throw FormatError("CTF line needs '# ctf <index> <alpha> <dz_lambda> <cs_lambda3>'", line_offset);
            const auto idx = parse_number<long>(fields[0], line_offset);
            if (idx != static_cast<long>(out.ctf_table.size()))
                throw FormatError("CTF table indices must be consecutive from 0", line_offset);
            CtfParams p{parse_number<double>(fields[1], line_offset), parse_number<double>(fields[2], line_offset),
                        parse_number<double>(fields[3], line_offset)};
            p.validate();
            out.ctf_table.push_back(p);
            continue;
        }
        if (!seen_header) {
            if (text != kHeader)
                throw FormatError("expected header '" + std::string(kHeader) + "'", line_offset);
            seen_header = true;
            continue;
        }
        const auto fields = split(text, ',');
        if (fields.size() != 7)
            throw FormatError("view row needs 7 fields, found " + std::to_string(fields.size()), line_offset);
        const auto idx = parse_number<long>(fields[0], line_offset);
        if (idx != static_cast<long>(out.views.size()))
            throw FormatError("view indices must be consecutive from 0", line_offset);
        ViewGeometry v;
        v.euler = {parse_number<double>(fields[1], line_offset), parse_number<double>(fields[2], line_offset),
                   parse_number<double>(fields[3], line_offset)};
        v.offset = {parse_number<double>(fields[4], line_offset), parse_number<double>(fields[5], line_offset)};
        v.ctf_index = parse_number<int>(fields[6], line_offset);
        out.views.push_back(v);
    }
    if (!seen_header)
        throw FormatError("geometry file has no header row", 0);
    out.validate();
    return out;
}

GeometryFile read_geometry_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw ValidationError("cannot open geometry file '" + path.string() + "'");
    return read_geometry_csv(is);
}

} // namespace cryombir
