#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "cryombir/geometry_io.hpp"
#include "cryombir/mrc.hpp"
#include "cryombir/phantom.hpp"
#include "cryombir/report.hpp"
#include "cryombir/settings.hpp"
#include "cryombir/simulation.hpp"

using namespace cryombir;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cryombir_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void patch_int(const fs::path& p, std::size_t offset, std::int32_t value) {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(reinterpret_cast<const char*>(&value), 4);
}

std::int32_t header_int(const std::vector<char>& bytes, std::size_t offset) {
    std::int32_t v;
    std::memcpy(&v, bytes.data() + offset, 4);
    return v;
}

} // namespace

TEST_CASE("phantoms") {
    const GridSpec g = GridSpec::cube(24);
    for (PhantomKind kind : {PhantomKind::spheres, PhantomKind::shells, PhantomKind::blobs}) {
        const GroundTruth t = make_phantom(g, kind, 5);
        CHECK(t.volume.max() == 1.0);
        CHECK(t.max_density == 1.0);
        double mass = 0.0;
        for (int z = 0; z < 24; ++z)
            for (int y = 0; y < 24; ++y)
                for (int x = 0; x < 24; ++x) {
                    const double v = t.volume.at(x, y, z);
                    CHECK(v >= 0.0);
                    mass += v;
                    if (x == 0 || y == 0 || z == 0 || x == 23 || y == 23 || z == 23)
                        CHECK(v == 0.0);
                }
        CHECK(mass > 0.0);
        const GroundTruth again = make_phantom(g, kind, 5);
        CHECK(std::equal(t.volume.data().begin(), t.volume.data().end(), again.volume.data().begin()));
        CHECK(parse_phantom_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS((void)parse_phantom_kind("cubes"), ValidationError);
}

TEST_CASE("orientation angles are uniform") {
    SimulationSpec spec = SimulationSpec::for_grid(GridSpec::cube(100));
    spec.n_views = 100000;
    spec.seed = 3;
    const auto views = sample_geometry(spec);
    REQUIRE(views.size() == 100000);
    for (auto pick : {+[](const ViewGeometry& v) { return v.euler.phi; }, +[](const ViewGeometry& v) { return v.euler.psi; }}) {
        std::vector<double> u;
        u.reserve(views.size());
        for (const auto& v : views)
            u.push_back(pick(v) / (2 * std::numbers::pi));
        std::sort(u.begin(), u.end());
        double ks = 0.0;
        const double n = static_cast<double>(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            ks = std::max({ks, (i + 1) / n - u[i], u[i] - i / n});
        CHECK(ks < 0.01);
        CHECK(u.front() >= 0.0);
        CHECK(u.back() < 1.0);
    }
    double max_offset = 0.0, min_offset = 1e9;
    for (const auto& v : views) {
        max_offset = std::max({max_offset, v.offset.tx, v.offset.ty});
        min_offset = std::min({min_offset, v.offset.tx, v.offset.ty});
    }
    CHECK(max_offset <= 5.0);
    CHECK(min_offset >= 0.0);
    CHECK(max_offset > 4.9);

    spec.offset_fraction = 0.0;
    spec.n_views = 50;
    for (const auto& v : sample_geometry(spec)) {
        CHECK(v.offset.tx == 0.0);
        CHECK(v.offset.ty == 0.0);
    }
}

TEST_CASE("noise level from psnr") {
    CHECK(sigma_from_psnr(1.0, 0.0) == 1.0);
    CHECK(sigma_from_psnr(1.0, 6.02) == doctest::Approx(0.50003).epsilon(1e-5));
    CHECK(sigma_from_psnr(2.0, 6.02) == 2.0 * sigma_from_psnr(1.0, 6.02));
    CHECK(sigma_from_psnr(1.0, kNoiseDisabled) == 0.0);
    CHECK(psnr_db(3.0, sigma_from_psnr(3.0, 2.40)) == doctest::Approx(2.40).epsilon(1e-12));
}

TEST_CASE("synthesized noise matches its target") {
    const GridSpec g = GridSpec::cube(32);
    const GroundTruth truth = make_phantom(g, PhantomKind::spheres, 2);
    for (double level : {0.0, 2.40, 6.02}) {
        SimulationSpec spec = SimulationSpec::for_grid(g);
        spec.n_views = 100;
        spec.psnr_db = level;
        spec.seed = 4;
        const SimulatedData d = synthesize(spec, truth);
        REQUIRE(d.stack.data().size() >= 100000);
        double peak = 0.0;
        for (double x : d.clean.data())
            peak = std::max(peak, std::abs(x));
        CHECK(d.peak == peak);
        CHECK(d.sigma == doctest::Approx(sigma_from_psnr(peak, level)).epsilon(1e-15));
        double sum = 0.0, sq = 0.0;
        const double n = static_cast<double>(d.stack.data().size());
        for (std::size_t i = 0; i < d.stack.data().size(); ++i) {
            const double e = d.stack.data()[i] - d.clean.data()[i];
            sum += e;
            sq += e * e;
        }
        const double std_dev = std::sqrt(sq / n - (sum / n) * (sum / n));
        CHECK(std::abs(std_dev / d.sigma - 1.0) < 0.02);
        CHECK(d.weights.data()[0] == doctest::Approx(1.0 / (d.sigma * d.sigma)));
    }

    SimulationSpec quiet = SimulationSpec::for_grid(g);
    quiet.n_views = 4;
    quiet.psnr_db = kNoiseDisabled;
    const SimulatedData d = synthesize(quiet, truth);
    CHECK(std::equal(d.stack.data().begin(), d.stack.data().end(), d.clean.data().begin()));
    CHECK(d.weights.data()[0] == 1.0);
}

TEST_CASE("view subsets") {
    const auto half = subsample_indices(200, 0.5, 9);
    CHECK(half.size() == 100);
    CHECK(std::is_sorted(half.begin(), half.end()));
    CHECK(std::adjacent_find(half.begin(), half.end()) == half.end());
    const auto quarter = subsample_indices(200, 0.25, 9);
    CHECK(quarter.size() == 50);
    CHECK(std::includes(half.begin(), half.end(), quarter.begin(), quarter.end()));
    CHECK(subsample_indices(200, 1.0, 9).size() == 200);

    const GridSpec g = GridSpec::cube(12);
    const GroundTruth truth = make_phantom(g, PhantomKind::blobs, 1);
    SimulationSpec spec = SimulationSpec::for_grid(g);
    spec.seed = 21;
    const SimulatedData full = synthesize(spec, truth);
    spec.subsample_fraction = 0.5;
    const SimulatedData sub = synthesize(spec, truth);
    REQUIRE(sub.stack.n_views() == full.stack.n_views() / 2);
    for (std::size_t i = 0; i < sub.retained_views.size(); ++i) {
        const std::size_t j = sub.retained_views[i];
        const auto a = sub.stack.image(i);
        const auto b = full.stack.image(j);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
        CHECK(sub.stack.views()[i].euler.phi == full.stack.views()[j].euler.phi);
    }
}

TEST_CASE("identical seeds give identical datasets") {
    const GridSpec g = GridSpec::cube(16);
    const GroundTruth truth = make_phantom(g, PhantomKind::shells, 3);
    SimulationSpec spec = SimulationSpec::for_grid(g);
    spec.seed = 77;
    spec.subsample_fraction = 0.5;
    const SimulatedData a = synthesize(spec, truth), b = synthesize(spec, truth);
    CHECK(std::equal(a.stack.data().begin(), a.stack.data().end(), b.stack.data().begin()));
    CHECK(a.retained_views == b.retained_views);
    spec.seed = 78;
    const SimulatedData c = synthesize(spec, truth);
    CHECK_FALSE(std::equal(a.stack.data().begin(), a.stack.data().end(), c.stack.data().begin()));
}

TEST_CASE("MRC round trip and header") {
    const fs::path dir = scratch_dir("mrc");
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    Volume v(GridSpec::cube(16, 1.25));
    for (auto& x : v.data())
        x = static_cast<float>(normal(rng));
    write_mrc(dir / "v.mrc", v);
    const Volume back = read_mrc(dir / "v.mrc");
    CHECK(back.grid() == v.grid());
    CHECK(std::equal(v.data().begin(), v.data().end(), back.data().begin()));

    const auto bytes = slurp(dir / "v.mrc");
    CHECK(bytes.size() == 1024 + 4 * 4096);
    CHECK(header_int(bytes, 0) == 16);
    CHECK(header_int(bytes, 4) == 16);
    CHECK(header_int(bytes, 8) == 16);
    CHECK(header_int(bytes, 12) == 2);
    CHECK(std::string(bytes.data() + 208, 4) == "MAP ");
    CHECK(static_cast<unsigned char>(bytes[212]) == 0x44);

    // Writing what was read reproduces the file bitwise.
    write_mrc(dir / "w.mrc", back);
    CHECK(slurp(dir / "w.mrc") == bytes);
    CHECK_FALSE(fs::exists(dir / "w.mrc.tmp"));

    fs::copy_file(dir / "v.mrc", dir / "mode.mrc");
    patch_int(dir / "mode.mrc", 12, 1);
    try {
        (void)read_mrc(dir / "mode.mrc");
        FAIL("mode 1 accepted");
    } catch (const FormatError& e) {
        CHECK(e.byte_offset() == 12);
    }

    fs::copy_file(dir / "v.mrc", dir / "short.mrc");
    fs::resize_file(dir / "short.mrc", 1024 + 100);
    CHECK_THROWS_AS((void)read_mrc(dir / "short.mrc"), FormatError);
    fs::resize_file(dir / "short.mrc", 500);
    CHECK_THROWS_AS((void)read_mrc(dir / "short.mrc"), FormatError);

    fs::copy_file(dir / "v.mrc", dir / "magic.mrc");
    patch_int(dir / "magic.mrc", 208, 0);
    try {
        (void)read_mrc(dir / "magic.mrc");
        FAIL("bad magic accepted");
    } catch (const FormatError& e) {
        CHECK(e.byte_offset() == 208);
    }

    ProjectionStack s(16, 16, std::vector<ViewGeometry>(3));
    for (auto& x : s.data())
        x = static_cast<float>(normal(rng));
    write_mrc_stack(dir / "s.mrcs", s);
    const ProjectionStack sb = read_mrc_stack(dir / "s.mrcs", std::vector<ViewGeometry>(3));
    CHECK(std::equal(s.data().begin(), s.data().end(), sb.data().begin()));
    CHECK_THROWS_AS((void)read_mrc_stack(dir / "s.mrcs", std::vector<ViewGeometry>(4)), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("geometry CSV round trip") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(-10.0, 10.0);
    GeometryFile geo;
    geo.ctf_table = {CtfParams{}, CtfParams{0.5, 80.123456789012345, 7.0000000000000009}};
    for (int i = 0; i < 50; ++i) {
        ViewGeometry v;
        v.euler = {unit(rng), unit(rng), unit(rng) * 1e-300};
        v.offset = {unit(rng), unit(rng)};
        v.ctf_index = i % 2;
        geo.views.push_back(v);
    }
    std::stringstream ss;
    write_geometry_csv(ss, geo);
    CHECK(ss.str().rfind("index,phi,theta,psi,tx,ty,ctf_index\n", 0) == 0);
    const GeometryFile back = read_geometry_csv(ss);
    REQUIRE(back.views.size() == geo.views.size());
    for (std::size_t i = 0; i < geo.views.size(); ++i) {
        CHECK(back.views[i].euler.phi == geo.views[i].euler.phi);
        CHECK(back.views[i].euler.theta == geo.views[i].euler.theta);
        CHECK(back.views[i].euler.psi == geo.views[i].euler.psi);
        CHECK(back.views[i].offset.tx == geo.views[i].offset.tx);
        CHECK(back.views[i].offset.ty == geo.views[i].offset.ty);
        CHECK(back.views[i].ctf_index == geo.views[i].ctf_index);
    }
    CHECK(back.ctf_table == geo.ctf_table);

    std::stringstream bad("index,phi,theta,psi,tx,ty,ctf_index\n0,1,2,x,4,5,0\n# ctf 0 1 100 10\n");
    CHECK_THROWS_AS((void)read_geometry_csv(bad), FormatError);
    std::stringstream missing_ctf("index,phi,theta,psi,tx,ty,ctf_index\n0,1,2,3,4,5,1\n# ctf 0 1 100 10\n");
    CHECK_THROWS_AS((void)read_geometry_csv(missing_ctf), ValidationError);
}

TEST_CASE("settings") {
    Settings s;
    s.set("sigma_f", "0.25");
    s.set("neighborhood", "6");
    CHECK(s.prior().sigma_f == 0.25);
    CHECK(s.prior().neighborhood == Neighborhood::k6);
    CHECK_THROWS_AS(s.set("bogus", "1"), ValidationError);
    CHECK_THROWS_AS(s.set("max_iters", "many"), ValidationError);

    std::istringstream cfg("# comment\nsize = 16\n  psnr=2.40  # trailing\nnoise = false\n");
    s.apply(cfg);
    CHECK(s.size == 16);
    CHECK(s.psnr == 2.40);
    CHECK(std::isinf(s.simulation_spec().psnr_db));
    CHECK(s.simulation_spec().n_views == 32);

    std::ostringstream dumped;
    s.dump(dumped);
    Settings t;
    std::istringstream in(dumped.str());
    t.apply(in);
    CHECK(t.to_map() == s.to_map());
}

TEST_CASE("report helpers") {
    CHECK(format_table_row("spheres", 6.654, 3.756) == "spheres  6.65|3.76");
    const fs::path dir = scratch_dir("report");
    const std::vector<ReportRow> rows{{"a", 6.02, 0.5, "mbir", 3.5, 1.25}, {"a", 6.02, 0.5, "pr", 6.5, 0.5}};
    append_report_csv(dir / "r.csv", rows);
    append_report_csv(dir / "r.csv", std::span(rows).first(1));
    const auto back = read_report_csv(dir / "r.csv");
    REQUIRE(back.size() == 3);
    CHECK(back[1].method == "pr");
    CHECK(back[2].nrmse_percent == 3.5);

    Volume v(GridSpec{3, 4, 5});
    v.at(1, 2, 3) = 7.0;
    const Image img = volume_slice(v, SliceAxis::z, 3);
    CHECK(img.width == 3);
    CHECK(img.height == 4);
    CHECK(img.pixels[1 + 3 * 2] == 7.0);
    write_pgm(dir / "s.pgm", img);
    const auto pgm = slurp(dir / "s.pgm");
    CHECK(std::string(pgm.data(), 2) == "P5");
    CHECK(static_cast<unsigned char>(pgm.back()) == 0);
    fs::remove_all(dir);
}
