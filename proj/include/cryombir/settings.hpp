#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "cryombir/baseline.hpp"
#include "cryombir/prior.hpp"
#include "cryombir/projector.hpp"
#include "cryombir/simulation.hpp"
#include "cryombir/solver.hpp"

namespace cryombir {

/// Every tunable of the command line tool. Each field has a config-file key of
/// the same name; the matching command-line flag uses dashes for underscores.
struct Settings {
    // simulation
    int size{32};
    std::string phantom{"spheres"};
    std::uint64_t seed{1};
    double psnr{6.02};
    bool noise{true};
    int n_views{0}; // 0 means 2 * size
    double offset_fraction{0.05};
    double subsample{1.0};
    bool ctf{true};
    double alpha{1.0};
    double dz_lambda{100.0};
    double cs_lambda3{10.0};

    // projector
    double step_size{1.0};

    // MBIR
    double p{1.2};
    double c{1.0};
    double sigma_f{0.1};
    int neighborhood{26};
    int max_iters{200};
    double rel_cost_tol{1e-7};
    int lipschitz_power_iters{20};
    double lipschitz_safety{1.05};
    int record_cost_every{1};

    // pre-process + reconstruct
    double gaussian_sigma{0.1};
    int cgls_iters{50};
    double cgls_tol{1e-6};

    /// Sets one key from its textual value; unknown keys and unparsable values
    /// throw ValidationError.
    void set(std::string_view key, std::string_view value);
    [[nodiscard]] std::map<std::string, std::string> to_map() const;

    /// Applies `key = value` lines; '#' starts a comment.
    void apply(std::istream& is);
    void apply_file(const std::filesystem::path& path);
    /// All keys, `key = value`, sorted.
    void dump(std::ostream& os) const;

    [[nodiscard]] SimulationSpec simulation_spec() const;
    [[nodiscard]] QggmrfParams prior() const;
    [[nodiscard]] SolverConfig solver() const;
    [[nodiscard]] BaselineConfig baseline() const;
    [[nodiscard]] ProjectorConfig projector() const;
};

} // namespace cryombir
