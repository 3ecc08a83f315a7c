#include "cryombir/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <vector>

#include "cryombir/atomic_file.hpp"
#include "cryombir/baseline.hpp"
#include "cryombir/geometry_io.hpp"
#include "cryombir/mrc.hpp"
#include "cryombir/phantom.hpp"
#include "cryombir/report.hpp"
#include "cryombir/settings.hpp"
#include "cryombir/simulation.hpp"
#include "cryombir/solver.hpp"

namespace cryombir {

namespace fs = std::filesystem;

namespace {

std::string flag_name(std::string key) {
    for (char& c : key)
        if (c == '_')
            c = '-';
    return "--" + key;
}

void add_setting_options(CLI::App& app, Settings& s) {
    auto opt = [&](const char* key, auto& member, const char* help) {
        app.add_option(flag_name(key), member, help)->capture_default_str();
    };
    opt("size", s.size, "Volume side length in voxels");
    app.add_option("--phantom", s.phantom, "Phantom kind")
        ->check(CLI::IsMember({"spheres", "shells", "blobs"}))
        ->capture_default_str();
    opt("seed", s.seed, "Random seed for phantom geometry, noise and subsets");
    opt("psnr", s.psnr, "Measurement PSNR in dB");
    opt("noise", s.noise, "Add measurement noise (true/false)");
    opt("n_views", s.n_views, "Number of simulated views (0: twice the side length)");
    opt("offset_fraction", s.offset_fraction, "Maximum in-plane offset as a fraction of the side length");
    opt("subsample", s.subsample, "Fraction of views kept");
    opt("ctf", s.ctf, "Apply the CTF (true/false)");
    opt("alpha", s.alpha, "CTF attenuation coefficient");
    opt("dz_lambda", s.dz_lambda, "CTF defocus term dz*lambda");
    opt("cs_lambda3", s.cs_lambda3, "CTF aberration term Cs*lambda^3");
    opt("step_size", s.step_size, "Ray sampling interval in voxels");
    opt("p", s.p, "qGGMRF shape p in [1, 2]");
    opt("c", s.c, "qGGMRF transition constant");
    opt("sigma_f", s.sigma_f, "qGGMRF scale");
    opt("neighborhood", s.neighborhood, "Prior neighborhood: 26 or 6");
    opt("max_iters", s.max_iters, "Maximum OGM iterations");
    opt("rel_cost_tol", s.rel_cost_tol, "Relative cost plateau threshold");
    opt("lipschitz_power_iters", s.lipschitz_power_iters, "Power iterations for the Lipschitz estimate");
    opt("lipschitz_safety", s.lipschitz_safety, "Lipschitz safety factor");
    opt("record_cost_every", s.record_cost_every, "Cost history stride");
    opt("gaussian_sigma", s.gaussian_sigma, "P+R low-pass width in cycles/pixel");
    opt("cgls_iters", s.cgls_iters, "P+R CGLS iterations");
    opt("cgls_tol", s.cgls_tol, "P+R CGLS relative residual threshold");
}

// The config file supplies defaults; flags parsed afterwards override them.
std::optional<fs::path> find_config(std::span<const std::string> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            return fs::path(args[i + 1]);
        if (args[i].rfind("--config=", 0) == 0)
            return fs::path(args[i].substr(9));
    }
    return std::nullopt;
}

GeometryFile load_geometry(const fs::path& path) { return read_geometry_csv(path); }

std::vector<CtfFilter> filters_for(const GeometryFile& geometry, int width, int height, bool apply_ctf) {
    std::vector<CtfFilter> table;
    for (const auto& p : geometry.ctf_table)
        table.push_back(apply_ctf ? build_filter(width, height, p) : CtfFilter::identity(width, height));
    return table;
}

fs::path sidecar_path(const fs::path& volume_path) {
    fs::path p = volume_path;
    p += ".json";
    return p;
}

int run_simulate(const Settings& s, const fs::path& out_dir, std::ostream& out) {
    const SimulationSpec spec = s.simulation_spec();
    fs::create_directories(out_dir);
    const GroundTruth truth = make_phantom(spec.grid, parse_phantom_kind(s.phantom), s.seed);
    const SimulatedData data = synthesize(spec, truth);

    write_mrc(out_dir / "truth.mrc", truth.volume);
    write_mrc_stack(out_dir / "stack.mrc", data.stack);
    MrcArray weights{data.stack.width(), data.stack.height(), static_cast<int>(data.stack.n_views()), 1.0, {}};
    for (double w : data.weights.data())
        weights.data.push_back(static_cast<float>(w));
    write_mrc_array(out_dir / "weights.mrc", weights, true);
    write_geometry_csv(out_dir / "geometry.csv", GeometryFile{data.stack.views(), data.ctf_params});

    out << "simulated " << data.stack.n_views() << " views of " << spec.grid.nx << "^3 '" << s.phantom
        << "' phantom: peak " << data.peak << ", noise sigma " << data.sigma << '\n';
    out << "wrote truth.mrc stack.mrc weights.mrc geometry.csv to " << out_dir.string() << '\n';
    return 0;
}

struct ReconstructArgs {
    std::string method{"mbir"};
    fs::path stack, geometry, weights, out, csv, truth, init;
};

int run_reconstruct(const Settings& s, const ReconstructArgs& a, std::ostream& out) {
    const GeometryFile geometry = load_geometry(a.geometry);
    const ProjectionStack stack = read_mrc_stack(a.stack, geometry.views);
    if (stack.width() != stack.height())
        throw ValidationError("projection images must be square");
    const GridSpec grid = GridSpec::cube(stack.width());
    const auto table = filters_for(geometry, stack.width(), stack.height(), s.ctf);
    const ProjectorConfig projector = s.projector();

    DiagonalWeights weights = DiagonalWeights::uniform(stack.data().size(), 1.0);
    if (!a.weights.empty()) {
        const MrcArray w = read_mrc_array(a.weights);
        if (w.nx != stack.width() || w.ny != stack.height() || static_cast<std::size_t>(w.nz) != stack.n_views())
            throw ValidationError("weights '" + a.weights.string() + "' do not match the stack shape");
        weights = DiagonalWeights(std::vector<double>(w.data.begin(), w.data.end()));
    }

    nlohmann::json info;
    info["method"] = a.method;
    info["settings"] = s.to_map();
    const auto t0 = std::chrono::steady_clock::now();
    Volume result;
    if (a.method == "mbir") {
        Volume f0(grid);
        if (!a.init.empty()) {
            f0 = read_mrc(a.init);
            if (!(f0.grid().nx == grid.nx && f0.grid().ny == grid.ny && f0.grid().nz == grid.nz))
                throw ValidationError("initial volume does not match the stack size");
            f0 = Volume(grid, std::vector<double>(f0.data().begin(), f0.data().end()));
        }
        const MbirProblem problem{stack, weights, table, grid, s.prior(), projector};
        const OgmResult r = ogm_minimize(problem, f0, s.solver());
        result = r.estimate;
        info["iterations"] = r.iterations;
        info["best_iteration"] = r.best_iteration;
        info["best_cost"] = r.best_cost;
        info["lipschitz"] = r.lipschitz;
        info["step_halvings"] = r.step_halvings;
        if (!a.csv.empty())
            write_file_atomically(a.csv, [&](std::ofstream& os) { write_cost_history_csv(os, r.history); });
        out << "mbir: " << r.iterations << " iterations, best cost " << r.best_cost << " at iteration "
            << r.best_iteration << '\n';
    } else if (a.method == "pr") {
        if (!a.truth.empty()) {
            const Volume truth = read_mrc(a.truth);
            const PrTuningResult tuned = tune_pr(stack, table, truth, kPrSigmaGrid, kPrIterationGrid, projector);
            result = tuned.best_estimate;
            info["gaussian_sigma"] = tuned.best_config.gaussian_sigma;
            info["cgls_iters"] = tuned.best_config.cgls_iters;
            info["tuned_nrmse_percent"] = tuned.best_nrmse;
            if (!a.csv.empty())
                write_file_atomically(a.csv, [&](std::ofstream& os) {
                    os << "gaussian_sigma,cgls_iters,nrmse_percent\n" << std::setprecision(10);
                    for (const auto& e : tuned.entries)
                        os << e.gaussian_sigma << ',' << e.cgls_iters << ',' << e.nrmse_percent << '\n';
                });
            out << "pr: tuned sigma " << tuned.best_config.gaussian_sigma << ", " << tuned.best_config.cgls_iters
                << " CGLS iterations\n";
        } else {
            result = pr_reconstruct(stack, table, grid, s.baseline(), projector);
            info["gaussian_sigma"] = s.gaussian_sigma;
            info["cgls_iters"] = s.cgls_iters;
            out << "pr: sigma " << s.gaussian_sigma << ", " << s.cgls_iters << " CGLS iterations\n";
        }
    } else {
        throw ValidationError("unknown method '" + a.method + "' (mbir or pr)");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    info["wall_seconds"] = seconds;

    write_mrc(a.out, result);
    write_file_atomically(sidecar_path(a.out), [&](std::ofstream& os) { os << info.dump(2) << '\n'; });
    out << "wrote " << a.out.string() << " (" << std::fixed << std::setprecision(2) << seconds << " s)\n";
    return 0;
}

struct EvaluateArgs {
    fs::path truth;
    std::vector<std::string> estimates; // method=path
    std::string dataset;
    fs::path report;
};

int run_evaluate(const Settings& s, const EvaluateArgs& a, std::ostream& out) {
    const Volume truth = read_mrc(a.truth);
    const std::string dataset = a.dataset.empty() ? a.truth.stem().string() : a.dataset;
    std::vector<ReportRow> rows;
    std::map<std::string, double> by_method;
    for (const auto& spec : a.estimates) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw ValidationError("--estimate expects method=path, got '" + spec + "'");
        const std::string method = spec.substr(0, eq);
        const fs::path path = spec.substr(eq + 1);
        const Volume estimate = read_mrc(path);
        if (!(estimate.grid().nx == truth.grid().nx && estimate.grid().ny == truth.grid().ny &&
              estimate.grid().nz == truth.grid().nz))
            throw ValidationError("estimate '" + path.string() + "' and truth have different dimensions");
        const Volume aligned(truth.grid(), std::vector<double>(estimate.data().begin(), estimate.data().end()));
        const double e = nrmse_percent(aligned, truth);
        double seconds = 0.0;
        if (fs::exists(sidecar_path(path))) {
            std::ifstream is(sidecar_path(path));
            const auto info = nlohmann::json::parse(is, nullptr, false);
            if (!info.is_discarded() && info.contains("wall_seconds"))
                seconds = info["wall_seconds"].get<double>();
        }
        rows.push_back(ReportRow{dataset, s.noise ? s.psnr : INFINITY, s.subsample, method, e, seconds});
        by_method[method] = e;
        out << method << " NRMSE " << std::fixed << std::setprecision(2) << e << "%\n";
    }
    if (by_method.count("pr") && by_method.count("mbir"))
        out << "P+R|MBIR  " << format_table_row(dataset, by_method["pr"], by_method["mbir"]) << '\n';
    if (!a.report.empty())
        append_report_csv(a.report, rows);
    return 0;
}

struct ProjectArgs {
    fs::path volume, out;
    std::string axis{"z"};
    int slice{-1};
};

int run_project(const ProjectArgs& a, std::ostream& out) {
    const Volume v = read_mrc(a.volume);
    const SliceAxis axis = a.axis == "x" ? SliceAxis::x : a.axis == "y" ? SliceAxis::y : SliceAxis::z;
    const int depth = axis == SliceAxis::x ? v.grid().nx : axis == SliceAxis::y ? v.grid().ny : v.grid().nz;
    const int index = a.slice < 0 ? depth / 2 : a.slice;
    write_pgm(a.out, volume_slice(v, axis, index));
    out << "wrote " << a.axis << "=" << index << " cross-section to " << a.out.string() << '\n';
    return 0;
}

struct CtfPlotArgs {
    int samples{501};
    double k_max{0.5};
    fs::path out;
};

int run_ctf_plot(const Settings& s, const CtfPlotArgs& a, std::ostream& out) {
    if (a.samples < 2)
        throw ValidationError("--samples must be >= 2");
    const CtfParams params{s.alpha, s.dz_lambda, s.cs_lambda3};
    params.validate();
    auto emit = [&](std::ostream& os) {
        os << "k,h\n" << std::setprecision(17);
        for (int i = 0; i < a.samples; ++i) {
            const double k = a.k_max * i / (a.samples - 1);
            os << k << ',' << ctf_transfer(k, params) << '\n';
        }
    };
    if (a.out.empty()) {
        emit(out);
    } else {
        write_file_atomically(a.out, [&](std::ofstream& os) { emit(os); });
        out << "wrote " << a.samples << " CTF samples to " << a.out.string() << '\n';
    }
    return 0;
}

} // namespace

int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    Settings settings;
    try {
        if (const auto config = find_config(args))
            settings.apply_file(*config);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    CLI::App app{"Cryo-EM single particle reconstruction: MBIR with a CTF-aware forward model and qGGMRF prior",
                 "cryombir"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    std::string config_path;
    bool dump_config = false;
    app.add_option("--config", config_path, "Configuration file of 'key = value' lines");
    app.add_flag("--dump-config", dump_config, "Print every configuration key with its effective value and exit");
    add_setting_options(app, settings);

    fs::path sim_out{"."};
    auto* simulate = app.add_subcommand("simulate", "Simulate a phantom and its noisy CTF-filtered projections");
    simulate->add_option("-o,--out-dir", sim_out, "Output directory")->capture_default_str();

    ReconstructArgs rec;
    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a volume from a projection stack");
    reconstruct->add_option("--method", rec.method, "mbir or pr")
        ->check(CLI::IsMember({"mbir", "pr"}))
        ->capture_default_str();
    reconstruct->add_option("--stack", rec.stack, "Projection stack (MRC)")->required();
    reconstruct->add_option("--geometry", rec.geometry, "Geometry CSV")->required();
    reconstruct->add_option("--weights", rec.weights, "Per-pixel weights (MRC); default all ones");
    reconstruct->add_option("-o,--out", rec.out, "Output volume (MRC)")->required();
    reconstruct->add_option("--csv", rec.csv, "Cost history (mbir) or tuning grid (pr) CSV");
    reconstruct->add_option("--truth", rec.truth, "Reference volume; with --method pr, tunes the baseline against it");
    reconstruct->add_option("--init", rec.init, "Initial volume for mbir (MRC)");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "NRMSE of reconstructions against a reference");
    evaluate->add_option("--truth", ev.truth, "Reference volume (MRC)")->required();
    evaluate->add_option("--estimate", ev.estimates, "method=path of a reconstruction (repeatable)")->required();
    evaluate->add_option("--dataset", ev.dataset, "Dataset label for the report");
    evaluate->add_option("--report", ev.report, "Report CSV to append to");

    ProjectArgs pj;
    auto* project = app.add_subcommand("project", "Render a volume cross-section as a PGM image");
    project->add_option("--volume", pj.volume, "Volume (MRC)")->required();
    project->add_option("--axis", pj.axis, "Slice normal: x, y or z")
        ->check(CLI::IsMember({"x", "y", "z"}))
        ->capture_default_str();
    project->add_option("--slice", pj.slice, "Slice index (default: middle)");
    project->add_option("-o,--out", pj.out, "Output PGM")->required();

    CtfPlotArgs cp;
    auto* ctf_plot = app.add_subcommand("ctf-plot", "Tabulate the radial CTF as CSV");
    ctf_plot->add_option("--samples", cp.samples, "Number of samples")->capture_default_str();
    ctf_plot->add_option("--k-max", cp.k_max, "Largest radial frequency, cycles/pixel")->capture_default_str();
    ctf_plot->add_option("-o,--out", cp.out, "Output CSV (default: stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        if (dump_config) {
            settings.dump(out);
            return 0;
        }
        if (simulate->parsed())
            return run_simulate(settings, sim_out, out);
        if (reconstruct->parsed())
            return run_reconstruct(settings, rec, out);
        if (evaluate->parsed())
            return run_evaluate(settings, ev, out);
        if (project->parsed())
            return run_project(pj, out);
        if (ctf_plot->parsed())
            return run_ctf_plot(settings, cp, out);
        err << app.help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace cryombir
