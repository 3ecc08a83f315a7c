#include "cryombir/settings.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <vector>

namespace cryombir {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <class T>
T parse_value(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw ValidationError("invalid boolean '" + std::string(text) + "' for '" + std::string(key) + "'");
}

std::string show(double v) {
    // shortest text that reads back to the same double
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}
std::string show(int v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }

struct Field {
    std::string_view key;
    std::function<std::string(const Settings&)> get;
    std::function<void(Settings&, std::string_view)> set;
};

template <class T>
Field field(std::string_view key, T Settings::*member) {
    return Field{key, [member](const Settings& s) { return show(s.*member); },
                 [key, member](Settings& s, std::string_view text) {
                     if constexpr (std::is_same_v<T, bool>)
                         s.*member = parse_bool(key, text);
                     else if constexpr (std::is_same_v<T, std::string>)
                         s.*member = std::string(trim(text));
                     else
                         s.*member = parse_value<T>(key, text);
                 }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = {
        field("size", &Settings::size),
        field("phantom", &Settings::phantom),
        field("seed", &Settings::seed),
        field("psnr", &Settings::psnr),
        field("noise", &Settings::noise),
        field("n_views", &Settings::n_views),
        field("offset_fraction", &Settings::offset_fraction),
        field("subsample", &Settings::subsample),
        field("ctf", &Settings::ctf),
        field("alpha", &Settings::alpha),
        field("dz_lambda", &Settings::dz_lambda),
        field("cs_lambda3", &Settings::cs_lambda3),
        field("step_size", &Settings::step_size),
        field("p", &Settings::p),
        field("c", &Settings::c),
        field("sigma_f", &Settings::sigma_f),
        field("neighborhood", &Settings::neighborhood),
        field("max_iters", &Settings::max_iters),
        field("rel_cost_tol", &Settings::rel_cost_tol),
        field("lipschitz_power_iters", &Settings::lipschitz_power_iters),
        field("lipschitz_safety", &Settings::lipschitz_safety),
        field("record_cost_every", &Settings::record_cost_every),
        field("gaussian_sigma", &Settings::gaussian_sigma),
        field("cgls_iters", &Settings::cgls_iters),
        field("cgls_tol", &Settings::cgls_tol),
    };
    return all;
}

} // namespace

void Settings::set(std::string_view key, std::string_view value) {
    for (const auto& f : fields()) {
        if (f.key == key) {
            f.set(*this, value);
            return;
        }
    }
    throw ValidationError("unknown configuration key '" + std::string(key) + "'");
}

std::map<std::string, std::string> Settings::to_map() const {
    std::map<std::string, std::string> out;
    for (const auto& f : fields())
        out.emplace(std::string(f.key), f.get(*this));
    return out;
}

void Settings::apply(std::istream& is) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos)
            text = text.substr(0, hash);
        text = trim(text);
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
}

void Settings::apply_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw ValidationError("cannot open config file '" + path.string() + "'");
    apply(is);
}

void Settings::dump(std::ostream& os) const {
    for (const auto& [k, v] : to_map())
        os << k << " = " << v << '\n';
}

SimulationSpec Settings::simulation_spec() const {
    SimulationSpec spec = SimulationSpec::for_grid(GridSpec::cube(size));
    if (n_views > 0)
        spec.n_views = n_views;
    spec.psnr_db = noise ? psnr : kNoiseDisabled;
    spec.offset_fraction = offset_fraction;
    spec.seed = seed;
    spec.ctf = CtfParams{alpha, dz_lambda, cs_lambda3};
    spec.apply_ctf = ctf;
    spec.subsample_fraction = subsample;
    spec.validate();
    return spec;
}

QggmrfParams Settings::prior() const {
    if (neighborhood != 26 && neighborhood != 6)
        throw ValidationError("neighborhood must be 26 or 6");
    QggmrfParams params{p, c, sigma_f, neighborhood == 26 ? Neighborhood::k26 : Neighborhood::k6};
    params.validate();
    return params;
}

SolverConfig Settings::solver() const {
    SolverConfig cfg;
    cfg.max_iters = max_iters;
    cfg.rel_cost_tol = rel_cost_tol;
    cfg.lipschitz_power_iters = lipschitz_power_iters;
    cfg.lipschitz_safety = lipschitz_safety;
    cfg.record_cost_every = record_cost_every;
    cfg.validate();
    return cfg;
}

BaselineConfig Settings::baseline() const {
    BaselineConfig cfg{gaussian_sigma, cgls_iters, cgls_tol};
    cfg.validate();
    return cfg;
}

ProjectorConfig Settings::projector() const {
    ProjectorConfig cfg;
    cfg.step_size = step_size;
    cfg.validate();
    return cfg;
}

} // namespace cryombir
