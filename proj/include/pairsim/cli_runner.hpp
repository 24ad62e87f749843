#ifndef PAIRSIM_CLI_RUNNER_HPP
#define PAIRSIM_CLI_RUNNER_HPP

// Batch front-end: table1, shg-sweep, jsa, hom and validate.
//
// Parameters are a flat JSON object. They are resolved in order: command
// defaults, named preset, --config file (a manifest or a bare object), then
// individual flags. Everything is validated before any computation starts.
//
// Exit codes: 0 success, 1 computation or validation failure, 2 usage error.

#include <pairsim/data_io.hpp>
#include <pairsim/hom_interference.hpp>
#include <pairsim/shg_transfer.hpp>
#include <pairsim/spdc_jsa.hpp>
#include <pairsim/spectral_core.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pairsim::cli
{
using json = nlohmann::json;

enum ExitCode : int
{
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2
};

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parameter schema

enum class Kind
{
    Number,     // finite double
    OptNumber,  // finite double or null
    Count,      // nonnegative integer
    Seed,       // unsigned 64-bit integer
    Text,
    NumberList,
    Flag
};

inline const std::vector<double> default_tilt_epsilons{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};

struct CommandSchema
{
    std::map<std::string, Kind> kinds;
    json defaults;
};

namespace detail
{
inline json jsa_defaults()
{
    return {{"model", "pump"},     {"pump_sigma", 1.0}, {"kappa_s", 1.0},        {"kappa_i", -0.9},
            {"length", 2.0},       {"grid_span", 16.0}, {"grid_count", 257},     {"pump_phase", "none"},
            {"gamma", 0.1},        {"mode_sigma", 1.0}, {"seed", 42}};
}

inline std::map<std::string, Kind> jsa_kinds()
{
    return {{"model", Kind::Text},       {"pump_sigma", Kind::Number}, {"kappa_s", Kind::Number},
            {"kappa_i", Kind::Number},   {"length", Kind::Number},     {"grid_span", Kind::Number},
            {"grid_count", Kind::Count}, {"pump_phase", Kind::Text},   {"gamma", Kind::Number},
            {"mode_sigma", Kind::Number}, {"seed", Kind::Seed},        {"preset", Kind::Text}};
}
} // namespace detail

inline const CommandSchema& schema_for(const std::string& command)
{
    static const std::map<std::string, CommandSchema> schemas = [] {
        std::map<std::string, CommandSchema> s;
        s["table1"] = {{{"grid_count", Kind::Count},
                        {"grid_span", Kind::Number},
                        {"quadrature_nodes", Kind::Count},
                        {"voigt_gamma_l", Kind::Number},
                        {"seed", Kind::Seed},
                        {"preset", Kind::Text}},
                       {{"grid_count", 1025}, {"grid_span", 16.0}, {"quadrature_nodes", 8192},
                        {"voigt_gamma_l", 1.0}, {"seed", 42}}};
        s["shg-sweep"] = {{{"lineshape", Kind::Text},
                           {"width", Kind::Number},
                           {"gamma_l", Kind::Number},
                           {"grid_span", Kind::Number},
                           {"grid_count", Kind::Count},
                           {"perturbation", Kind::Text},
                           {"epsilons", Kind::NumberList},
                           {"offsets", Kind::NumberList},
                           {"spectra_epsilons", Kind::NumberList},
                           {"spectra_offsets", Kind::NumberList},
                           {"seed", Kind::Seed},
                           {"preset", Kind::Text}},
                          {{"lineshape", "gaussian"},
                           {"width", 1.0},
                           {"gamma_l", 1.0},
                           {"grid_span", 16.0},
                           {"grid_count", 1025},
                           {"perturbation", "tilt"},
                           {"epsilons", default_tilt_epsilons},
                           {"offsets", std::vector<double>{0.0}},
                           {"spectra_epsilons", std::vector<double>{0.1, 0.2, 0.3}},
                           {"spectra_offsets", std::vector<double>{0.0, 0.0, 0.0}},
                           {"seed", 42}}};
        s["jsa"] = {detail::jsa_kinds(), detail::jsa_defaults()};
        auto hom_kinds = detail::jsa_kinds();
        hom_kinds["tau_min"] = Kind::OptNumber;
        hom_kinds["tau_max"] = Kind::OptNumber;
        hom_kinds["tau_count"] = Kind::Count;
        hom_kinds["n_events"] = Kind::Count;
        auto hom_defaults = detail::jsa_defaults();
        hom_defaults["tau_min"] = nullptr;
        hom_defaults["tau_max"] = nullptr;
        hom_defaults["tau_count"] = 401;
        hom_defaults["n_events"] = 1000;
        s["hom"] = {hom_kinds, hom_defaults};
        s["validate"] = {{{"seed", Kind::Seed},
                          {"realizations", Kind::Count},
                          {"grid_count", Kind::Count},
                          {"corrupt_normalization", Kind::Flag},
                          {"preset", Kind::Text}},
                         {{"seed", 42}, {"realizations", 10000}, {"grid_count", 257},
                          {"corrupt_normalization", false}}};
        return s;
    }();
    const auto it = schemas.find(command);
    if (it == schemas.end())
        throw UsageError("unknown command '" + command + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Presets

struct Preset
{
    std::vector<std::string> commands;
    json parameters;
    const char* summary;
};

inline const std::map<std::string, Preset>& presets()
{
    static const std::map<std::string, Preset> p = {
        {"table1", {{"table1"}, json::object(), "sensitivity coefficients C1, C2 for three lineshapes"}},
        {"fig1b-tilt",
         {{"shg-sweep"},
          {{"lineshape", "gaussian"},
           {"perturbation", "tilt"},
           {"epsilons", default_tilt_epsilons},
           {"offsets", std::vector<double>{0.0}},
           {"spectra_epsilons", std::vector<double>{0.1, 0.2, 0.3}},
           {"spectra_offsets", std::vector<double>{0.0, 0.0, 0.0}}},
          "Gaussian pump, linear tilt, TVD versus epsilon"}},
        {"fig1cf-offset",
         {{"shg-sweep"},
          {{"lineshape", "gaussian"},
           {"perturbation", "offset"},
           {"epsilons", default_tilt_epsilons},
           {"offsets", std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0}},
           {"spectra_epsilons", std::vector<double>{0.15, 0.3}},
           {"spectra_offsets", std::vector<double>{3.0, 6.0}}},
          "Gaussian pump plus offset satellite, TVD over (epsilon, b)"}},
        {"fig3-narrow",
         {{"jsa", "hom"},
          {{"model", "pump"}, {"pump_sigma", 0.2}, {"kappa_s", 1.0}, {"kappa_i", -0.9}, {"length", 2.0}},
          "narrow pump (0.2 units, 200 GHz at 1 unit = 1 THz)"}},
        {"fig3-broad",
         {{"jsa", "hom"},
          {{"model", "pump"}, {"pump_sigma", 1.0}, {"kappa_s", 1.0}, {"kappa_i", -0.9}, {"length", 2.0}},
          "broad pump (1 unit, 1 THz)"}},
        {"narrow-pump",
         {{"jsa", "hom"},
          {{"model", "pump"}, {"pump_sigma", 0.2}, {"kappa_s", 1.0}, {"kappa_i", -0.9}, {"length", 2.0}},
          "same as fig3-narrow"}},
        {"broad-pump",
         {{"jsa", "hom"},
          {{"model", "pump"}, {"pump_sigma", 1.0}, {"kappa_s", 1.0}, {"kappa_i", -0.9}, {"length", 2.0}},
          "same as fig3-broad"}},
        {"near-experimental",
         {{"jsa", "hom"},
          {{"model", "pump"}, {"pump_sigma", 1.0}, {"kappa_s", 1.0}, {"kappa_i", -0.9}, {"length", 2.0}},
          "slightly asymmetric phase matching with a broad pump"}},
        {"symmetric",
         {{"jsa", "hom"},
          {{"model", "pump"}, {"pump_sigma", 0.5}, {"kappa_s", 1.0}, {"kappa_i", -1.0}, {"length", 2.0}},
          "exchange-symmetric phase matching"}},
        {"gamma-0.1",
         {{"jsa", "hom"},
          {{"model", "hermite_gauss"}, {"gamma", 0.1}, {"mode_sigma", 1.0}},
          "Hermite-Gauss mixture with antisymmetric weight 0.1"}},
    };
    return p;
}

// ---------------------------------------------------------------------------
// Resolution and validation

namespace detail
{
inline void check_kind(const std::string& key, const json& v, Kind kind)
{
    auto finite = [&](const json& x) { return x.is_number() && std::isfinite(x.get<double>()); };
    bool ok = false;
    switch (kind) {
    case Kind::Number: ok = finite(v); break;
    case Kind::OptNumber: ok = v.is_null() || finite(v); break;
    case Kind::Count:
    case Kind::Seed: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case Kind::Text: ok = v.is_string(); break;
    case Kind::Flag: ok = v.is_boolean(); break;
    case Kind::NumberList: ok = v.is_array() && std::all_of(v.begin(), v.end(), finite); break;
    }
    if (!ok)
        throw UsageError("parameter '" + key + "' has the wrong type");
}

inline void merge(json& into, const json& patch, const CommandSchema& schema, const std::string& origin)
{
    for (const auto& [key, value] : patch.items()) {
        const auto kind = schema.kinds.find(key);
        if (kind == schema.kinds.end())
            throw UsageError(origin + ": unknown parameter '" + key + "'");
        check_kind(key, value, kind->second);
        into[key] = value;
    }
}
} // namespace detail

// Flat parameter object for a command; flags are given as a JSON patch.
inline json resolve_parameters(const std::string& command, const std::optional<std::string>& preset_flag,
                               const std::optional<std::filesystem::path>& config_path, const json& flag_patch)
{
    const auto& schema = schema_for(command);
    json params = schema.defaults;

    json config = json::object();
    if (config_path) {
        json file;
        try {
            file = json::parse(pairsim::detail::read_text(*config_path));
        } catch (const std::exception& e) {
            throw UsageError("cannot read config " + config_path->string() + ": " + e.what());
        }
        if (!file.is_object())
            throw UsageError("config must be a JSON object");
        if (file.contains("parameters")) {
            if (file.contains("scenario") && file["scenario"] != command)
                throw UsageError("config was written by '" + file["scenario"].get<std::string>() +
                                 "', not '" + command + "'");
            config = file["parameters"];
            if (!config.is_object())
                throw UsageError("config 'parameters' must be an object");
        } else {
            config = file;
        }
    }

    std::optional<std::string> preset = preset_flag;
    if (!preset && config.contains("preset") && config["preset"].is_string())
        preset = config["preset"].get<std::string>();
    if (preset) {
        const auto it = presets().find(*preset);
        if (it == presets().end())
            throw UsageError("unknown preset '" + *preset + "'");
        const auto& cmds = it->second.commands;
        if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
            throw UsageError("preset '" + *preset + "' does not apply to '" + command + "'");
        detail::merge(params, it->second.parameters, schema, "preset");
        params["preset"] = *preset;
    }
    detail::merge(params, config, schema, "config");
    detail::merge(params, flag_patch, schema, "flag");
    if (preset)
        params["preset"] = *preset;
    return params;
}

namespace detail
{
inline double number(const json& p, const char* key)
{
    return p.at(key).get<double>();
}

inline std::size_t count(const json& p, const char* key)
{
    return p.at(key).get<std::size_t>();
}

inline std::vector<double> list(const json& p, const char* key)
{
    return p.at(key).get<std::vector<double>>();
}

template <typename Fn>
auto usage_checked(Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

inline FrequencyGrid grid_from(const json& p)
{
    return usage_checked([&] { return FrequencyGrid(0.0, number(p, "grid_span"), count(p, "grid_count")); });
}

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw UsageError(message);
}
} // namespace detail

// ---------------------------------------------------------------------------
// Typed scenarios

struct Table1Config
{
    FrequencyGrid grid;
    std::size_t nodes;
    double voigt_gamma_l;
};

inline Table1Config table1_config(const json& p)
{
    using namespace detail;
    const auto nodes = count(p, "quadrature_nodes");
    require(nodes >= 64, "quadrature_nodes must be >= 64");
    const double gl = number(p, "voigt_gamma_l");
    require(gl > 0.0, "voigt_gamma_l must be positive");
    return {grid_from(p), nodes, gl};
}

struct SweepConfig
{
    LineshapeSpec base;
    PerturbationKind kind;
    std::vector<double> epsilons;
    std::vector<double> offsets;
    std::vector<std::pair<double, double>> spectra;
};

inline SweepConfig sweep_config(const json& p)
{
    using namespace detail;
    SweepConfig c;
    const auto shape = p.at("lineshape").get<std::string>();
    if (shape == "gaussian")
        c.base.kind = LineshapeKind::Gaussian;
    else if (shape == "lorentzian")
        c.base.kind = LineshapeKind::Lorentzian;
    else if (shape == "voigt")
        c.base.kind = LineshapeKind::Voigt;
    else
        throw UsageError("lineshape must be gaussian, lorentzian or voigt");
    c.base.width = number(p, "width");
    c.base.gamma_l = number(p, "gamma_l");
    require(c.base.width > 0.0, "width must be positive");
    require(c.base.gamma_l > 0.0, "gamma_l must be positive");
    c.base.grid = grid_from(p);

    const auto kind = p.at("perturbation").get<std::string>();
    require(kind == "tilt" || kind == "offset", "perturbation must be tilt or offset");
    c.kind = kind == "tilt" ? PerturbationKind::LinearTilt : PerturbationKind::OffsetGaussian;
    c.epsilons = list(p, "epsilons");
    c.offsets = list(p, "offsets");
    require(!c.epsilons.empty(), "epsilons must not be empty");
    require(!c.offsets.empty(), "offsets must not be empty");
    for (double e : c.epsilons)
        require(e >= 0.0, "epsilons must be >= 0");

    const auto se = list(p, "spectra_epsilons");
    const auto so = list(p, "spectra_offsets");
    require(se.size() == so.size(), "spectra_epsilons and spectra_offsets must have equal length");
    for (std::size_t k = 0; k < se.size(); ++k) {
        require(se[k] >= 0.0, "spectra_epsilons must be >= 0");
        c.spectra.emplace_back(se[k], so[k]);
    }
    return c;
}

struct JsaConfig
{
    bool hermite = false;
    double pump_sigma = 1.0;
    PhaseMatchingModel pm;
    FrequencyGrid grid{0.0, 16.0, 257};
    bool random_phase = false;
    std::uint64_t seed = 42;
    double gamma = 0.0;
    double mode_sigma = 1.0;
};

inline JsaConfig jsa_config(const json& p)
{
    using namespace detail;
    JsaConfig c;
    const auto model = p.at("model").get<std::string>();
    require(model == "pump" || model == "hermite_gauss", "model must be pump or hermite_gauss");
    c.hermite = model == "hermite_gauss";
    c.pump_sigma = number(p, "pump_sigma");
    require(c.pump_sigma > 0.0, "pump_sigma must be positive");
    c.pm = {number(p, "kappa_s"), number(p, "kappa_i"), number(p, "length"), 0.0, 0.0};
    usage_checked([&] {
        c.pm.validate();
        return 0;
    });
    c.grid = grid_from(p);
    const auto phase = p.at("pump_phase").get<std::string>();
    require(phase == "none" || phase == "random", "pump_phase must be none or random");
    c.random_phase = phase == "random";
    c.seed = p.at("seed").get<std::uint64_t>();
    c.gamma = number(p, "gamma");
    require(c.gamma >= 0.0 && c.gamma <= 1.0, "gamma must lie in [0, 1]");
    c.mode_sigma = number(p, "mode_sigma");
    require(c.mode_sigma > 0.0, "mode_sigma must be positive");
    return c;
}

inline JointSpectralAmplitude build_scenario_jsa(const JsaConfig& c)
{
    if (c.hermite)
        return hermite_gauss_mixture(c.grid, c.mode_sigma, c.gamma);
    // Pump on the sum-frequency grid, so every ws + wi is a pump node.
    const auto pump = gaussian_profile(c.grid.doubled(), 2.0 * c.grid.center(), c.pump_sigma);
    if (c.random_phase)
        return apply_pump_phase(pump, c.pm, c.grid, c.grid, c.seed);
    return build_jsa(pump, c.pm, c.grid, c.grid);
}

struct HomConfig
{
    JsaConfig jsa;
    std::optional<std::pair<double, double>> window;
    std::size_t tau_count;
    std::uint64_t n_events;
};

inline HomConfig hom_config(const json& p)
{
    using namespace detail;
    HomConfig c{jsa_config(p), std::nullopt, count(p, "tau_count"), p.at("n_events").get<std::uint64_t>()};
    const bool has_min = !p.at("tau_min").is_null(), has_max = !p.at("tau_max").is_null();
    require(has_min == has_max, "tau_min and tau_max must be given together");
    if (has_min) {
        c.window = std::pair{number(p, "tau_min"), number(p, "tau_max")};
        require(c.window->second > c.window->first, "tau_max must exceed tau_min");
    }
    require(c.tau_count >= 3, "tau_count must be >= 3");
    require(c.n_events >= 1, "n_events must be >= 1");
    return c;
}

struct ValidateConfig
{
    std::uint64_t seed;
    std::size_t realizations;
    std::size_t grid_count;
    bool corrupt_normalization;
};

inline ValidateConfig validate_config(const json& p)
{
    using namespace detail;
    ValidateConfig c{p.at("seed").get<std::uint64_t>(), count(p, "realizations"), count(p, "grid_count"),
                     p.at("corrupt_normalization").get<bool>()};
    require(c.realizations >= 100, "realizations must be >= 100");
    require(c.grid_count >= 3 && c.grid_count % 2 == 1, "grid_count must be odd and >= 3");
    return c;
}

// ---------------------------------------------------------------------------
// Output handling

// Writes into a directory with a manifest, or streams the primary output.
class OutputSink
{
public:
    OutputSink(std::optional<std::filesystem::path> dir, std::ostream& out, std::string scenario, json parameters)
        : dir_(std::move(dir)), out_(out)
    {
        manifest_.scenario = std::move(scenario);
        manifest_.parameters = std::move(parameters);
        if (dir_) {
            std::filesystem::create_directories(*dir_);
            write_manifest(*dir_ / "manifest.json", manifest_);
        }
    }

    bool to_directory() const { return dir_.has_value(); }

    // Summaries go to stdout when data goes to files, else to stderr.
    std::ostream& summary(std::ostream& err) const { return dir_ ? out_ : err; }

    void emit(const std::string& name, const std::string& content, bool primary)
    {
        if (dir_) {
            pairsim::detail::write_text(*dir_ / name, content);
            manifest_.outputs[name] = sha256_hex(content);
        } else if (primary) {
            out_ << content;
        }
    }

    void finish()
    {
        if (dir_) {
            manifest_.complete = true;
            write_manifest(*dir_ / "manifest.json", manifest_);
        }
    }

private:
    std::optional<std::filesystem::path> dir_;
    std::ostream& out_;
    RunManifest manifest_;
};

// ---------------------------------------------------------------------------
// Commands

inline int cmd_table1(const json& p, OutputSink& sink, std::ostream& err)
{
    const auto c = table1_config(p);
    CsvTable table({"lineshape", "C1", "C2", "C2_over_C1", "quadrature", "span", "count", "note"});

    const auto g = lineshape_coefficients(gaussian_profile(c.grid, 0.0, 1.0));
    table.add_row({std::string("gaussian"), g.c1, g.c2, g.ratio(), std::string("trapezoid"), c.grid.span(),
                   static_cast<double>(c.grid.count()), std::string("")});

    const auto l = full_line_coefficients([](double w) { return lorentzian_value(w, 0.0, 1.0); }, 0.0, 1.0,
                                          c.nodes);
    table.add_row({std::string("lorentzian"), l.c1, l.c2, l.ratio(), std::string("tan-mapped midpoint"),
                   std::numeric_limits<double>::infinity(), static_cast<double>(c.nodes), std::string("")});

    const VoigtShape voigt(0.0, 1.0, c.voigt_gamma_l);
    const auto v = full_line_coefficients([&](double w) { return voigt(w); }, 0.0, 1.0, c.nodes);
    table.add_row({std::string("voigt"), v.c1, v.c2, v.ratio(), std::string("tan-mapped midpoint"),
                   std::numeric_limits<double>::infinity(), static_cast<double>(c.nodes),
                   std::string("sigma_g = 1, gamma_l = " + format_double(c.voigt_gamma_l) +
                               "; tabulated reference C1 = 1.039, C2 = 0.711 is unreachable since C1 >= 1 for "
                               "any peak-normalized profile")});

    sink.emit("table1.csv", table.str(), true);
    sink.summary(err) << "gaussian C2/C1 = " << format_double(g.ratio())
                      << ", lorentzian C2/C1 = " << format_double(l.ratio())
                      << ", voigt C2/C1 = " << format_double(v.ratio()) << "\n";
    return exit_ok;
}

inline int cmd_shg_sweep(const json& p, OutputSink& sink, std::ostream& err)
{
    const auto c = sweep_config(p);
    const auto rows = asymmetry_sweep(c.base, c.kind, c.epsilons, c.offsets);
    CsvTable table({"epsilon", "offset_b", "tvd_pump", "tvd_coherent", "tvd_incoherent"});
    for (const auto& r : rows)
        table.add_row({r.epsilon, r.offset_b, r.tvd_pump, r.tvd_coherent, r.tvd_incoherent});
    sink.emit("sweep.csv", table.str(), true);

    for (const auto& [eps, b] : c.spectra) {
        const auto pt = sweep_point(c.base, {c.kind, eps, b});
        const std::string tag = "eps" + format_double(eps) + "_b" + format_double(b);
        const auto pump = intensity_of(pt.pump);
        sink.emit("pump_" + tag + ".csv",
                  curve_csv({"omega", "intensity"},
                            {pump.grid().samples(), std::vector<double>(pump.values().begin(), pump.values().end())}),
                  false);
        const auto& coh = pt.coherent.intensity;
        const auto& inc = pt.incoherent.intensity;
        sink.emit("shg_" + tag + ".csv",
                  curve_csv({"Omega", "coherent", "incoherent"},
                            {coh.grid().samples(), std::vector<double>(coh.values().begin(), coh.values().end()),
                             std::vector<double>(inc.values().begin(), inc.values().end())}),
                  false);
    }
    const auto& last = rows.back();
    sink.summary(err) << rows.size() << " sweep points; at epsilon = " << format_double(last.epsilon)
                      << ", b = " << format_double(last.offset_b) << ": tvd pump "
                      << format_double(last.tvd_pump) << ", coherent " << format_double(last.tvd_coherent)
                      << ", incoherent " << format_double(last.tvd_incoherent) << "\n";
    return exit_ok;
}

inline int cmd_jsa(const json& p, OutputSink& sink, std::ostream& err)
{
    const auto c = jsa_config(p);
    const auto f = build_scenario_jsa(c);
    const auto d = decompose(f);
    const auto lambda = schmidt_coefficients(f);
    const double purity = lambda.squaredNorm();

    sink.emit("jsi.csv", matrix_csv(jsi(f)), true);
    const auto axis = c.grid.samples();
    std::vector<double> index(axis.size());
    for (std::size_t k = 0; k < index.size(); ++k)
        index[k] = static_cast<double>(k);
    sink.emit("jsa_axes.csv", curve_csv({"index", "omega_s", "omega_i"}, {index, axis, axis}), false);

    CsvTable summary({"quantity", "value"});
    summary.add_row({std::string("purity"), purity});
    summary.add_row({std::string("schmidt_number"), 1.0 / purity});
    summary.add_row({std::string("gamma"), d.gamma});
    summary.add_row({std::string("symmetric_weight"), d.symmetric_weight});
    summary.add_row({std::string("norm"), f.weight()});
    summary.add_row({std::string("marginal_bandwidth"), marginal_bandwidth(f)});
    sink.emit("jsa_summary.csv", summary.str(), false);

    sink.summary(err) << "purity " << format_double(purity) << ", gamma " << format_double(d.gamma)
                      << ", symmetric weight " << format_double(d.symmetric_weight) << "\n";
    return exit_ok;
}

inline std::pair<double, double> default_delay_window(const JointSpectralAmplitude& f)
{
    const double bw = marginal_bandwidth(f);
    return {-10.0 / bw, 10.0 / bw};
}

inline int cmd_hom(json& p, OutputSink& sink, std::ostream& err)
{
    const auto c = hom_config(p);
    const auto f = build_scenario_jsa(c.jsa);
    const auto [tau_min, tau_max] = c.window ? *c.window : default_delay_window(f);

    const auto curve = hom_curve(f, tau_min, tau_max, c.tau_count);
    const auto fisher = fisher_information(curve);
    const auto crb = cramer_rao_bound(fisher, c.n_events);
    sink.emit("hom.csv",
              curve_csv({"tau", "P", "I", "crb"}, {curve.delays, curve.probabilities, fisher.information, crb}),
              true);

    const double v = visibility(curve);
    const double fwhm = dip_fwhm(curve);
    CsvTable summary({"quantity", "value"});
    summary.add_row({std::string("visibility"), v});
    summary.add_row({std::string("dip_fwhm"), fwhm});
    summary.add_row({std::string("peak_fisher"), *std::max_element(fisher.information.begin(),
                                                                  fisher.information.end())});
    summary.add_row({std::string("min_crb"), *std::min_element(crb.begin(), crb.end())});
    summary.add_row({std::string("p_zero_delay"), coincidence_probability(f, 0.0)});
    summary.add_row({std::string("gamma"), decompose(f).gamma});
    summary.add_row({std::string("purity"), schmidt_purity(f)});
    summary.add_row({std::string("tau_min"), tau_min});
    summary.add_row({std::string("tau_max"), tau_max});
    sink.emit("hom_summary.csv", summary.str(), false);

    sink.summary(err) << "visibility " << format_double(v) << ", dip FWHM " << format_double(fwhm)
                      << (fisher.degenerate ? " (degenerate curve, Fisher information set to 0)" : "") << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// validate

struct CheckResult
{
    std::string name;
    bool passed;
    double value;
    double threshold;
    std::string detail;
};

namespace detail
{
inline JointSpectralAmplitude random_test_jsa(std::mt19937_64& rng, const FrequencyGrid& g)
{
    std::uniform_real_distribution<double> center(-2.0, 2.0), width(0.5, 1.5), re(-1.0, 1.0), mix(0.0, 1.0);
    JointSpectralAmplitude::Matrix f = JointSpectralAmplitude::Matrix::Zero(g.count(), g.count());
    const int terms = 1 + static_cast<int>(rng() % 4);
    for (int t = 0; t < terms; ++t) {
        const double cs = center(rng), ci = center(rng), ws = width(rng), wi = width(rng);
        const complex c(re(rng), re(rng));
        for (std::size_t r = 0; r < g.count(); ++r)
            for (std::size_t k = 0; k < g.count(); ++k)
                f(r, k) += c * gaussian_value(g[r], cs, ws) * gaussian_value(g[k], ci, wi);
    }
    JointSpectralAmplitude jsa(g, g, std::move(f));
    return mix_exchange_parts(jsa, mix(rng));
}

// Statistical tolerance for the Monte-Carlo comparison: 5% at 10^4
// realizations, scaled by 1/sqrt(M) below that.
inline double monte_carlo_tolerance(std::size_t realizations)
{
    return 0.05 * std::max(1.0, std::sqrt(1e4 / static_cast<double>(realizations)));
}
} // namespace detail

inline std::vector<CheckResult> run_validation(const ValidateConfig& c)
{
    std::vector<CheckResult> checks;
    const FrequencyGrid joint(0.0, 16.0, 129);
    const PhaseMatchingModel pm{1.0, -0.9, 2.0};
    const auto pump = gaussian_profile(joint.doubled(), 0.0, 0.5);

    {
        auto f = build_jsa(pump, pm, joint, joint);
        if (c.corrupt_normalization)
            f = JointSpectralAmplitude::unnormalized(joint, joint, 1.01 * f.values());
        const double dev = std::abs(f.weight() - 1.0);
        std::string detail;
        bool ok = dev <= normalization_tolerance;
        try {
            coincidence_probability(f, 0.0);
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        checks.push_back({"jsa_normalization", ok, dev, normalization_tolerance, detail});
    }
    {
        const auto f = build_jsa(pump, pm, joint, joint);
        const auto phased = apply_pump_phase(pump, pm, joint, joint, c.seed);
        const auto [lo, hi] = default_delay_window(f);
        const auto a = hom_curve(f, lo, hi, 401);
        const auto b = hom_curve(phased, lo, hi, 401);
        double worst = 0.0;
        for (std::size_t k = 0; k < a.probabilities.size(); ++k)
            worst = std::max(worst, std::abs(a.probabilities[k] - b.probabilities[k]));
        checks.push_back({"phase_invariance", worst < 1e-12, worst, 1e-12, ""});
    }
    {
        std::mt19937_64 rng(c.seed);
        const FrequencyGrid g(0.0, 12.0, 65);
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const auto f = detail::random_test_jsa(rng, g);
            worst = std::max(worst, std::abs(coincidence_probability(f, 0.0) - decompose(f).gamma));
        }
        checks.push_back({"p0_gamma", worst < 1e-8, worst, 1e-8, ""});
    }
    {
        const auto a = gaussian_profile(FrequencyGrid(0.0, 16.0, 1025), 0.0, 1.0);
        const double in = intensity_of(a).integral();
        const double out = incoherent_shg(a).intensity.integral();
        const double rel = std::abs(out - in * in) / (in * in);
        checks.push_back({"energy_bookkeeping", rel < 1e-8, rel, 1e-8, ""});
    }
    {
        const FrequencyGrid g(0.0, 16.0, c.grid_count);
        const auto a = gaussian_profile(g, 0.0, 1.0);
        const auto reference = incoherent_shg(a).intensity;
        const std::vector<std::size_t> schedule{c.realizations / 100, c.realizations / 10, c.realizations};
        const auto estimates = monte_carlo_checkpoints(a, schedule, c.seed);
        std::vector<double> errors;
        for (const auto& e : estimates)
            errors.push_back(relative_l2_shape_distance(e, reference));
        const double tol = detail::monte_carlo_tolerance(c.realizations);
        std::string schedule_text;
        for (std::size_t k = 0; k < schedule.size(); ++k)
            schedule_text += (k ? ", M=" : "M=") + std::to_string(schedule[k]) + ": " + format_double(errors[k]);
        checks.push_back({"monte_carlo_accuracy", errors.back() < tol, errors.back(), tol, schedule_text});
        const bool monotone = errors[0] > errors[1] && errors[1] > errors[2];
        checks.push_back({"monte_carlo_convergence", monotone, errors[0] - errors[2], 0.0, schedule_text});
    }
    return checks;
}

inline int cmd_validate(const json& p, OutputSink& sink, std::ostream& err)
{
    const auto c = validate_config(p);
    const auto checks = run_validation(c);
    json report = {{"seed", c.seed}, {"realizations", c.realizations}, {"checks", json::array()}};
    bool all = true;
    for (const auto& ch : checks) {
        report["checks"].push_back({{"name", ch.name},
                                    {"passed", ch.passed},
                                    {"value", ch.value},
                                    {"threshold", ch.threshold},
                                    {"detail", ch.detail}});
        all = all && ch.passed;
    }
    report["passed"] = all;
    sink.emit("validate.json", canonical_json(report), true);
    for (const auto& ch : checks)
        sink.summary(err) << (ch.passed ? "pass " : "FAIL ") << ch.name << " (" << format_double(ch.value)
                          << ")" << (ch.detail.empty() ? "" : "; " + ch.detail) << "\n";
    if (!all) {
        for (const auto& ch : checks)
            if (!ch.passed)
                err << "pairsim validate: check failed: " << ch.name << "\n";
        return exit_failure;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run_command(const std::string& command, json params, const std::optional<std::filesystem::path>& out_dir,
                       std::ostream& out, std::ostream& err)
{
    // Validate before any output is produced.
    if (command == "table1")
        table1_config(params);
    else if (command == "shg-sweep")
        sweep_config(params);
    else if (command == "jsa")
        jsa_config(params);
    else if (command == "hom")
        hom_config(params);
    else if (command == "validate")
        validate_config(params);

    json recorded = params;
    if (command == "hom" && recorded["tau_min"].is_null()) {
        // Record the resolved delay window so a rerun does not depend on the rule.
        const auto [lo, hi] = default_delay_window(build_scenario_jsa(jsa_config(params)));
        recorded["tau_min"] = lo;
        recorded["tau_max"] = hi;
    }

    OutputSink sink(out_dir, out, command, recorded);
    int code = exit_ok;
    if (command == "table1")
        code = cmd_table1(recorded, sink, err);
    else if (command == "shg-sweep")
        code = cmd_shg_sweep(recorded, sink, err);
    else if (command == "jsa")
        code = cmd_jsa(recorded, sink, err);
    else if (command == "hom")
        code = cmd_hom(recorded, sink, err);
    else
        code = cmd_validate(recorded, sink, err);
    sink.finish();
    return code;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Photon-pair spectral simulation: SHG transfer, joint spectra, HOM interference", "pairsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version));

    struct Common
    {
        std::optional<std::string> out, config, preset;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> grid_count;
    };
    std::map<std::string, Common> common;
    std::map<std::string, std::map<std::string, std::optional<double>>> numbers;
    std::map<std::string, std::map<std::string, std::optional<std::string>>> texts;
    std::map<std::string, std::map<std::string, std::vector<double>>> lists;
    std::map<std::string, std::map<std::string, std::optional<std::size_t>>> counts;
    bool corrupt = false;

    auto add_common = [&](CLI::App* sub) {
        auto& c = common[sub->get_name()];
        sub->add_option("--out", c.out, "Output directory (default: primary data to stdout)");
        sub->add_option("--config", c.config, "JSON config or manifest from a previous run");
        sub->add_option("--seed", c.seed, "Random seed");
        sub->add_option("--grid-count", c.grid_count, "Frequency grid sample count (odd)");
        std::string names = "Named parameter preset:";
        for (const auto& [name, preset] : presets())
            if (std::find(preset.commands.begin(), preset.commands.end(), sub->get_name()) != preset.commands.end())
                names += "\n  " + name + ": " + preset.summary;
        sub->add_option("--preset", c.preset, names);
    };
    auto add_number = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        sub->add_option(flag, numbers[sub->get_name()][key], help);
    };
    auto add_text = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        sub->add_option(flag, texts[sub->get_name()][key], help);
    };
    auto add_list = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        sub->add_option(flag, lists[sub->get_name()][key], help)->delimiter(',');
    };
    auto add_count = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        sub->add_option(flag, counts[sub->get_name()][key], help);
    };
    auto add_jsa_flags = [&](CLI::App* sub) {
        add_text(sub, "--model", "model", "pump or hermite_gauss");
        add_number(sub, "--pump-sigma", "pump_sigma", "Pump rms amplitude width");
        add_number(sub, "--kappa-s", "kappa_s", "Signal group-delay coefficient");
        add_number(sub, "--kappa-i", "kappa_i", "Idler group-delay coefficient");
        add_number(sub, "--length", "length", "Effective crystal length factor");
        add_number(sub, "--grid-span", "grid_span", "Joint grid span");
        add_text(sub, "--pump-phase", "pump_phase", "none or random (uses --seed)");
        add_number(sub, "--gamma", "gamma", "Antisymmetric weight (hermite_gauss model)");
        add_number(sub, "--mode-sigma", "mode_sigma", "Mode width (hermite_gauss model)");
    };

    auto* table1 = app.add_subcommand("table1", "Sensitivity coefficients C1, C2 for three lineshapes");
    add_common(table1);
    add_count(table1, "--quadrature-nodes", "quadrature_nodes", "Nodes of the full-line quadrature");

    auto* sweep = app.add_subcommand("shg-sweep", "TVD asymmetry of pump and SHG spectra over a perturbation schedule");
    add_common(sweep);
    add_text(sweep, "--lineshape", "lineshape", "gaussian, lorentzian or voigt");
    add_number(sweep, "--width", "width", "Gaussian sigma or Lorentzian half-width");
    add_number(sweep, "--gamma-l", "gamma_l", "Voigt Lorentzian half-width");
    add_number(sweep, "--grid-span", "grid_span", "Input grid span");
    add_text(sweep, "--perturbation", "perturbation", "tilt or offset");
    add_list(sweep, "--epsilons", "epsilons", "Comma-separated perturbation strengths");
    add_list(sweep, "--offsets", "offsets", "Comma-separated satellite offsets in units of sigma");

    auto* jsa_cmd = app.add_subcommand("jsa", "Joint spectral intensity, purity and exchange weights");
    add_common(jsa_cmd);
    add_jsa_flags(jsa_cmd);

    auto* hom = app.add_subcommand("hom", "HOM dip, visibility, Fisher information and Cramer-Rao bound");
    add_common(hom);
    add_jsa_flags(hom);
    add_number(hom, "--tau-min", "tau_min", "Delay window start (default -10 / marginal bandwidth)");
    add_number(hom, "--tau-max", "tau_max", "Delay window end");
    add_count(hom, "--tau-count", "tau_count", "Number of delay samples");
    add_count(hom, "--n-events", "n_events", "Detected pairs for the Cramer-Rao bound");

    auto* validate = app.add_subcommand("validate", "Run the Monte-Carlo oracle and invariant checks");
    add_common(validate);
    add_count(validate, "--realizations", "realizations", "Monte-Carlo realizations (>= 100)");
    validate->add_flag("--corrupt-normalization", corrupt, "Test hook: break the JSA normalization")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    const auto& c = common[command];

    try {
        json patch = json::object();
        if (c.seed)
            patch["seed"] = *c.seed;
        if (c.grid_count)
            patch["grid_count"] = *c.grid_count;
        for (const auto& [key, v] : numbers[command])
            if (v)
                patch[key] = *v;
        for (const auto& [key, v] : texts[command])
            if (v)
                patch[key] = *v;
        for (const auto& [key, v] : lists[command])
            if (!v.empty())
                patch[key] = v;
        for (const auto& [key, v] : counts[command])
            if (v)
                patch[key] = *v;
        if (corrupt)
            patch["corrupt_normalization"] = true;

        std::optional<std::filesystem::path> config_path;
        if (c.config)
            config_path = *c.config;
        json params = resolve_parameters(command, c.preset, config_path, patch);
        std::optional<std::filesystem::path> out_dir;
        if (c.out)
            out_dir = *c.out;
        return run_command(command, std::move(params), out_dir, out, err);
    } catch (const UsageError& e) {
        err << "pairsim " << command << ": usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const WindowTooNarrow& e) {
        err << "pairsim " << command << ": " << e.what() << " (set --tau-min/--tau-max)\n";
        return exit_failure;
    } catch (const std::exception& e) {
        err << "pairsim " << command << ": error: " << e.what() << "\n";
        return exit_failure;
    }
}

} // namespace pairsim::cli

#endif // PAIRSIM_CLI_RUNNER_HPP
