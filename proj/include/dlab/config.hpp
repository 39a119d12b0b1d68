// config.hpp — JSON run configuration: schema checks, unit conversion and default echo.
//
// Interface units are linear kHz, mm and ms; everything is converted to rad/s, m and s.
// Lattice, coupling, medium and drive keys sit at the top level; sweep and solver
// settings live in nested sections.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dlab/error.hpp"
#include "dlab/io.hpp"
#include "dlab/lattice.hpp"
#include "dlab/montecarlo.hpp"
#include "dlab/spectroscopy.hpp"
#include "dlab/units.hpp"

namespace dlab {

struct GridRange {
    double min{0.0};
    double max{0.0};
    int count{0};

    std::vector<double> values() const {
        if (count == 1) {
            return {min};
        }
        return uniform_grid(min, max, count);
    }
};

enum class DriveInput { mode, uniform, explicit_vector };
enum class CalibrationSource { model, mc };

struct RunConfig {
    LatticeSpec lattice;
    Couplings couplings;            // rad/s
    MediumParams medium;
    double gamma{khz(143.0)};       // total ground-coherence decay, rad/s
    double probe_ratio{0.1};        // strongest |Omega_p| / |Omega_c|
    DriveInput input{DriveInput::mode};
    int mode_index{1};
    std::vector<double> input_vector;
    UncoupledMode uncoupled{UncoupledMode::closed_form};

    GridRange delta;                // rad/s
    int bloch_k_count{201};
    double bloch_delta{0.0};
    GridRange pd_v;                 // rad/s
    GridRange pd_t;
    int pd_n_cells{10};

    MCConfig mc;
    GridRange mc_delta;

    double ode_t_final_over_gamma{20.0};
    double ode_gamma_ratio{250.0};  // Gamma / gamma for the full-model check
    int ode_samples{201};
    double ode_delta{0.0};

    CalibrationMethod calibration_method{CalibrationMethod::difference_linewidth};
    CalibrationSource calibration_source{CalibrationSource::model};
    std::vector<double> calibration_distances;  // m

    std::uint64_t seed{1};
    bool nominal{false};
    bool paper_scale{false};
    int threads{0};

    json resolved;                  // every key with the value actually used
    std::string hash;               // content hash of resolved.dump()
};

namespace detail {

// Reads keys from one JSON object, records defaults into an echo object and
// rejects keys nobody asked for.
class Section {
public:
    Section(const json& src, std::string path) : src_(src), path_(std::move(path)) {
        if (!src_.is_object()) {
            throw ConfigError(fmt::format("{} must be a JSON object", label()));
        }
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        T value = fallback;
        if (src_.contains(key)) {
            try {
                value = src_.at(key).get<T>();
            } catch (const json::exception&) {
                throw ConfigError(fmt::format("{}: wrong type", name(key)));
            }
        }
        echo_[key] = value;
        return value;
    }

    double positive(const std::string& key, double fallback) {
        const double x = get<double>(key, fallback);
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ConfigError(fmt::format("{} must be > 0 (got {})", name(key), x));
        }
        return x;
    }

    double non_negative(const std::string& key, double fallback) {
        const double x = get<double>(key, fallback);
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw ConfigError(fmt::format("{} must be >= 0 (got {})", name(key), x));
        }
        return x;
    }

    int at_least(const std::string& key, int fallback, int lo) {
        const int x = get<int>(key, fallback);
        if (x < lo) {
            throw ConfigError(fmt::format("{} must be >= {} (got {})", name(key), lo, x));
        }
        return x;
    }

    std::string choice(const std::string& key, const std::string& fallback, std::initializer_list<const char*> allowed) {
        const std::string s = get<std::string>(key, fallback);
        for (const char* a : allowed) {
            if (s == a) {
                return s;
            }
        }
        std::string list;
        for (const char* a : allowed) {
            list += list.empty() ? a : fmt::format(", {}", a);
        }
        throw ConfigError(fmt::format("{} must be one of {} (got '{}')", name(key), list, s));
    }

    bool has(const std::string& key) const { return src_.contains(key); }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(src_.contains(key) ? src_.at(key) : empty, name(key));
    }

    void adopt(const std::string& key, json value) { echo_[key] = std::move(value); }

    void mark(const std::string& key) { seen_.insert(key); }

    // Unknown keys are an error; call once all keys are read.
    json finish() const {
        for (const auto& [key, _] : src_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(fmt::format("unknown key '{}'", name(key)));
            }
        }
        return echo_;
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string label() const { return path_.empty() ? "config" : path_; }

    const json& src_;
    std::string path_;
    std::set<std::string> seen_;
    json echo_ = json::object();
};

inline GridRange read_khz_grid(Section& s, GridRange fallback_khz) {
    GridRange g;
    g.min = khz(s.get<double>("min_khz", fallback_khz.min));
    g.max = khz(s.get<double>("max_khz", fallback_khz.max));
    g.count = s.at_least("count", fallback_khz.count, 1);
    if (g.count > 1 && !(g.max > g.min)) {
        throw ConfigError(fmt::format("{} must exceed {}", s.name("max_khz"), s.name("min_khz")));
    }
    return g;
}

} // namespace detail

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    bool nominal{false};
    bool paper_scale{false};
    std::optional<int> threads;
};

inline RunConfig parse_config_json(const json& doc, const ConfigOverrides& overrides = {}) {
    RunConfig rc;
    detail::Section top(doc, "");

    // Lattice
    auto& L = rc.lattice;
    L.n_cells = top.at_least("n_cells", 2, 1);
    L.d1 = mm(top.positive("d1", 6.0));
    L.d2 = mm(top.positive("d2", 3.0));
    L.beam_diameter = mm(top.positive("beam_diameter", 1.5));
    const std::string boundary = top.choice("boundary", "line-open", {"line-open", "ring-open", "ring-closed"});
    L.boundary = boundary == "line-open" ? Boundary::line_open
               : boundary == "ring-open" ? Boundary::ring_open
                                         : Boundary::ring_closed;
    const std::string trunc = top.choice("truncation", "nn", {"nn", "nnn"});
    L.truncation = trunc == "nn" ? Truncation::nearest_neighbor : Truncation::next_nearest_neighbor;
    L.residual_all_to_all = top.non_negative("residual_epsilon", 0.0);

    // Medium
    auto& M = rc.medium;
    M.gamma12 = khz(top.positive("gamma12_khz", 100.0));
    M.Gamma = khz(top.positive("Gamma_khz", 5750.0));
    M.gamma23 = khz(top.positive("gamma23_khz", to_khz(M.Gamma) / 2.0));
    M.nu = top.positive("speed_m_s", 210.0);
    M.cell_diameter = mm(top.positive("cell_diameter", 25.0));
    M.cell_length = mm(top.positive("cell_length", 50.0));
    M.temperature = top.positive("temperature_k", 313.15);
    M.atomic_mass = top.positive("atomic_mass_amu", rb87_mass / atomic_mass_unit) * atomic_mass_unit;
    M.kappa = khz(top.positive("kappa_khz_mm", 31.5)) * mm(1.0);
    M.set_optical_depth(top.non_negative("optical_depth", 0.5));
    rc.gamma = khz(top.positive("gamma_khz", 143.0));
    if (!(rc.gamma > M.gamma12)) {
        throw ConfigError("gamma_khz must exceed gamma12_khz");
    }

    // Couplings
    const bool from_geometry = top.get<bool>("couplings_from_geometry", false);
    if (from_geometry) {
        for (const char* k : {"v_khz", "w_khz", "t_khz"}) {
            if (top.has(k)) {
                throw ConfigError(fmt::format("{} conflicts with couplings_from_geometry", k));
            }
            top.mark(k);
        }
        rc.couplings = couplings_from_geometry(L, M);
        top.adopt("v_khz", to_khz(rc.couplings.v));
        top.adopt("w_khz", to_khz(rc.couplings.w));
        top.adopt("t_khz", to_khz(rc.couplings.t));
    } else {
        rc.couplings.v = khz(top.non_negative("v_khz", 5.0));
        rc.couplings.w = khz(top.non_negative("w_khz", 11.0));
        rc.couplings.t = khz(top.non_negative("t_khz", 0.0));
    }
    rc.nominal = top.get<bool>("nominal", false) || overrides.nominal;
    if (rc.nominal) {
        rc.couplings.w = 2.0 * rc.couplings.v;
        top.adopt("nominal", true);
        top.adopt("w_khz", to_khz(rc.couplings.w));
    }
    if (rc.couplings.t > 0.0 && L.truncation == Truncation::nearest_neighbor) {
        throw ConfigError("t_khz > 0 needs truncation 'nnn'");
    }

    // Drive
    rc.probe_ratio = top.positive("probe_ratio", 0.1);
    if (rc.probe_ratio > 1.0) {
        throw ConfigError("probe_ratio must be <= 1 (weak probe)");
    }
    top.mark("input");
    if (doc.contains("input") && doc.at("input").is_array()) {
        rc.input = DriveInput::explicit_vector;
        try {
            rc.input_vector = doc.at("input").get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError("input must be 'mode', 'uniform' or an array of numbers");
        }
        if (static_cast<int>(rc.input_vector.size()) != L.n_sites()) {
            throw ConfigError(fmt::format("input has {} entries, lattice has {} channels", rc.input_vector.size(),
                                          L.n_sites()));
        }
        top.adopt("input", rc.input_vector);
    } else {
        const std::string input = top.choice("input", "mode", {"mode", "uniform"});
        rc.input = input == "mode" ? DriveInput::mode : DriveInput::uniform;
    }
    rc.mode_index = top.at_least("mode_index", 1, 0);
    if (rc.mode_index >= L.n_sites()) {
        throw ConfigError(fmt::format("mode_index must be < {}", L.n_sites()));
    }
    const std::string unc = top.choice("uncoupled", "closed-form", {"closed-form", "single-probe"});
    rc.uncoupled = unc == "closed-form" ? UncoupledMode::closed_form : UncoupledMode::single_probe;

    // Sweeps
    {
        auto s = top.child("delta");
        rc.delta = detail::read_khz_grid(s, {-300.0, 300.0, 121});
        top.adopt("delta", s.finish());
    }
    {
        auto s = top.child("bloch");
        rc.bloch_k_count = s.at_least("k_count", 201, 2);
        rc.bloch_delta = khz(s.get<double>("delta_khz", 0.0));
        top.adopt("bloch", s.finish());
    }
    {
        auto s = top.child("phase_diagram");
        auto v = s.child("v");
        rc.pd_v = detail::read_khz_grid(v, {0.0, 20.0, 41});
        s.adopt("v", v.finish());
        auto t = s.child("t");
        rc.pd_t = detail::read_khz_grid(t, {0.0, 10.0, 21});
        s.adopt("t", t.finish());
        rc.pd_n_cells = s.at_least("n_cells", 10, 2);
        top.adopt("phase_diagram", s.finish());
    }

    // Monte Carlo
    rc.paper_scale = top.get<bool>("paper_scale", false) || overrides.paper_scale;
    {
        auto s = top.child("mc");
        auto& mc = rc.mc;
        mc.n_velocities = s.at_least("n_velocities", 10, 1);
        mc.n_trajectories_per_velocity = s.at_least("n_trajectories", 1000, 1);
        if (rc.paper_scale) {
            mc.n_velocities = 30;
            mc.n_trajectories_per_velocity = 7000;
            s.adopt("n_velocities", 30);
            s.adopt("n_trajectories", 7000);
        }
        mc.warmup_time = ms(s.non_negative("warmup_ms", 1.0));
        mc.sample_time = ms(s.positive("sample_ms", 20.0));
        mc.beam_diameter = mm(s.positive("beam_diameter", 1.2));
        mc.ground_dephasing = khz(s.non_negative("ground_dephasing_khz", 0.5));
        mc.wall_survival = s.non_negative("wall_survival", 0.0);
        mc.resample_speed_on_wall = s.get<bool>("resample_speed_on_wall", true);
        auto d = s.child("delta");
        rc.mc_delta = detail::read_khz_grid(d, {-60.0, 60.0, 61});
        s.adopt("delta", d.finish());
        mc.cell_diameter = M.cell_diameter;
        mc.temperature = M.temperature;
        mc.atomic_mass = M.atomic_mass;
        top.adopt("mc", s.finish());
    }

    // Dynamics check
    {
        auto s = top.child("ode");
        rc.ode_t_final_over_gamma = s.positive("t_final_over_gamma", 20.0);
        rc.ode_gamma_ratio = s.positive("gamma_ratio", 250.0);
        rc.ode_samples = s.at_least("samples", 201, 2);
        rc.ode_delta = khz(s.get<double>("delta_khz", 0.0));
        top.adopt("ode", s.finish());
    }

    // Calibration
    {
        auto s = top.child("calibration");
        const std::string method = s.choice("method", "difference-linewidth", {"difference-linewidth", "peak-ratio"});
        rc.calibration_method = method == "peak-ratio" ? CalibrationMethod::peak_ratio
                                                       : CalibrationMethod::difference_linewidth;
        const std::string source = s.choice("source", "model", {"model", "mc"});
        rc.calibration_source = source == "mc" ? CalibrationSource::mc : CalibrationSource::model;
        const auto dist = s.get<std::vector<double>>("distances_mm", {3.0, 6.0});
        if (dist.empty()) {
            throw ConfigError("calibration.distances_mm must not be empty");
        }
        for (double d : dist) {
            if (!(d > 0.0)) {
                throw ConfigError(fmt::format("calibration.distances_mm entries must be > 0 (got {})", d));
            }
            rc.calibration_distances.push_back(mm(d));
        }
        top.adopt("calibration", s.finish());
    }

    // Run settings
    rc.seed = top.get<std::uint64_t>("seed", 1);
    if (overrides.seed) {
        rc.seed = *overrides.seed;
        top.adopt("seed", rc.seed);
    }
    rc.mc.master_seed = rc.seed;
    rc.threads = top.at_least("threads", 0, 0);
    if (overrides.threads) {
        rc.threads = *overrides.threads;
    }
    rc.mc.threads = rc.threads;
    top.adopt("paper_scale", rc.paper_scale);
    top.adopt("nominal", rc.nominal);

    rc.resolved = top.finish();
    // The thread count does not change results, so it stays out of the hash.
    rc.resolved.erase("threads");

    validate(L);
    validate(M);
    rc.hash = content_hash(rc.resolved.dump());
    return rc;
}

// Accepts a path, or inline JSON text when the argument starts with '{'.
inline RunConfig parse_config(const std::string& path_or_text, const ConfigOverrides& overrides = {}) {
    std::string text;
    const auto first = path_or_text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && path_or_text[first] == '{') {
        text = path_or_text;
    } else {
        text = read_file(path_or_text);
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    return parse_config_json(doc, overrides);
}

} // namespace dlab
