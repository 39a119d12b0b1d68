// commands.hpp — CLI command implementations: each builds its artifacts in memory and
// writes them only when the whole command has succeeded.

#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dlab/config.hpp"
#include "dlab/dynamics.hpp"
#include "dlab/error.hpp"
#include "dlab/io.hpp"
#include "dlab/lattice.hpp"
#include "dlab/montecarlo.hpp"
#include "dlab/spectral.hpp"
#include "dlab/spectroscopy.hpp"

namespace dlab {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_numerical = 3;

struct CommandOutput {
    std::vector<std::pair<std::string, std::string>> files;  // name, content
    std::string summary;
    json extra = json::object();                             // merged into the manifest
    int status{exit_ok};
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"calibrate", "spectrum",    "bloch",         "eit", "eigen-eit",
                                                "chiral-test", "phase-diagram", "mc", "ode-check"};
    return names;
}

namespace detail {

inline std::string khz_list(const std::vector<double>& rates) {
    std::vector<std::string> parts;
    for (double r : rates) {
        parts.push_back(fmt::format("{:.6g}", to_khz(r)));
    }
    return fmt::format("[{}]", fmt::join(parts, ", "));
}

inline void require_zero_detuning_grid(const std::vector<double>& grid) {
    if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) {
        throw ConfigError("delta grid must contain 0 exactly (use a symmetric range with an odd count)");
    }
}

inline DissipationSpectrum zero_detuning_spectrum(const RunConfig& rc) {
    const auto h = build_hamiltonian(rc.lattice, rc.couplings, 0.0, rc.medium);
    return dissipation_spectrum(h, rc.couplings.v, rc.couplings.w, rc.couplings.t);
}

inline Eigen::VectorXd input_vector(const RunConfig& rc) {
    const int n = rc.lattice.n_sites();
    switch (rc.input) {
    case DriveInput::uniform:
        return Eigen::VectorXd::Ones(n);
    case DriveInput::explicit_vector:
        return Eigen::Map<const Eigen::VectorXd>(rc.input_vector.data(), n);
    case DriveInput::mode:
        break;
    }
    return zero_detuning_spectrum(rc).modes.col(rc.mode_index);
}

inline DriveConfig config_drive(const RunConfig& rc) {
    return drive_for_input(input_vector(rc), rc.medium, rc.gamma, rc.probe_ratio);
}

// Writes rows of a per-delta, per-channel trace.
inline void trace_rows(CsvTable& table, const std::vector<double>& grid, const std::vector<Eigen::VectorXcd>& coupled,
                       const std::vector<Eigen::VectorXcd>& uncoupled, const std::vector<Eigen::VectorXd>& t_coupled,
                       const std::vector<Eigen::VectorXd>& t_uncoupled,
                       const std::function<void(CsvTable::Row&, std::size_t, Eigen::Index)>& extra = {}) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (Eigen::Index j = 0; j < coupled[i].size(); ++j) {
            auto row = table.row();
            row << to_khz(grid[i]) << static_cast<int>(j + 1) << coupled[i](j).real() << coupled[i](j).imag()
                << uncoupled[i](j).real() << uncoupled[i](j).imag() << t_coupled[i](j) << t_uncoupled[i](j);
            if (extra) {
                extra(row, i, j);
            }
        }
    }
}

inline const std::vector<std::string> trace_columns{"delta_khz",          "channel",         "re_rho12_coupled",
                                                    "im_rho12_coupled",   "re_rho12_uncoupled", "im_rho12_uncoupled",
                                                    "t_coupled",          "t_uncoupled"};

inline MCConfig mc_for_lattice(const RunConfig& rc, const DriveConfig& drive) {
    MCConfig mc = rc.mc;
    const auto pos = beam_positions(rc.lattice);
    mc.beam_centers.assign(pos.begin(), pos.end());
    mc.drive = drive;
    mc.delta_grid = rc.mc_delta.values();
    return mc;
}

inline MCConfig mc_for_pair(const RunConfig& rc, double d) {
    MCConfig pair = mc_pair_config(d, rc.medium, rc.gamma, rc.probe_ratio);
    MCConfig mc = rc.mc;
    mc.beam_centers = pair.beam_centers;
    mc.drive = pair.drive;
    mc.delta_grid = rc.mc_delta.values();
    return mc;
}

} // namespace detail

// ---------------------------------------------------------------------------

inline CommandOutput cmd_calibrate(const RunConfig& rc) {
    CsvTable table(rc.hash, {"distance_mm", "rate_khz", "model_khz", "source", "method"});
    std::vector<CalibrationPoint> points;
    const std::string method =
        rc.calibration_method == CalibrationMethod::peak_ratio ? "peak-ratio" : "difference-linewidth";
    const std::string source = rc.calibration_source == CalibrationSource::mc ? "mc" : "model";
    for (double d : rc.calibration_distances) {
        double rate = 0.0;
        if (rc.calibration_source == CalibrationSource::mc) {
            if (rc.calibration_method != CalibrationMethod::difference_linewidth) {
                throw ConfigError("mc calibration supports only the difference-linewidth method");
            }
            rate = mc_coupling_rate(detail::mc_for_pair(rc, d), rc.medium).rate;
        } else {
            LatticeSpec pair;
            pair.n_cells = 1;
            pair.d1 = pair.d2 = d;
            pair.beam_diameter = std::min(rc.lattice.beam_diameter, 0.5 * d);
            const double g = coupling_from_distance(d, rc.medium);
            const DriveConfig drive = drive_for_input(Eigen::VectorXd::Ones(2), rc.medium, rc.gamma, rc.probe_ratio);
            const auto grid = rc.delta.values();
            if (rc.calibration_method == CalibrationMethod::peak_ratio) {
                detail::require_zero_detuning_grid(grid);
            }
            const auto trace = eit_trace(pair, Couplings{g, g, 0.0}, rc.medium, drive, grid,
                                         EITOptions{rc.uncoupled, resolve_threads(rc.threads)});
            rate = calibrate_coupling(trace, rc.calibration_method);
        }
        points.push_back({d, rate});
        table.row() << to_mm(d) << to_khz(rate) << to_khz(coupling_from_distance(d, rc.medium)) << source << method;
    }
    CommandOutput out;
    out.files.emplace_back("calibrate.csv", table.str());
    const double kappa = fit_kappa(points);
    out.extra["kappa_khz_mm"] = to_mm(to_khz(kappa));
    std::vector<double> rates;
    for (const auto& p : points) {
        rates.push_back(p.rate);
    }
    out.summary = fmt::format("calibrate: rates_khz={} kappa_khz_mm={:.6g}", detail::khz_list(rates),
                              to_mm(to_khz(kappa)));
    return out;
}

inline CommandOutput cmd_spectrum(const RunConfig& rc) {
    const auto h = build_hamiltonian(rc.lattice, rc.couplings, 0.0, rc.medium);
    const auto s = dissipation_spectrum(h, rc.couplings.v, rc.couplings.w, rc.couplings.t);
    CsvTable spectrum(rc.hash, {"index", "rate_khz", "ipr", "in_gap", "topology"});
    CsvTable modes(rc.hash, {"index", "site", "amplitude"});
    for (std::size_t i = 0; i < s.rates.size(); ++i) {
        spectrum.row() << static_cast<int>(i) << to_khz(s.rates[i]) << s.ipr[i] << static_cast<bool>(s.in_gap[i])
                       << to_string(s.topology);
        for (Eigen::Index j = 0; j < s.modes.rows(); ++j) {
            modes.row() << static_cast<int>(i) << static_cast<int>(j + 1) << s.modes(j, static_cast<Eigen::Index>(i));
        }
    }
    CommandOutput out;
    out.files.emplace_back("spectrum.csv", spectrum.str());
    out.files.emplace_back("modes.csv", modes.str());
    json hj = to_json(h);
    hj["config_sha1"] = rc.hash;
    out.files.emplace_back("hamiltonian.json", hj.dump(2) + "\n");
    out.extra["gap_khz"] = {to_khz(s.gap_lower), to_khz(s.gap_upper)};
    if (s.winding) {
        out.extra["winding"] = *s.winding;
    }
    out.summary = fmt::format("spectrum: rates_khz={} topology={}", detail::khz_list(s.rates), to_string(s.topology));
    return out;
}

inline CommandOutput cmd_bloch(const RunConfig& rc) {
    const auto ph = bond_phases(rc.lattice, rc.medium, rc.bloch_delta);
    const auto& c = rc.couplings;
    const auto bands = bloch_bands(c.v, c.w, c.t, ph.theta1, ph.theta2, ph.theta3, rc.bloch_k_count);
    CsvTable table(rc.hash, {"k", "band", "re_khz", "im_khz"});
    for (std::size_t i = 0; i < bands.k_grid.size(); ++i) {
        table.row() << bands.k_grid[i] << "plus" << to_khz(bands.e_plus[i].real()) << to_khz(bands.e_plus[i].imag());
        table.row() << bands.k_grid[i] << "minus" << to_khz(bands.e_minus[i].real())
                    << to_khz(bands.e_minus[i].imag());
    }
    CommandOutput out;
    out.files.emplace_back("bloch.csv", table.str());
    const auto [lo, hi] = bloch_gap(c.v, c.w, c.t);
    out.extra["gap_khz"] = {to_khz(lo), to_khz(hi)};
    std::string winding = "undefined";
    if (classify_topology(c.v, c.w, c.t) != Topology::critical) {
        winding = std::to_string(winding_number(c.v, c.w, ph.theta1, ph.theta2));
    }
    out.extra["winding"] = winding;
    out.summary = fmt::format("bloch: gap_khz=[{:.6g}, {:.6g}] winding={} topology={}", to_khz(lo), to_khz(hi), winding,
                              to_string(classify_topology(c.v, c.w, c.t)));
    return out;
}

inline CommandOutput cmd_eit(const RunConfig& rc) {
    const DriveConfig drive = detail::config_drive(rc);
    const auto trace = eit_trace(rc.lattice, rc.couplings, rc.medium, drive, rc.delta.values(),
                                 EITOptions{rc.uncoupled, resolve_threads(rc.threads)});
    CsvTable table(rc.hash, detail::trace_columns);
    detail::trace_rows(table, trace.delta_grid, trace.rho_coupled, trace.rho_uncoupled, trace.t_coupled,
                       trace.t_uncoupled);
    CommandOutput out;
    out.files.emplace_back("eit.csv", table.str());
    out.extra["gamma_khz"] = to_khz(trace.gamma);
    out.extra["probe_power_ratios"] = probe_power_ratios(drive);
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < trace.delta_grid.size(); ++i) {
        if (std::abs(trace.delta_grid[i]) < std::abs(trace.delta_grid[i0])) {
            i0 = i;
        }
    }
    std::vector<std::string> parts;
    for (Eigen::Index j = 0; j < trace.t_coupled[i0].size(); ++j) {
        parts.push_back(fmt::format("{:.6g}/{:.6g}", trace.t_coupled[i0](j), trace.t_uncoupled[i0](j)));
    }
    out.summary = fmt::format("eit: T_coupled/T_uncoupled at delta={:.6g} kHz: [{}]", to_khz(trace.delta_grid[i0]),
                              fmt::join(parts, ", "));
    return out;
}

inline CommandOutput cmd_eigen_eit(const RunConfig& rc) {
    const auto grid = rc.delta.values();
    detail::require_zero_detuning_grid(grid);
    const auto s = detail::zero_detuning_spectrum(rc);
    CsvTable table(rc.hash, {"mode", "rate_khz", "recovered_khz", "spread_khz", "relative_change", "channels"});
    CsvTable traces(rc.hash, [] {
        auto cols = detail::trace_columns;
        cols.insert(cols.begin(), "mode");
        return cols;
    }());
    std::vector<double> recovered;
    for (std::size_t m = 0; m < s.rates.size(); ++m) {
        const DriveConfig drive =
            drive_for_input(s.modes.col(static_cast<Eigen::Index>(m)), rc.medium, rc.gamma, rc.probe_ratio);
        const auto trace = eit_trace(rc.lattice, rc.couplings, rc.medium, drive, grid,
                                     EITOptions{rc.uncoupled, resolve_threads(rc.threads)});
        const auto est = eigen_eit_extract(trace, trace.gamma, 2);
        double rel = 0.0;
        for (int j : est.averaged_channels) {
            rel += est.relative_change[static_cast<std::size_t>(j)];
        }
        rel /= static_cast<double>(est.averaged_channels.size());
        std::vector<std::string> ch;
        for (int j : est.averaged_channels) {
            ch.push_back(std::to_string(j + 1));
        }
        table.row() << static_cast<int>(m) << to_khz(s.rates[m]) << to_khz(est.mean) << to_khz(est.spread) << rel
                    << fmt::format("{}", fmt::join(ch, " "));
        recovered.push_back(est.mean);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (Eigen::Index j = 0; j < trace.rho_coupled[i].size(); ++j) {
                traces.row() << static_cast<int>(m) << to_khz(grid[i]) << static_cast<int>(j + 1)
                             << trace.rho_coupled[i](j).real() << trace.rho_coupled[i](j).imag()
                             << trace.rho_uncoupled[i](j).real() << trace.rho_uncoupled[i](j).imag()
                             << trace.t_coupled[i](j) << trace.t_uncoupled[i](j);
            }
        }
    }
    CommandOutput out;
    out.files.emplace_back("eigen_eit.csv", table.str());
    out.files.emplace_back("eigen_eit_traces.csv", traces.str());
    out.summary = fmt::format("eigen-eit: recovered_khz={} spectral_khz={}", detail::khz_list(recovered),
                              detail::khz_list(s.rates));
    return out;
}

inline CommandOutput cmd_chiral_test(const RunConfig& rc) {
    const auto r = chiral_ring_test(rc.couplings.v, rc.couplings.w, 0.0, rc.medium,
                                    ChiralRingOptions{rc.gamma, rc.probe_ratio});
    CsvTable table(rc.hash, {"channel", "input", "re_output_khz", "im_output_khz", "abs_output_khz", "re_drho12",
                             "im_drho12", "delta_t"});
    std::vector<std::string> mags;
    for (Eigen::Index j = 0; j < r.input.size(); ++j) {
        table.row() << static_cast<int>(j + 1) << r.input(j) << to_khz(r.output(j).real())
                    << to_khz(r.output(j).imag()) << to_khz(std::abs(r.output(j))) << r.coherence_difference(j).real()
                    << r.coherence_difference(j).imag() << r.transmission_difference(j);
        mags.push_back(fmt::format("{:.6g}", to_khz(std::abs(r.output(j)))));
    }
    CommandOutput out;
    out.files.emplace_back("chiral.csv", table.str());
    out.summary = fmt::format("chiral-test: |output|_khz=[{}]", fmt::join(mags, ", "));
    return out;
}

inline CommandOutput cmd_phase_diagram(const RunConfig& rc) {
    const auto grid = phase_diagram_scan(rc.couplings.w, rc.pd_v.values(), rc.pd_t.values(), 2 * rc.pd_n_cells,
                                         resolve_threads(rc.threads));
    CsvTable table(rc.hash, {"v_khz", "t_khz", "topology", "ipr_max", "mode", "rate_khz", "ipr"});
    std::map<std::string, int> counts;
    for (const auto& p : grid) {
        ++counts[std::string(to_string(p.topology))];
        for (std::size_t m = 0; m < p.rates.size(); ++m) {
            table.row() << to_khz(p.v) << to_khz(p.t) << to_string(p.topology) << p.ipr_max << static_cast<int>(m)
                        << to_khz(p.rates[m]) << p.ipr[m];
        }
    }
    CommandOutput out;
    out.files.emplace_back("phase_diagram.csv", table.str());
    std::vector<std::string> parts;
    for (const auto& [k, n] : counts) {
        parts.push_back(fmt::format("{}={}", k, n));
    }
    out.summary = fmt::format("phase-diagram: {} points ({})", grid.size(), fmt::join(parts, ", "));
    return out;
}

inline CommandOutput cmd_mc(const RunConfig& rc) {
    const DriveConfig drive = detail::config_drive(rc);
    const MCConfig mc = detail::mc_for_lattice(rc, drive);
    const MCResult res = mc_eit(mc, rc.medium);
    auto cols = detail::trace_columns;
    cols.insert(cols.end(), {"stderr_coupled", "stderr_uncoupled", "stderr_difference"});
    CsvTable table(rc.hash, cols);
    detail::trace_rows(table, res.delta_grid, res.rho12_coupled, res.rho12_uncoupled, res.t_coupled, res.t_uncoupled,
                       [&](CsvTable::Row& row, std::size_t i, Eigen::Index j) {
                           row << res.stderr_coupled[i](j) << res.stderr_uncoupled[i](j)
                               << res.stderr_difference[i](j);
                       });
    CsvTable coupling(rc.hash, {"j", "k", "rate_khz"});
    for (Eigen::Index j = 0; j < res.coupling_matrix.rows(); ++j) {
        for (Eigen::Index k = 0; k < res.coupling_matrix.cols(); ++k) {
            coupling.row() << static_cast<int>(j + 1) << static_cast<int>(k + 1) << to_khz(res.coupling_matrix(j, k));
        }
    }
    CommandOutput out;
    out.files.emplace_back("mc.csv", table.str());
    out.files.emplace_back("mc_coupling.csv", coupling.str());
    out.extra["trajectories"] = res.trajectories;
    out.extra["n_velocities"] = mc.n_velocities;
    out.extra["n_trajectories_per_velocity"] = mc.n_trajectories_per_velocity;
    out.extra["dwell_time_s"] = res.dwell_time;
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < res.delta_grid.size(); ++i) {
        if (std::abs(res.delta_grid[i]) < std::abs(res.delta_grid[i0])) {
            i0 = i;
        }
    }
    std::vector<std::string> parts;
    for (Eigen::Index j = 0; j < res.t_coupled[i0].size(); ++j) {
        parts.push_back(fmt::format("{:.6g}/{:.6g}", res.t_coupled[i0](j), res.t_uncoupled[i0](j)));
    }
    out.summary = fmt::format("mc: {} trajectories, T_coupled/T_uncoupled at delta={:.6g} kHz: [{}]",
                              res.trajectories, to_khz(res.delta_grid[i0]), fmt::join(parts, ", "));
    return out;
}

inline CommandOutput cmd_ode_check(const RunConfig& rc) {
    const double t_final = rc.ode_t_final_over_gamma / rc.gamma;
    IntegrationOptions opts;
    opts.samples = rc.ode_samples;

    // Reduced model against its closed-form fixed point.
    const DriveConfig drive = detail::config_drive(rc);
    const auto reduced = integrate_reduced(rc.lattice, rc.couplings, rc.medium, drive, rc.ode_delta, t_final,
                                           t_final / 20.0, opts);
    const auto h = build_hamiltonian(rc.lattice, rc.couplings, rc.ode_delta, rc.medium);
    const Eigen::VectorXcd fixed = steady_state(h, rc.ode_delta, rc.gamma, build_pin(drive, rc.medium));
    const double reduced_err = (reduced.rho12.back() - fixed).norm() / fixed.norm();

    // Full three-level model in the adiabatic regime Gamma = ratio * gamma.
    MediumParams fast = rc.medium;
    fast.Gamma = rc.ode_gamma_ratio * rc.gamma;
    fast.gamma23 = 0.5 * fast.Gamma;
    fast.set_optical_depth(rc.medium.optical_depth());
    const DriveConfig fast_drive = drive_for_input(detail::input_vector(rc), fast, rc.gamma, rc.probe_ratio);
    const auto full = integrate_full(rc.lattice, rc.couplings, fast, fast_drive, rc.ode_delta, {}, t_final,
                                     t_final / 20.0, opts);
    const auto fast_h = build_hamiltonian(rc.lattice, rc.couplings, rc.ode_delta, fast);
    const Eigen::VectorXcd fast_fixed = steady_state(fast_h, rc.ode_delta, rc.gamma, build_pin(fast_drive, fast));
    const double full_err = (full.rho12.back() - fast_fixed).norm() / fast_fixed.norm();
    const auto adiabatic = adiabatic_residual(full, fast, fast_drive);
    double worst = 0.0;
    for (double r : adiabatic.residual) {
        if (std::isfinite(r)) {
            worst = std::max(worst, r);
        }
    }

    struct Check {
        const char* name;
        double value;
        double tolerance;
    };
    const std::array<Check, 3> checks{{{"reduced_vs_steady_state", reduced_err, 1e-6},
                                        {"full_vs_reduced", full_err, 0.05},
                                        {"adiabatic_residual", worst, 0.01}}};
    CsvTable table(rc.hash, {"check", "value", "tolerance", "pass"});
    bool ok = true;
    for (const auto& c : checks) {
        const bool pass = c.value <= c.tolerance;
        ok = ok && pass;
        table.row() << c.name << c.value << c.tolerance << pass;
    }
    CsvTable traj(rc.hash, {"t_seconds", "channel", "re_rho12", "im_rho12", "re_rho13", "im_rho13", "re_rho32",
                            "im_rho32"});
    for (std::size_t i = 0; i < full.times.size(); ++i) {
        for (Eigen::Index j = 0; j < full.rho12[i].size(); ++j) {
            traj.row() << full.times[i] << static_cast<int>(j + 1) << full.rho12[i](j).real()
                       << full.rho12[i](j).imag() << full.rho13[i](j).real() << full.rho13[i](j).imag()
                       << full.rho32[i](j).real() << full.rho32[i](j).imag();
        }
    }
    CommandOutput out;
    out.files.emplace_back("ode_check.csv", table.str());
    out.files.emplace_back("ode_trajectory.csv", traj.str());
    out.status = ok ? exit_ok : exit_numerical;
    out.summary = fmt::format("ode-check: reduced_rel_err={:.3e} full_rel_err={:.3e} adiabatic_residual={:.3e} {}",
                              reduced_err, full_err, worst, ok ? "PASS" : "FAIL");
    return out;
}

inline CommandOutput dispatch(const std::string& name, const RunConfig& rc) {
    if (name == "calibrate") return cmd_calibrate(rc);
    if (name == "spectrum") return cmd_spectrum(rc);
    if (name == "bloch") return cmd_bloch(rc);
    if (name == "eit") return cmd_eit(rc);
    if (name == "eigen-eit") return cmd_eigen_eit(rc);
    if (name == "chiral-test") return cmd_chiral_test(rc);
    if (name == "phase-diagram") return cmd_phase_diagram(rc);
    if (name == "mc") return cmd_mc(rc);
    if (name == "ode-check") return cmd_ode_check(rc);
    throw ConfigError(fmt::format("unknown command '{}'", name));
}

inline json manifest_for(const std::string& name, const RunConfig& rc, const CommandOutput& out) {
    json files = json::array();
    for (const auto& [file, content] : out.files) {
        files.push_back({{"name", file}, {"sha1", content_hash(content)}});
    }
    json m = {{"command", name},   {"config_sha1", rc.hash}, {"config", rc.resolved},
              {"seed", rc.seed},   {"outputs", files},       {"summary", out.summary},
              {"status", out.status}};
    for (const auto& [k, v] : out.extra.items()) {
        m["results"][k] = v;
    }
    return m;
}

// Runs one command and writes its CSV files plus `<command>.manifest.json` into out_dir.
inline CommandOutput run_command(const std::string& name, const RunConfig& rc, const std::filesystem::path& out_dir) {
    CommandOutput out = dispatch(name, rc);
    out.files.emplace_back(name + ".manifest.json", manifest_for(name, rc, out).dump(2) + "\n");
    write_files(out_dir, out.files);
    return out;
}

// ---------------------------------------------------------------------------
// Plot data

struct PlotRecipe {
    const char* figure;
    const char* source;
    const char* x;
    const char* y;
};

inline const std::vector<PlotRecipe>& plot_recipes() {
    static const std::vector<PlotRecipe> recipes{
        {"spectrum", "spectrum.csv", "mode index", "dissipation rate (kHz); series: in_gap flag"},
        {"bloch-bands", "bloch.csv", "k", "band energy (kHz); series: band and part"},
        {"eit", "eit.csv", "delta_b (kHz)", "transmission; series: coupling and channel"},
        {"eigen-eit", "eigen_eit.csv", "mode index", "rate (kHz); series: spectral or recovered"},
        {"chiral-ring", "chiral.csv", "channel", "|H input| (kHz)"},
        {"phase-diagram", "phase_diagram.csv", "v (kHz)", "t (kHz); series: topology"},
        {"mc-eit", "mc.csv", "delta_b (kHz)", "transmission; series: coupling and channel"},
        {"calibration", "calibrate.csv", "distance (mm)", "rate (kHz); series: measured or model"},
    };
    return recipes;
}

// Long-format table with a `figure` tag column plus a JSON sidecar naming the axes.
inline std::string emit_plot_data(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError(fmt::format("{} is not a directory", dir.string()));
    }
    std::vector<std::pair<const PlotRecipe*, ParsedCsv>> inputs;
    for (const auto& r : plot_recipes()) {
        const auto path = dir / r.source;
        if (std::filesystem::exists(path)) {
            inputs.emplace_back(&r, parse_csv(read_file(path)));
        }
    }
    if (inputs.empty()) {
        std::vector<std::string> expected;
        for (const auto& r : plot_recipes()) {
            expected.emplace_back(r.source);
        }
        throw ConfigError(fmt::format("no result files in {}; expected any of: {}", dir.string(),
                                      fmt::join(expected, ", ")));
    }
    const std::string hash = inputs.front().second.config_hash;
    for (const auto& [r, csv] : inputs) {
        if (csv.config_hash != hash) {
            throw ConfigError(fmt::format("{} was produced by config {} but {} by {}; refusing to mix",
                                          inputs.front().first->source, hash, r->source, csv.config_hash));
        }
    }

    CsvTable table(hash, {"figure", "series", "x", "y"});
    json meta = {{"config_sha1", hash}, {"figures", json::object()}};
    for (const auto& [r, csv] : inputs) {
        const std::string fig = r->figure;
        meta["figures"][fig] = {{"source", r->source}, {"x", r->x}, {"y", r->y}};
        auto col = [&](const char* name) { return csv.column(name); };
        for (const auto& row : csv.rows) {
            auto num = [&](const char* name) { return parse_double(row.at(col(name))); };
            auto str = [&](const char* name) { return row.at(col(name)); };
            if (fig == "spectrum") {
                table.row() << fig << (str("in_gap") == "1" ? "in_gap" : "bulk") << num("index") << num("rate_khz");
            } else if (fig == "bloch-bands") {
                table.row() << fig << str("band") + "-re" << num("k") << num("re_khz");
                table.row() << fig << str("band") + "-im" << num("k") << num("im_khz");
            } else if (fig == "eit" || fig == "mc-eit") {
                table.row() << fig << "coupled-ch" + str("channel") << num("delta_khz") << num("t_coupled");
                table.row() << fig << "uncoupled-ch" + str("channel") << num("delta_khz") << num("t_uncoupled");
            } else if (fig == "eigen-eit") {
                table.row() << fig << "spectral" << num("mode") << num("rate_khz");
                table.row() << fig << "recovered" << num("mode") << num("recovered_khz");
            } else if (fig == "chiral-ring") {
                table.row() << fig << "output" << num("channel") << num("abs_output_khz");
            } else if (fig == "phase-diagram") {
                if (str("mode") == "0") {
                    table.row() << fig << str("topology") << num("v_khz") << num("t_khz");
                }
            } else if (fig == "calibration") {
                table.row() << fig << "measured" << num("distance_mm") << num("rate_khz");
                table.row() << fig << "model" << num("distance_mm") << num("model_khz");
            }
        }
    }
    write_files(dir, {{"plot_data.csv", table.str()}, {"plot_data.json", meta.dump(2) + "\n"}});
    return fmt::format("plot-data: {} rows from {} result files", table.size(), inputs.size());
}

} // namespace dlab
