// spectroscopy.hpp — EIT synthesis (steady state -> transmission), eigen-EIT rate
// extraction, drive preparation from eigenvectors and two-channel coupling calibration.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dlab/error.hpp"
#include "dlab/lattice.hpp"
#include "dlab/parallel.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

inline constexpr double undefined_transmission = std::numeric_limits<double>::quiet_NaN();

// Uncoupled reference: the H-dropped closed form, or the full lattice solved with
// only the detected channel's probe on.
enum class UncoupledMode { closed_form, single_probe };

struct EITTrace {
    std::vector<double> delta_grid;             // rad/s
    std::vector<Eigen::VectorXcd> rho_coupled;  // per grid point, per channel
    std::vector<Eigen::VectorXcd> rho_uncoupled;
    std::vector<Eigen::VectorXd> t_coupled;     // NaN where the probe is off
    std::vector<Eigen::VectorXd> t_uncoupled;
    DriveConfig drive;
    double gamma{0.0};                          // common decay used for synthesis

    std::size_t channels() const { return drive.channels(); }
};

// rho12 = -i ((delta_b - i gamma) I + H)^{-1} p_in
inline Eigen::VectorXcd steady_state(const HamiltonianMatrix& h, double delta_b, double gamma,
                                     const Eigen::VectorXcd& p_in) {
    const Eigen::Index n = h.dim();
    if (p_in.size() != n) {
        throw DomainError("p_in length does not match the Hamiltonian");
    }
    const Eigen::MatrixXcd a = h.entries + cplx(delta_b, -gamma) * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) {
        // Name the eigenvalue of H that cancels the on-site term.
        const Eigen::VectorXcd eig = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(h.entries, false).eigenvalues();
        const cplx shift(delta_b, -gamma);
        Eigen::Index worst = 0;
        for (Eigen::Index j = 1; j < n; ++j) {
            if (std::abs(eig(j) + shift) < std::abs(eig(worst) + shift)) {
                worst = j;
            }
        }
        throw NumericalError(fmt::format("steady-state system is singular: eigenvalue {}{:+}i of H "
                                         "cancels delta_b - i gamma = {}{:+}i",
                                         eig(worst).real(), eig(worst).imag(), delta_b, -gamma));
    }
    const Eigen::VectorXcd rhs = -I * p_in;
    Eigen::VectorXcd rho = lu.solve(rhs);
    Eigen::VectorXcd residual = rhs - a * rho;
    rho += lu.solve(residual); // one refinement sweep
    residual = rhs - a * rho;
    const double bound = 1e-12 * p_in.norm();
    if (residual.norm() > bound && residual.norm() > 0.0) {
        throw NumericalError(fmt::format("steady-state residual {:.3e} exceeds {:.3e}", residual.norm(), bound));
    }
    return rho;
}

inline Eigen::VectorXcd uncoupled_closed_form(double delta_b, double gamma, const Eigen::VectorXcd& p_in) {
    return (-I / cplx(delta_b, -gamma)) * p_in;
}

// Adiabatic optical coherence rho32 = (i Omega_p / gamma23)(1 + (Omega_c / Omega_p) rho12) and
// T = exp(-alphaL Im(rho32 / Omega_p)); channels with no probe are NaN.
inline Eigen::VectorXd transmission(const Eigen::VectorXcd& rho12, const DriveConfig& drive,
                                    const MediumParams& medium) {
    const auto n = static_cast<Eigen::Index>(drive.channels());
    if (rho12.size() != n) {
        throw DomainError("rho12 length does not match the drive");
    }
    Eigen::VectorXd t(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx op = drive.omega_p[j];
        if (op == 0.0) {
            t(j) = undefined_transmission;
            continue;
        }
        const cplx rho32 = (I * op / medium.gamma23) * (1.0 + drive.omega_c[j] / op * rho12(j));
        t(j) = std::exp(-medium.alphaL * (rho32 / op).imag());
    }
    return t;
}

inline Eigen::VectorXcd optical_coherence(const Eigen::VectorXcd& rho12, const DriveConfig& drive,
                                          const MediumParams& medium) {
    Eigen::VectorXcd rho32(rho12.size());
    for (Eigen::Index j = 0; j < rho12.size(); ++j) {
        const cplx op = drive.omega_p[j];
        rho32(j) = (I / medium.gamma23) * (op + drive.omega_c[j] * rho12(j));
    }
    return rho32;
}

struct EITOptions {
    UncoupledMode uncoupled{UncoupledMode::closed_form};
    int threads{1};
};

inline EITTrace eit_trace(const LatticeSpec& spec, const Couplings& couplings, const MediumParams& medium,
                          const DriveConfig& drive, const std::vector<double>& delta_grid,
                          const EITOptions& options = {}) {
    if (delta_grid.empty()) {
        throw DomainError("delta grid is empty");
    }
    if (!std::is_sorted(delta_grid.begin(), delta_grid.end())) {
        throw DomainError("delta grid must be sorted ascending");
    }
    validate(spec);
    validate(drive, static_cast<std::size_t>(spec.n_sites()));

    EITTrace trace;
    trace.delta_grid = delta_grid;
    trace.drive = drive;
    trace.gamma = common_decay_rate(medium, drive);
    const Eigen::VectorXcd p_in = build_pin(drive, medium);
    const std::size_t m = delta_grid.size();
    trace.rho_coupled.resize(m);
    trace.rho_uncoupled.resize(m);
    trace.t_coupled.resize(m);
    trace.t_uncoupled.resize(m);

    parallel_for(m, options.threads, [&](std::size_t i) {
        const double delta = delta_grid[i];
        const auto h = build_hamiltonian(spec, couplings, delta, medium);
        trace.rho_coupled[i] = steady_state(h, delta, trace.gamma, p_in);
        if (options.uncoupled == UncoupledMode::closed_form) {
            trace.rho_uncoupled[i] = uncoupled_closed_form(delta, trace.gamma, p_in);
        } else {
            Eigen::VectorXcd rho(p_in.size());
            for (Eigen::Index j = 0; j < p_in.size(); ++j) {
                Eigen::VectorXcd single = Eigen::VectorXcd::Zero(p_in.size());
                single(j) = p_in(j);
                rho(j) = steady_state(h, delta, trace.gamma, single)(j);
            }
            trace.rho_uncoupled[i] = rho;
        }
        trace.t_coupled[i] = transmission(trace.rho_coupled[i], drive, medium);
        trace.t_uncoupled[i] = transmission(trace.rho_uncoupled[i], drive, medium);
    });
    return trace;
}

// ---------------------------------------------------------------------------
// Eigen-EIT inversion

// gamma_sigma from the relative coherence change r = 1/(1 - gamma_sigma/gamma) - 1.
inline double rate_from_relative_change(double r, double gamma) {
    if (r == -1.0) {
        throw DomainError("relative change of -1 has no finite rate");
    }
    return gamma * r / (1.0 + r);
}

inline double relative_change_from_rate(double gamma_sigma, double gamma) {
    return 1.0 / (1.0 - gamma_sigma / gamma) - 1.0;
}

struct EigenEitEstimate {
    std::vector<double> per_channel;      // NaN for excluded channels
    std::vector<double> relative_change;  // r per channel, NaN for excluded
    std::vector<int> averaged_channels;   // 0-based, strongest probes first
    double mean{0.0};                     // over averaged_channels
    double spread{0.0};                   // max - min over all valid channels
    std::vector<std::string> warnings;
};

namespace detail {

inline std::size_t zero_detuning_index(const std::vector<double>& grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] == 0.0) {
            return i;
        }
    }
    throw DomainError("trace grid must contain delta_b = 0 exactly");
}

inline EigenEitEstimate summarize(std::vector<double> per_channel, std::vector<double> relative,
                                  const DriveConfig& drive, int averaged, std::vector<std::string> warnings) {
    EigenEitEstimate est;
    est.per_channel = std::move(per_channel);
    est.relative_change = std::move(relative);
    est.warnings = std::move(warnings);

    std::vector<int> valid;
    for (std::size_t j = 0; j < est.per_channel.size(); ++j) {
        if (std::isfinite(est.per_channel[j])) {
            valid.push_back(static_cast<int>(j));
        }
    }
    if (valid.empty()) {
        throw NumericalError("no channel carries a usable uncoupled coherence");
    }
    auto [lo, hi] = std::minmax_element(valid.begin(), valid.end(), [&](int a, int b) {
        return est.per_channel[a] < est.per_channel[b];
    });
    est.spread = est.per_channel[*hi] - est.per_channel[*lo];

    std::stable_sort(valid.begin(), valid.end(), [&](int a, int b) {
        return std::abs(drive.omega_p[a]) > std::abs(drive.omega_p[b]);
    });
    const std::size_t take = std::min<std::size_t>(valid.size(), static_cast<std::size_t>(std::max(1, averaged)));
    est.averaged_channels.assign(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(take));
    double sum = 0.0;
    for (int j : est.averaged_channels) {
        sum += est.per_channel[j];
    }
    est.mean = sum / static_cast<double>(take);
    return est;
}

} // namespace detail

// Pointwise inversion on the coherences at delta_b = 0; the mean runs over the
// `averaged_channels` channels with the strongest probes.
inline EigenEitEstimate eigen_eit_extract(const EITTrace& trace, double gamma, int averaged_channels = 2) {
    if (trace.rho_uncoupled.empty()) {
        throw DomainError("trace carries no uncoupled reference");
    }
    const std::size_t i0 = detail::zero_detuning_index(trace.delta_grid);
    const Eigen::VectorXcd& coupled = trace.rho_coupled[i0];
    const Eigen::VectorXcd& uncoupled = trace.rho_uncoupled[i0];
    const double floor = 1e-12 * uncoupled.cwiseAbs().maxCoeff();

    const auto n = static_cast<std::size_t>(uncoupled.size());
    std::vector<double> rates(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> rel(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> warnings;
    for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (!(std::abs(uncoupled(jj)) > floor)) {
            warnings.push_back(fmt::format("channel {} excluded: uncoupled coherence below floor", j + 1));
            continue;
        }
        const cplx r = (coupled(jj) - uncoupled(jj)) / uncoupled(jj);
        rel[j] = r.real();
        rates[j] = (gamma * r / (1.0 + r)).real();
    }
    return detail::summarize(std::move(rates), std::move(rel), trace.drive, averaged_channels, std::move(warnings));
}

// Same inversion from transmissions: -ln T / alphaL recovers Re(Omega_c rho12 / Omega_p),
// which equals the coherence ratio for real drives at delta_b = 0.
inline EigenEitEstimate eigen_eit_extract_from_transmission(const EITTrace& trace, double gamma,
                                                            const MediumParams& medium,
                                                            int averaged_channels = 2) {
    if (!(medium.alphaL > 0.0)) {
        throw DomainError("transmission inversion needs alphaL > 0");
    }
    const std::size_t i0 = detail::zero_detuning_index(trace.delta_grid);
    const auto n = trace.channels();
    std::vector<double> rates(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> rel(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> warnings;
    auto coherence_term = [&](double t) { return medium.gamma23 * (-std::log(t) / medium.alphaL) - 1.0; };
    for (std::size_t j = 0; j < n; ++j) {
        const double tc = trace.t_coupled[i0](static_cast<Eigen::Index>(j));
        const double tu = trace.t_uncoupled[i0](static_cast<Eigen::Index>(j));
        if (!std::isfinite(tc) || !std::isfinite(tu)) {
            warnings.push_back(fmt::format("channel {} excluded: no probe", j + 1));
            continue;
        }
        const double xu = coherence_term(tu);
        if (std::abs(xu) < 1e-12) {
            warnings.push_back(fmt::format("channel {} excluded: uncoupled signal below floor", j + 1));
            continue;
        }
        const double r = (coherence_term(tc) - xu) / xu;
        rel[j] = r;
        rates[j] = rate_from_relative_change(r, gamma);
    }
    return detail::summarize(std::move(rates), std::move(rel), trace.drive, averaged_channels, std::move(warnings));
}

// ---------------------------------------------------------------------------
// Drive preparation

// Probes follow the eigenvector's magnitudes; a pi phase carries negative entries so
// that P_in is proportional to -psi.
inline DriveConfig eigenstate_to_drive(const Eigen::VectorXd& psi, double control_rabi, double probe_scale) {
    if (!(control_rabi > 0.0)) {
        throw DomainError("control_rabi must be > 0");
    }
    DriveConfig d;
    d.omega_c.assign(static_cast<std::size_t>(psi.size()), cplx(control_rabi, 0.0));
    d.omega_p.resize(static_cast<std::size_t>(psi.size()));
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
        d.omega_p[j] = cplx(probe_scale * psi(j), 0.0);
    }
    return d;
}

inline DriveConfig eigenstate_to_drive(const Eigen::VectorXcd& psi, double control_rabi, double probe_scale) {
    if (psi.size() == 0) {
        throw DomainError("empty eigenvector");
    }
    Eigen::Index peak = 0;
    psi.cwiseAbs().maxCoeff(&peak);
    const cplx phase = std::abs(psi(peak)) > 0.0 ? std::conj(psi(peak)) / std::abs(psi(peak)) : cplx(1.0);
    const Eigen::VectorXcd aligned = psi * phase;
    if (aligned.imag().norm() > 1e-10 * aligned.norm()) {
        throw DomainError("eigenvector is complex beyond a global phase; detuned-eigenvector drives "
                          "are not supported");
    }
    return eigenstate_to_drive(Eigen::VectorXd(aligned.real()), control_rabi, probe_scale);
}

// |Omega_p|^2 relative to the strongest probe (probe power ratios).
inline std::vector<double> probe_power_ratios(const DriveConfig& drive) {
    double peak = 0.0;
    for (const auto& p : drive.omega_p) {
        peak = std::max(peak, std::norm(p));
    }
    std::vector<double> out;
    out.reserve(drive.omega_p.size());
    for (const auto& p : drive.omega_p) {
        out.push_back(peak > 0.0 ? std::norm(p) / peak : 0.0);
    }
    return out;
}

// Drive whose strongest probe is probe_ratio * Omega_c, with Omega_c set by the total decay.
inline DriveConfig drive_for_input(const Eigen::VectorXd& input, const MediumParams& medium, double gamma,
                                   double probe_ratio) {
    const double peak = input.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) {
        throw DomainError("input vector is zero");
    }
    const double control = control_rabi_for_decay(medium, gamma);
    return eigenstate_to_drive(input, control, probe_ratio * control / peak);
}

// ---------------------------------------------------------------------------
// Lineshape helpers

struct LorentzianFit {
    double amplitude{0.0};
    double offset{0.0};
    double half_width{0.0};
    double rss{0.0};

    double operator()(double x) const { return offset + amplitude / (1.0 + (x / half_width) * (x / half_width)); }
};

// Least squares offset + A / (1 + (x/w)^2) centred at zero. A and the offset are
// linear given w, so w is scanned on a log grid and polished by golden section.
inline LorentzianFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 4) {
        throw FitError("Lorentzian fit needs at least four samples");
    }
    auto solve = [&](double w) {
        double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double f = 1.0 / (1.0 + (x[i] / w) * (x[i] / w));
            s11 += f * f;
            s12 += f;
            s22 += 1.0;
            b1 += f * y[i];
            b2 += y[i];
        }
        const double det = s11 * s22 - s12 * s12;
        LorentzianFit fit;
        fit.half_width = w;
        fit.amplitude = (b1 * s22 - b2 * s12) / det;
        fit.offset = (s11 * b2 - s12 * b1) / det;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit(x[i]);
            fit.rss += r * r;
        }
        return fit;
    };

    double span = 0.0;
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        span = std::max(span, std::abs(x[i]));
        if (i > 0) {
            step = std::min(step, std::abs(x[i] - x[i - 1]));
        }
    }
    const double w_min = std::max(step, span * 1e-4) * 0.25;
    const double w_max = span * 10.0;
    constexpr int scan = 400;
    LorentzianFit best = solve(w_min);
    int best_i = 0;
    for (int i = 1; i <= scan; ++i) {
        const double w = w_min * std::pow(w_max / w_min, static_cast<double>(i) / scan);
        const LorentzianFit f = solve(w);
        if (f.rss < best.rss) {
            best = f;
            best_i = i;
        }
    }
    double a = std::log(w_min) + std::log(w_max / w_min) * std::max(0, best_i - 1) / scan;
    double b = std::log(w_min) + std::log(w_max / w_min) * std::min(scan, best_i + 1) / scan;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (solve(std::exp(c)).rss < solve(std::exp(d)).rss) {
            b = d;
        } else {
            a = c;
        }
    }
    const LorentzianFit polished = solve(std::exp(0.5 * (a + b)));
    return polished.rss < best.rss ? polished : best;
}

// Full width at half maximum of the extremum of y (linear interpolation between samples).
inline double full_width_half_max(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw FitError("FWHM needs at least three samples");
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (std::abs(y[i]) > std::abs(y[peak])) {
            peak = i;
        }
    }
    const double amp = y[peak];
    if (!(std::abs(amp) > 0.0)) {
        throw FitError("difference spectrum is flat; no extremum to measure");
    }
    const double half = 0.5 * amp;
    auto above = [&](std::size_t i) { return amp > 0 ? y[i] >= half : y[i] <= half; };
    std::size_t l = peak;
    while (l > 0 && above(l - 1)) {
        --l;
    }
    std::size_t r = peak;
    while (r + 1 < y.size() && above(r + 1)) {
        ++r;
    }
    if (l == 0 || r + 1 == y.size()) {
        throw FitError("half-maximum crossing lies outside the detuning grid");
    }
    auto cross = [&](std::size_t inside, std::size_t outside) {
        const double f = (half - y[outside]) / (y[inside] - y[outside]);
        return x[outside] + f * (x[inside] - x[outside]);
    };
    return cross(r, r + 1) - cross(l, l - 1);
}

// ---------------------------------------------------------------------------
// Two-channel calibration

enum class CalibrationMethod { difference_linewidth, peak_ratio };

inline double calibrate_coupling(const EITTrace& trace, CalibrationMethod method) {
    if (trace.channels() != 2) {
        throw DomainError("coupling calibration needs exactly two channels");
    }
    if (trace.rho_uncoupled.size() != trace.delta_grid.size() || trace.t_uncoupled.empty()) {
        throw DomainError("calibration needs coupled and uncoupled traces");
    }
    if (method == CalibrationMethod::peak_ratio) {
        const Eigen::VectorXcd p = build_pin(trace.drive, MediumParams{});
        if (std::abs(p(0) - p(1)) > 1e-12 * std::abs(p(0))) {
            throw DomainError("peak-ratio calibration needs the symmetric [1, 1] input");
        }
        return eigen_eit_extract(trace, trace.gamma, 2).mean;
    }

    std::vector<double> diff(trace.delta_grid.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = 0.5 * ((trace.t_coupled[i](0) - trace.t_uncoupled[i](0)) +
                         (trace.t_coupled[i](1) - trace.t_uncoupled[i](1)));
        scale = std::max(scale, std::abs(trace.t_uncoupled[i](0)));
    }
    double peak = 0.0;
    for (double d : diff) {
        peak = std::max(peak, std::abs(d));
    }
    if (!(peak > 1e-12 * scale)) {
        throw FitError("difference spectrum is flat; no coupling to resolve");
    }
    return full_width_half_max(trace.delta_grid, diff);
}

// ---------------------------------------------------------------------------
// Chiral ring probe

struct ChiralRingResult {
    Eigen::VectorXd input;                  // [1, 0, 1, 0, 1, 0]
    Eigen::VectorXcd output;                // H * input
    Eigen::VectorXcd coherence_difference;  // steady rho12 coupled - uncoupled
    Eigen::VectorXd transmission_difference; // NaN where the probe is off
};

struct ChiralRingOptions {
    double gamma{khz(143.0)};
    double probe_ratio{0.1};
};

inline ChiralRingResult chiral_ring_test(double v, double w, double delta_b, const MediumParams& medium,
                                         const ChiralRingOptions& options = {}) {
    LatticeSpec ring;
    ring.n_cells = 3;
    ring.boundary = Boundary::ring_closed;

    ChiralRingResult out;
    out.input = Eigen::VectorXd::Zero(6);
    out.input(0) = out.input(2) = out.input(4) = 1.0;

    const auto h = build_hamiltonian(ring, v, w, 0.0, delta_b, medium);
    out.output = h.entries * out.input.cast<cplx>();

    const DriveConfig drive = drive_for_input(out.input, medium, options.gamma, options.probe_ratio);
    const Eigen::VectorXcd p_in = build_pin(drive, medium);
    const double gamma = common_decay_rate(medium, drive);
    const Eigen::VectorXcd coupled = steady_state(h, delta_b, gamma, p_in);
    const Eigen::VectorXcd uncoupled = uncoupled_closed_form(delta_b, gamma, p_in);
    out.coherence_difference = coupled - uncoupled;
    out.transmission_difference = transmission(coupled, drive, medium) - transmission(uncoupled, drive, medium);
    return out;
}

} // namespace dlab
