// dynamics.hpp — time-domain integration of the reduced coherence equations and of the
// frozen-population three-level model, used as oracles for the steady-state solver.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "dlab/error.hpp"
#include "dlab/lattice.hpp"
#include "dlab/spectroscopy.hpp"

namespace dlab {

struct TrajectoryRecord {
    std::vector<double> times;                  // s
    std::vector<Eigen::VectorXcd> rho12;
    std::vector<Eigen::VectorXcd> rho13;        // full model only
    std::vector<Eigen::VectorXcd> rho32;        // full model only

    bool full_model() const { return !rho32.empty(); }
};

struct IntegrationOptions {
    double rel_tol{1e-10};
    double abs_tol{0.0};           // 0 -> 1e-12 times the natural state scale
    int samples{201};              // output times, uniform in [0, t_final]
    std::optional<Eigen::VectorXcd> initial_rho12;
};

// One-photon detunings per channel (rad/s); the ground-state detuning is delta_b.
struct OpticalDetunings {
    std::vector<double> delta1;  // probe-side, acts on rho13
    std::vector<double> delta2;  // control-side, acts on rho32
};

namespace detail {

using state_type = std::vector<cplx>;

inline std::vector<double> output_times(double t_final, int samples) {
    if (!(t_final > 0.0)) {
        throw DomainError("t_final must be > 0");
    }
    if (samples < 2) {
        throw DomainError("need at least two output samples");
    }
    std::vector<double> times(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        times[static_cast<std::size_t>(i)] = t_final * static_cast<double>(i) / (samples - 1);
    }
    return times;
}

template <class System, class Observer>
void run_dopri5(System&& sys, state_type& x, const std::vector<double>& times, double dt_max, double abs_tol,
                double rel_tol, Observer&& obs) {
    namespace ode = boost::numeric::odeint;
    using stepper = ode::runge_kutta_dopri5<state_type>;
    if (!(dt_max > 0.0)) {
        throw DomainError("dt_max must be > 0");
    }
    auto controlled = ode::make_controlled(abs_tol, rel_tol, dt_max, stepper());
    const double dt0 = std::min(dt_max, times.back() * 1e-6);
    try {
        ode::integrate_times(controlled, sys, x, times.begin(), times.end(), dt0, obs,
                             ode::max_step_checker(1000000));
    } catch (const ode::step_adjustment_error& e) {
        throw NumericalError(fmt::format("integrator step size underflow: {}", e.what()));
    } catch (const ode::odeint_error& e) {
        throw NumericalError(fmt::format("integrator failed: {}", e.what()));
    }
    for (const cplx& z : x) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw NumericalError("integrator produced a non-finite state");
        }
    }
}

} // namespace detail

// d rho12/dt = -i[(delta_b - i gamma) I + H] rho12 + P_in
inline TrajectoryRecord integrate_reduced(const LatticeSpec& spec, const Couplings& couplings,
                                          const MediumParams& medium, const DriveConfig& drive, double delta_b,
                                          double t_final, double dt_max, const IntegrationOptions& options = {}) {
    validate(spec);
    validate(drive, static_cast<std::size_t>(spec.n_sites()));
    const auto times = detail::output_times(t_final, options.samples);
    const auto h = build_hamiltonian(spec, couplings, delta_b, medium);
    const double gamma = common_decay_rate(medium, drive);
    const Eigen::Index n = h.dim();
    const Eigen::MatrixXcd a = -I * (h.entries + cplx(delta_b, -gamma) * Eigen::MatrixXcd::Identity(n, n));
    const Eigen::VectorXcd p_in = build_pin(drive, medium);

    detail::state_type x(static_cast<std::size_t>(n), cplx(0.0));
    if (options.initial_rho12) {
        if (options.initial_rho12->size() != n) {
            throw DomainError("initial state length does not match the lattice");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            x[static_cast<std::size_t>(j)] = (*options.initial_rho12)(j);
        }
    }
    const double scale = std::max(p_in.cwiseAbs().maxCoeff() / gamma, 1e-300);
    const double abs_tol = options.abs_tol > 0.0 ? options.abs_tol : 1e-12 * scale;

    auto sys = [&](const detail::state_type& s, detail::state_type& ds, double /*t*/) {
        Eigen::Map<const Eigen::VectorXcd> rho(s.data(), n);
        Eigen::Map<Eigen::VectorXcd> out(ds.data(), n);
        out.noalias() = a * rho + p_in;
    };
    TrajectoryRecord rec;
    auto obs = [&](const detail::state_type& s, double t) {
        rec.times.push_back(t);
        rec.rho12.push_back(Eigen::Map<const Eigen::VectorXcd>(s.data(), n));
    };
    detail::run_dopri5(sys, x, times, dt_max, abs_tol, options.rel_tol, obs);
    return rec;
}

// Frozen populations rho22 = 1, rho11 = rho33 = 0; per channel
//   rho12' = -(gamma12 + i delta_b) rho12 + i conj(Oc) rho32 - i Op rho13 - i (H rho12)
//   rho13' = -(gamma23 + i delta1) rho13 - i conj(Op) rho12
//   rho32' = -(gamma23 - i delta2) rho32 + i Op + i Oc rho12
inline TrajectoryRecord integrate_full(const LatticeSpec& spec, const Couplings& couplings,
                                       const MediumParams& medium, const DriveConfig& drive, double delta_b,
                                       const OpticalDetunings& detunings, double t_final, double dt_max,
                                       const IntegrationOptions& options = {}) {
    validate(spec);
    validate(medium);
    const auto n_sites = static_cast<std::size_t>(spec.n_sites());
    validate(drive, n_sites);
    auto per_channel = [&](const std::vector<double>& d, const char* name) {
        if (d.empty()) {
            return std::vector<double>(n_sites, 0.0);
        }
        if (d.size() != n_sites) {
            throw DomainError(fmt::format("{} needs one entry per channel", name));
        }
        return d;
    };
    const auto delta1 = per_channel(detunings.delta1, "delta1");
    const auto delta2 = per_channel(detunings.delta2, "delta2");
    const auto times = detail::output_times(t_final, options.samples);
    const auto h = build_hamiltonian(spec, couplings, delta_b, medium);
    const auto n = static_cast<Eigen::Index>(n_sites);

    detail::state_type x(3 * n_sites, cplx(0.0));
    if (options.initial_rho12) {
        if (options.initial_rho12->size() != n) {
            throw DomainError("initial state length does not match the lattice");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            x[static_cast<std::size_t>(j)] = (*options.initial_rho12)(j);
        }
    }
    double probe_peak = 0.0;
    for (const auto& p : drive.omega_p) {
        probe_peak = std::max(probe_peak, std::abs(p));
    }
    const double scale = std::max(probe_peak / medium.gamma23, 1e-300);
    const double abs_tol = options.abs_tol > 0.0 ? options.abs_tol : 1e-12 * scale;

    auto sys = [&](const detail::state_type& s, detail::state_type& ds, double /*t*/) {
        Eigen::Map<const Eigen::VectorXcd> r12(s.data(), n);
        const Eigen::VectorXcd coupling = h.entries * r12;
        for (std::size_t j = 0; j < n_sites; ++j) {
            const cplx p12 = s[j];
            const cplx p13 = s[n_sites + j];
            const cplx p32 = s[2 * n_sites + j];
            const cplx oc = drive.omega_c[j];
            const cplx op = drive.omega_p[j];
            ds[j] = -cplx(medium.gamma12, delta_b) * p12 + I * std::conj(oc) * p32 - I * op * p13 -
                    I * coupling(static_cast<Eigen::Index>(j));
            ds[n_sites + j] = -cplx(medium.gamma23, delta1[j]) * p13 - I * std::conj(op) * p12;
            ds[2 * n_sites + j] = -cplx(medium.gamma23, -delta2[j]) * p32 + I * op + I * oc * p12;
        }
    };
    TrajectoryRecord rec;
    auto obs = [&](const detail::state_type& s, double t) {
        rec.times.push_back(t);
        rec.rho12.push_back(Eigen::Map<const Eigen::VectorXcd>(s.data(), n));
        rec.rho13.push_back(Eigen::Map<const Eigen::VectorXcd>(s.data() + n_sites, n));
        rec.rho32.push_back(Eigen::Map<const Eigen::VectorXcd>(s.data() + 2 * n_sites, n));
    };
    detail::run_dopri5(sys, x, times, dt_max, abs_tol, options.rel_tol, obs);
    return rec;
}

struct AdiabaticResidual {
    std::vector<double> residual;  // NaN where rho32 vanishes
    std::vector<bool> flagged;     // residual > threshold
};

// |rho32 - adiabatic(rho12)| / |rho32| per channel at the final time.
inline AdiabaticResidual adiabatic_residual(const TrajectoryRecord& full, const MediumParams& medium,
                                            const DriveConfig& drive, const OpticalDetunings& detunings = {},
                                            double threshold = 0.1) {
    if (!full.full_model() || full.rho12.empty()) {
        throw DomainError("adiabatic residual needs a full-model record");
    }
    const Eigen::VectorXcd& r12 = full.rho12.back();
    const Eigen::VectorXcd& r32 = full.rho32.back();
    const auto n = static_cast<std::size_t>(r12.size());
    if (drive.channels() != n) {
        throw DomainError("drive does not match the record");
    }
    AdiabaticResidual out;
    out.residual.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.flagged.assign(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (std::abs(r32(jj)) == 0.0) {
            continue;
        }
        const double d2 = detunings.delta2.empty() ? 0.0 : detunings.delta2.at(j);
        const cplx predicted = I * (drive.omega_p[j] + drive.omega_c[j] * r12(jj)) / cplx(medium.gamma23, -d2);
        out.residual[j] = std::abs(r32(jj) - predicted) / std::abs(r32(jj));
        out.flagged[j] = out.residual[j] > threshold;
    }
    return out;
}

} // namespace dlab
