// lattice.hpp — Beam geometry, medium constants, drive fields and the dissipative
// coupling Hamiltonian of a spinwave lattice.
//
// Sites are the ground-state coherences of 2N optical channels. Neighbouring
// channels couple through atoms flying between beams, which gives a purely
// imaginary hopping i*g at zero two-photon detuning and a flight phase
// delta_b * distance / speed otherwise.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dlab/error.hpp"
#include "dlab/units.hpp"

namespace dlab {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

enum class Boundary { line_open, ring_open, ring_closed };
enum class Truncation { nearest_neighbor, next_nearest_neighbor };

inline std::string_view to_string(Boundary b) {
    switch (b) {
    case Boundary::line_open: return "line-open";
    case Boundary::ring_open: return "ring-open";
    case Boundary::ring_closed: return "ring-closed";
    }
    return "?";
}

inline std::string_view to_string(Truncation t) {
    return t == Truncation::nearest_neighbor ? "nearest-neighbor" : "next-nearest-neighbor";
}

struct LatticeSpec {
    int n_cells{2};                      // N; the lattice has 2N channels
    double d1{mm(6.0)};                  // intra-cell spacing (m)
    double d2{mm(3.0)};                  // inter-cell spacing (m)
    Boundary boundary{Boundary::line_open};
    double beam_diameter{mm(1.5)};       // m
    Truncation truncation{Truncation::nearest_neighbor};
    double residual_all_to_all{0.0};     // epsilon, diagnostic only

    int n_sites() const { return 2 * n_cells; }
};

inline void validate(const LatticeSpec& spec) {
    if (spec.n_cells < 1) {
        throw ConfigError("n_cells must be >= 1");
    }
    if (!(spec.d1 > 0.0)) {
        throw ConfigError("d1 must be > 0");
    }
    if (!(spec.d2 > 0.0)) {
        throw ConfigError("d2 must be > 0");
    }
    if (!(spec.beam_diameter > 0.0) || !(spec.beam_diameter < std::min(spec.d1, spec.d2))) {
        throw ConfigError("beam_diameter must be in (0, min(d1, d2))");
    }
    if (!(spec.residual_all_to_all >= 0.0)) {
        throw ConfigError("residual_all_to_all must be >= 0");
    }
    if (spec.boundary == Boundary::line_open && spec.truncation != Truncation::nearest_neighbor) {
        // Collinear beams block beyond-nearest-neighbour flights via optical pumping.
        throw ConfigError("line-open boundary requires nearest-neighbor truncation");
    }
    if (spec.boundary == Boundary::ring_closed && spec.n_cells < 2) {
        throw ConfigError("ring-closed boundary needs n_cells >= 2");
    }
}

// Atomic and optical constants. Rates are angular (rad/s).
struct MediumParams {
    double gamma12{khz(100.0)};   // ground-state dephasing incl. transit
    double Gamma{khz(5750.0)};    // excited-state decay (Rb D1)
    double gamma23{khz(2875.0)};  // optical-coherence decay, Gamma/2 by default
    double nu{210.0};             // characteristic atom speed (m/s)
    double kappa{two_pi * 31.5};  // g(d) = kappa / d  (rad m / s)
    double alphaL{0.5 * khz(2875.0)}; // absorption prefactor (rad/s); optical depth * gamma23
    double cell_diameter{mm(25.0)};
    double cell_length{mm(50.0)};
    double temperature{313.15};   // K
    double atomic_mass{rb87_mass};

    // Bare (rho12 = 0) absorption is exp(-optical_depth).
    double optical_depth() const { return alphaL / gamma23; }
    void set_optical_depth(double od) { alphaL = od * gamma23; }
};

inline void validate(const MediumParams& m) {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ConfigError(std::string(name) + " must be finite and > 0");
        }
    };
    positive(m.gamma12, "gamma12");
    positive(m.Gamma, "Gamma");
    positive(m.gamma23, "gamma23");
    positive(m.nu, "nu");
    positive(m.kappa, "kappa");
    positive(m.cell_diameter, "cell_diameter");
    positive(m.cell_length, "cell_length");
    positive(m.temperature, "temperature");
    positive(m.atomic_mass, "atomic_mass");
    if (!(m.alphaL >= 0.0)) {
        throw ConfigError("alphaL must be >= 0");
    }
    if (m.gamma23 < 0.5 * m.Gamma * (1.0 - 1e-12)) {
        throw ConfigError("gamma23 must be >= Gamma/2");
    }
}

// Per-channel complex Rabi frequencies (rad/s).
struct DriveConfig {
    std::vector<cplx> omega_c;
    std::vector<cplx> omega_p;

    std::size_t channels() const { return omega_c.size(); }
};

inline void validate(const DriveConfig& drive, std::size_t n_sites) {
    if (drive.omega_c.size() != n_sites || drive.omega_p.size() != n_sites) {
        throw ConfigError("drive channel count " + std::to_string(drive.omega_c.size()) + "/" +
                          std::to_string(drive.omega_p.size()) + " does not match lattice size " +
                          std::to_string(n_sites));
    }
    for (std::size_t j = 0; j < n_sites; ++j) {
        if (std::abs(drive.omega_p[j]) > std::abs(drive.omega_c[j])) {
            throw ConfigError("probe exceeds control in channel " + std::to_string(j + 1) +
                              " (weak-probe regime required)");
        }
    }
}

struct HamiltonianMatrix {
    Eigen::MatrixXcd entries;
    double delta_b{0.0};

    Eigen::Index dim() const { return entries.rows(); }
};

struct Couplings {
    double v{0.0}; // intra-cell
    double w{0.0}; // inter-cell
    double t{0.0}; // next-nearest neighbour
};

// ---------------------------------------------------------------------------
// Coupling calibration

inline double coupling_from_distance(double d, const MediumParams& medium) {
    if (!(d > 0.0)) {
        throw DomainError("channel spacing must be > 0");
    }
    return medium.kappa / d;
}

struct CalibrationPoint {
    double distance; // m
    double rate;     // rad/s
};

// Least-squares fit of the 1/d law on the products kappa_i = d_i * g_i, i.e. the
// mean of d_i * g_i.
inline double fit_kappa(std::span<const CalibrationPoint> points) {
    if (points.empty()) {
        throw DomainError("fit_kappa needs at least one calibration point");
    }
    double sum = 0.0;
    for (const auto& p : points) {
        if (!(p.distance > 0.0)) {
            throw DomainError("calibration distance must be > 0");
        }
        sum += p.distance * p.rate;
    }
    return sum / static_cast<double>(points.size());
}

inline Couplings couplings_from_geometry(const LatticeSpec& spec, const MediumParams& medium) {
    Couplings c;
    c.v = coupling_from_distance(spec.d1, medium);
    c.w = coupling_from_distance(spec.d2, medium);
    if (spec.truncation == Truncation::next_nearest_neighbor) {
        c.t = coupling_from_distance(spec.d1 + spec.d2, medium);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Geometry

struct Point2 {
    double x{0.0};
    double y{0.0};
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Beam centres, centred on the origin. Line-open beams are collinear with
// alternating gaps d1, d2; ring geometries sit on a circle of circumference
// N (d1 + d2) with arc spacings d1, d2 (the open ring simply lacks the closing bond).
inline std::vector<Point2> beam_positions(const LatticeSpec& spec) {
    const int n = spec.n_sites();
    std::vector<double> arc(static_cast<std::size_t>(n), 0.0);
    for (int j = 1; j < n; ++j) {
        arc[j] = arc[j - 1] + ((j - 1) % 2 == 0 ? spec.d1 : spec.d2);
    }
    std::vector<Point2> pos(static_cast<std::size_t>(n));
    if (spec.boundary == Boundary::line_open) {
        const double mid = 0.5 * arc.back();
        for (int j = 0; j < n; ++j) {
            pos[j] = {arc[j] - mid, 0.0};
        }
        return pos;
    }
    const double circumference = spec.n_cells * (spec.d1 + spec.d2);
    const double radius = circumference / two_pi;
    for (int j = 0; j < n; ++j) {
        const double phi = arc[j] / radius;
        pos[j] = {radius * std::cos(phi), radius * std::sin(phi)};
    }
    return pos;
}

// Flight phases of the three bond families at a given two-photon detuning.
struct BondPhases {
    double theta1{0.0}; // intra-cell, delta_b d1 / nu
    double theta2{0.0}; // inter-cell, delta_b d2 / nu
    double theta3{0.0}; // next-nearest, delta_b (d1 + d2) / nu
};

inline BondPhases bond_phases(const LatticeSpec& spec, const MediumParams& medium, double delta_b) {
    return {delta_b * spec.d1 / medium.nu, delta_b * spec.d2 / medium.nu,
            delta_b * (spec.d1 + spec.d2) / medium.nu};
}

// ---------------------------------------------------------------------------
// Hamiltonian

inline HamiltonianMatrix build_hamiltonian(const LatticeSpec& spec, double v, double w, double t,
                                           double delta_b, const MediumParams& medium) {
    validate(spec);
    if (!(v >= 0.0) || !(w >= 0.0) || !(t >= 0.0)) {
        throw DomainError("coupling rates v, w, t must be >= 0");
    }
    if (t > 0.0 && spec.truncation == Truncation::nearest_neighbor) {
        throw ConfigError("t > 0 requires next-nearest-neighbor truncation");
    }
    if (spec.n_sites() % 2 != 0) {
        throw ConfigError("site count must be even");
    }

    const int n = spec.n_sites();
    const BondPhases ph = bond_phases(spec, medium, delta_b);
    const cplx hop_v = I * v * std::exp(I * ph.theta1);
    const cplx hop_w = I * w * std::exp(I * ph.theta2);
    const cplx hop_t = I * t * std::exp(I * ph.theta3);

    HamiltonianMatrix h;
    h.delta_b = delta_b;
    h.entries = Eigen::MatrixXcd::Zero(n, n);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> bonded =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);

    // Contributions accumulate so short rings fold wrapped bonds onto one entry.
    auto bond = [&](int a, int b, cplx value) {
        h.entries(a, b) += value;
        if (a != b) {
            h.entries(b, a) += value;
        }
        bonded(a, b) = bonded(b, a) = true;
    };

    for (int j = 0; j + 1 < n; ++j) {
        bond(j, j + 1, j % 2 == 0 ? hop_v : hop_w);
    }
    const bool nnn = spec.truncation == Truncation::next_nearest_neighbor;
    if (nnn) {
        for (int j = 0; j + 2 < n; ++j) {
            bond(j, j + 2, hop_t);
        }
    }
    if (spec.boundary == Boundary::ring_closed) {
        bond(n - 1, 0, hop_w);
        if (nnn) {
            bond(n - 2, 0, hop_t);
            bond(n - 1, 1, hop_t);
        }
    }

    if (spec.residual_all_to_all > 0.0) {
        const auto pos = beam_positions(spec);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                if (bonded(a, b)) {
                    continue;
                }
                const double d = distance(pos[a], pos[b]);
                const cplx value = I * spec.residual_all_to_all * (medium.kappa / d) *
                                   std::exp(I * (delta_b * d / medium.nu));
                h.entries(a, b) += value;
                h.entries(b, a) += value;
            }
        }
    }
    return h;
}

inline HamiltonianMatrix build_hamiltonian(const LatticeSpec& spec, const Couplings& c, double delta_b,
                                           const MediumParams& medium) {
    return build_hamiltonian(spec, c.v, c.w, c.t, delta_b, medium);
}

// ---------------------------------------------------------------------------
// Drive

// Pumping sources P_in[j] = -conj(Omega_c[j]) Omega_p[j] / gamma23.
inline Eigen::VectorXcd build_pin(const DriveConfig& drive, const MediumParams& medium) {
    if (drive.omega_c.size() != drive.omega_p.size()) {
        throw ConfigError("control and probe channel counts differ");
    }
    const auto n = static_cast<Eigen::Index>(drive.channels());
    Eigen::VectorXcd p(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        p(j) = -std::conj(drive.omega_c[j]) * drive.omega_p[j] / medium.gamma23;
    }
    return p;
}

// Total ground-coherence decay gamma12 + |Omega_c|^2 / gamma23. The model keeps a
// single decay common to all channels, so control amplitudes must agree.
inline double common_decay_rate(const MediumParams& medium, const DriveConfig& drive) {
    if (drive.omega_c.empty()) {
        throw ConfigError("drive has no channels");
    }
    const double ref = std::abs(drive.omega_c.front());
    for (const auto& oc : drive.omega_c) {
        if (std::abs(std::abs(oc) - ref) > 1e-9 * std::max(ref, 1.0)) {
            throw ConfigError("control Rabi frequencies must share one magnitude");
        }
    }
    return medium.gamma12 + ref * ref / medium.gamma23;
}

// Control Rabi frequency whose optical pumping lifts gamma12 to the total decay gamma.
inline double control_rabi_for_decay(const MediumParams& medium, double gamma) {
    if (!(gamma > medium.gamma12)) {
        throw ConfigError("total decay gamma must exceed gamma12");
    }
    return std::sqrt((gamma - medium.gamma12) * medium.gamma23);
}

// ---------------------------------------------------------------------------
// Symmetries

enum class SymmetryKind { chiral, inversion };

inline Eigen::MatrixXd symmetry_operator(SymmetryKind kind, int n_sites) {
    if (n_sites < 1) {
        throw DomainError("n_sites must be >= 1");
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_sites, n_sites);
    if (kind == SymmetryKind::chiral) {
        if (n_sites % 2 != 0) {
            throw DomainError("chiral operator needs an even site count");
        }
        for (int j = 0; j < n_sites; ++j) {
            s(j, j) = j % 2 == 0 ? 1.0 : -1.0;
        }
    } else {
        for (int j = 0; j < n_sites; ++j) {
            s(j, n_sites - 1 - j) = 1.0;
        }
    }
    return s;
}

} // namespace dlab
