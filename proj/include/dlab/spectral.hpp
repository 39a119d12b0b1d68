// spectral.hpp — Dissipation spectra, Bloch bands, winding number and phase-diagram
// scans for the dissipative SSH Hamiltonian.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "dlab/error.hpp"
#include "dlab/lattice.hpp"
#include "dlab/parallel.hpp"

namespace dlab {

enum class Topology { topological, trivial, critical };

inline std::string_view to_string(Topology t) {
    switch (t) {
    case Topology::topological: return "topological";
    case Topology::trivial: return "trivial";
    case Topology::critical: return "critical";
    }
    return "?";
}

struct DissipationSpectrum {
    std::vector<double> rates; // gamma_sigma, ascending (rad/s)
    Eigen::MatrixXd modes;     // real unit-norm eigenvectors in columns
    double gap_lower{0.0};     // open interval (gap_lower, gap_upper) free of bulk bands
    double gap_upper{0.0};
    double gap_half_width{0.0};
    std::vector<bool> in_gap;
    std::vector<double> ipr;
    Topology topology{Topology::critical};
    std::optional<int> winding;
};

struct BlochBand {
    std::vector<double> k_grid;
    std::vector<cplx> e_plus;  // branch with the larger imaginary part
    std::vector<cplx> e_minus;
};

struct EigenPair {
    cplx value;
    Eigen::VectorXcd vector;
};

namespace detail {

inline double critical_tolerance(double a, double b) { return 1e-12 * std::max(std::abs(a), std::abs(b)); }

inline double inverse_participation(const Eigen::Ref<const Eigen::VectorXd>& mode) {
    return mode.array().square().square().sum();
}

// Fixes the overall sign: the first component of maximal magnitude is positive.
inline void canonical_sign(Eigen::Ref<Eigen::VectorXd> mode) {
    const double peak = mode.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < mode.size(); ++j) {
        if (std::abs(mode(j)) >= peak * (1.0 - 1e-9)) {
            if (mode(j) < 0.0) {
                mode = -mode;
            }
            return;
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Bloch bands

// E(k) = 2 i t e^{i theta3} cos k +- sqrt(Delta(k)) with equal sublattice NNN rates.
inline std::pair<cplx, cplx> bloch_eigenvalues(double v, double w, double t, double theta1, double theta2,
                                               double theta3, double k) {
    const cplx a = I * v * std::exp(I * theta1);
    const cplx b = I * w * std::exp(I * theta2);
    const cplx diag = 2.0 * I * t * std::exp(I * theta3) * std::cos(k);
    const cplx root = std::sqrt(a * a + b * b + 2.0 * a * b * std::cos(k));
    cplx e1 = diag + root;
    cplx e2 = diag - root;
    if (e2.imag() > e1.imag() || (e2.imag() == e1.imag() && e2.real() > e1.real())) {
        std::swap(e1, e2);
    }
    return {e1, e2};
}

inline BlochBand bloch_bands(double v, double w, double t, double theta1, double theta2, double theta3,
                             int k_count) {
    if (k_count < 2) {
        throw DomainError("bloch_bands needs k_count >= 2");
    }
    BlochBand band;
    band.k_grid.resize(k_count);
    band.e_plus.resize(k_count);
    band.e_minus.resize(k_count);
    for (int i = 0; i < k_count; ++i) {
        const double k = -pi + two_pi * i / (k_count - 1);
        const auto [ep, em] = bloch_eigenvalues(v, w, t, theta1, theta2, theta3, k);
        band.k_grid[i] = k;
        band.e_plus[i] = ep;
        band.e_minus[i] = em;
    }
    return band;
}

// Dissipative gap of the zero-phase bands: (max of lower band, min of upper band).
// Empty gaps collapse to a point.
inline std::pair<double, double> bloch_gap(double v, double w, double t, int k_count = 2048) {
    if (t == 0.0) {
        const double g = std::abs(v - w);
        return {-g, g};
    }
    const BlochBand band = bloch_bands(v, w, t, 0.0, 0.0, 0.0, k_count);
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k_count; ++i) {
        lower = std::max(lower, band.e_minus[i].imag());
        upper = std::min(upper, band.e_plus[i].imag());
    }
    if (upper < lower) {
        const double mid = 0.5 * (upper + lower);
        return {mid, mid};
    }
    return {lower, upper};
}

// ---------------------------------------------------------------------------
// Topology

// Winding of the Bloch off-diagonal element i v e^{i theta1} + i w e^{i(theta2 + k)}
// as k runs once around the Brillouin zone (counter-clockwise positive).
inline int winding_number(double v, double w, double theta1, double theta2, int k_count = 4096) {
    if (v == 0.0 && w == 0.0) {
        throw DomainError("winding undefined for v = w = 0");
    }
    if (std::abs(std::abs(v) - std::abs(w)) <= detail::critical_tolerance(v, w)) {
        throw DomainError("gapless: |v| = |w|, winding undefined");
    }
    auto h = [&](double k) { return I * v * std::exp(I * theta1) + I * w * std::exp(I * (theta2 + k)); };
    double accumulated = 0.0;
    cplx previous = h(-pi);
    for (int i = 1; i <= k_count; ++i) {
        const cplx current = h(-pi + two_pi * i / k_count);
        accumulated += std::arg(current / previous);
        previous = current;
    }
    const double winding = accumulated / two_pi;
    const double rounded = std::round(winding);
    if (std::abs(winding - rounded) >= 1e-9) {
        throw NumericalError(fmt::format("winding {} is not an integer (residual {:.3e})", winding,
                                         winding - rounded));
    }
    return static_cast<int>(rounded);
}

inline Topology classify_topology(double v, double w, double t) {
    if (v < 0.0 || w < 0.0 || t < 0.0) {
        throw DomainError("classify_topology expects nonnegative rates");
    }
    if (std::abs(v - w) <= detail::critical_tolerance(v, w)) {
        return Topology::critical;
    }
    if (t > 0.0) {
        if (std::abs(t / w - 0.5) <= 1e-12) {
            return Topology::critical;
        }
        return (v < w && t / w < 0.5) ? Topology::topological : Topology::trivial;
    }
    return v < w ? Topology::topological : Topology::trivial;
}

// ---------------------------------------------------------------------------
// Real-space spectra

inline std::vector<EigenPair> complex_eigen(const HamiltonianMatrix& h) {
    const Eigen::Index n = h.dim();
    if (h.entries.rows() != h.entries.cols()) {
        throw DomainError("complex_eigen needs a square matrix");
    }
    if (n == 0) {
        return {};
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h.entries, true);
    if (solver.info() != Eigen::Success) {
        throw NumericalError(fmt::format("complex eigensolver did not converge for {}x{} matrix "
                                         "(iteration cap {} per eigenvalue)",
                                         n, n, solver.getMaxIterations()));
    }
    std::vector<EigenPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n));
    const double scale = std::max(h.entries.norm(), std::numeric_limits<double>::min());
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXcd vec = solver.eigenvectors().col(j);
        vec.normalize();
        const cplx lambda = solver.eigenvalues()(j);
        const double residual = (h.entries * vec - lambda * vec).norm();
        if (residual > 1e-9 * scale) {
            throw NumericalError(fmt::format("eigenpair {} residual {:.3e} exceeds bound {:.3e}", j,
                                             residual, 1e-9 * scale));
        }
        pairs.push_back({lambda, std::move(vec)});
    }
    std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
        if (a.value.imag() != b.value.imag()) {
            return a.value.imag() < b.value.imag();
        }
        return a.value.real() < b.value.real();
    });
    return pairs;
}

// Spectrum of H0 = i M at zero two-photon detuning via the real symmetric M.
inline DissipationSpectrum dissipation_spectrum(const HamiltonianMatrix& h, double v, double w, double t) {
    if (h.delta_b != 0.0) {
        throw DomainError("dissipation_spectrum requires a Hamiltonian built at delta_b = 0; "
                          "use complex_eigen for detuned matrices");
    }
    const Eigen::Index n = h.dim();
    const double scale = h.entries.norm();
    if ((h.entries - h.entries.transpose()).norm() > 1e-14 * scale) {
        throw NumericalError("Hamiltonian is not complex symmetric");
    }
    if (h.entries.real().norm() > 1e-12 * scale) {
        throw NumericalError("Hamiltonian at delta_b = 0 must be purely imaginary");
    }

    const Eigen::MatrixXd m = h.entries.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver failed");
    }

    DissipationSpectrum s;
    s.rates.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    s.modes = solver.eigenvectors();

    // Inside numerically degenerate blocks, rotate to definite inversion parity
    // (even first) when the matrix commutes with inversion.
    const Eigen::MatrixXd inversion = symmetry_operator(SymmetryKind::inversion, static_cast<int>(n));
    const bool inversion_symmetric = (inversion * m * inversion - m).norm() <= 1e-12 * std::max(scale, 1.0);
    const double degeneracy_tol = 1e-10 * std::max(scale, std::numeric_limits<double>::min());
    for (Eigen::Index begin = 0; begin < n;) {
        Eigen::Index end = begin + 1;
        while (end < n && s.rates[end] - s.rates[end - 1] <= degeneracy_tol) {
            ++end;
        }
        const Eigen::Index size = end - begin;
        if (size > 1 && inversion_symmetric) {
            const Eigen::MatrixXd block = s.modes.middleCols(begin, size);
            const Eigen::MatrixXd parity = block.transpose() * inversion * block;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rot(0.5 * (parity + parity.transpose()));
            // Ascending parity eigenvalues; reverse so the even (+1) combination leads.
            const Eigen::MatrixXd rotated = block * rot.eigenvectors().rowwise().reverse();
            s.modes.middleCols(begin, size) = rotated;
        }
        begin = end;
    }

    s.ipr.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        s.modes.col(j).normalize();
        detail::canonical_sign(s.modes.col(j));
        s.ipr[j] = detail::inverse_participation(s.modes.col(j));
    }

    const auto [lo, hi] = bloch_gap(v, w, t);
    s.gap_lower = lo;
    s.gap_upper = hi;
    s.gap_half_width = 0.5 * (hi - lo);
    s.in_gap.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        s.in_gap[j] = s.rates[j] > lo && s.rates[j] < hi;
    }
    s.topology = classify_topology(v, w, t);
    if (s.topology != Topology::critical && !(v == 0.0 && w == 0.0)) {
        s.winding = winding_number(v, w, 0.0, 0.0);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Phase diagram

struct PhaseDiagramPoint {
    double v{0.0};
    double t{0.0};
    std::vector<double> rates;
    std::vector<double> ipr;
    double ipr_max{0.0};
    Topology topology{Topology::critical};
};

// Open chain with next-nearest-neighbour bonds, scanned row-major over (v, t).
inline std::vector<PhaseDiagramPoint> phase_diagram_scan(double w, const std::vector<double>& v_range,
                                                         const std::vector<double>& t_range, int n_sites,
                                                         int threads = 1) {
    if (v_range.empty() || t_range.empty()) {
        throw DomainError("phase_diagram_scan needs nonempty v and t ranges");
    }
    if (n_sites < 4 || n_sites % 2 != 0) {
        throw DomainError("phase_diagram_scan needs an even site count >= 4");
    }
    LatticeSpec spec;
    spec.n_cells = n_sites / 2;
    spec.boundary = Boundary::ring_open;
    spec.truncation = Truncation::next_nearest_neighbor;
    const MediumParams medium;

    std::vector<PhaseDiagramPoint> grid(v_range.size() * t_range.size());
    parallel_for(grid.size(), threads, [&](std::size_t idx) {
        const double v = v_range[idx / t_range.size()];
        const double t = t_range[idx % t_range.size()];
        const auto h = build_hamiltonian(spec, v, w, t, 0.0, medium);
        const auto s = dissipation_spectrum(h, v, w, t);
        auto& p = grid[idx];
        p.v = v;
        p.t = t;
        p.rates = s.rates;
        p.ipr = s.ipr;
        p.ipr_max = *std::max_element(s.ipr.begin(), s.ipr.end());
        p.topology = s.topology;
    });
    return grid;
}

} // namespace dlab
