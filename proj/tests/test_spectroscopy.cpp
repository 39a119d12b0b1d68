// test_spectroscopy.cpp — Steady states, transmission, eigen-EIT inversion, calibration
// and the chiral ring probe.

#include <gtest/gtest.h>

#include "dlab/montecarlo.hpp"
#include "dlab/spectroscopy.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

const MediumParams medium{};
const double gamma_total = khz(143.0);

DissipationSpectrum four_site_spectrum(double v, double w) {
    return dissipation_spectrum(build_hamiltonian(LatticeSpec{}, v, w, 0.0, 0.0, medium), v, w, 0.0);
}

LatticeSpec pair_lattice(double d) {
    LatticeSpec s;
    s.n_cells = 1;
    s.d1 = s.d2 = d;
    return s;
}

} // namespace

TEST(SteadyState, SolvesLinearSystem) {
    oracle::Draws draws(3);
    for (int i = 0; i < 20; ++i) {
        const double delta = khz(draws.uniform(-300, 300));
        const auto h = build_hamiltonian(LatticeSpec{}, khz(draws.uniform(0, 20)), khz(draws.uniform(0, 20)), 0.0,
                                         delta, medium);
        Eigen::VectorXcd p(4);
        for (int j = 0; j < 4; ++j) {
            p(j) = cplx(draws.uniform(-1, 1), draws.uniform(-1, 1));
        }
        const auto rho = steady_state(h, delta, gamma_total, p);
        const Eigen::MatrixXcd a = h.entries + cplx(delta, -gamma_total) * Eigen::MatrixXcd::Identity(4, 4);
        EXPECT_LT((I * a * rho - p).norm(), 1e-12 * p.norm());
    }
}

TEST(SteadyState, NoCouplingEqualsClosedForm) {
    const auto h = build_hamiltonian(LatticeSpec{}, 0.0, 0.0, 0.0, khz(20.0), medium);
    const Eigen::VectorXcd p = Eigen::VectorXcd::Constant(4, cplx(0.3, -0.1));
    const auto rho = steady_state(h, khz(20.0), gamma_total, p);
    EXPECT_LT((rho - uncoupled_closed_form(khz(20.0), gamma_total, p)).norm(), 1e-15 * rho.norm());
}

TEST(SteadyState, SingularSystemNamesEigenvalue) {
    // H = i g sigma_x has eigenvalue i g; gamma = g makes -i gamma + i g = 0.
    HamiltonianMatrix h;
    h.entries = Eigen::MatrixXcd::Zero(2, 2);
    h.entries(0, 1) = h.entries(1, 0) = I * 3.0;
    try {
        steady_state(h, 0.0, 3.0, Eigen::VectorXcd::Ones(2));
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos);
    }
}

TEST(Transmission, UncoupledClosedFormAndUndefinedChannel) {
    const double oc = control_rabi_for_decay(medium, gamma_total);
    const DriveConfig drive{{cplx(oc), cplx(oc)}, {cplx(0.1 * oc), cplx(0.0)}};
    const auto p = build_pin(drive, medium);
    const auto rho = uncoupled_closed_form(0.0, gamma_total, p);
    const auto t = transmission(rho, drive, medium);
    // Bare absorption exp(-OD) reduced by the EIT factor gamma12 / gamma.
    EXPECT_NEAR(t(0), std::exp(-medium.optical_depth() * medium.gamma12 / gamma_total), 1e-14);
    EXPECT_TRUE(std::isnan(t(1)));
}

TEST(Transmission, ProbePhaseDoesNotChangeEigenDriveTransmission) {
    const double oc = control_rabi_for_decay(medium, gamma_total);
    const DriveConfig plus{{cplx(oc)}, {cplx(0.1 * oc)}};
    const DriveConfig minus{{cplx(oc)}, {cplx(-0.1 * oc)}};
    const auto t1 = transmission(uncoupled_closed_form(khz(30.0), gamma_total, build_pin(plus, medium)), plus, medium);
    const auto t2 = transmission(uncoupled_closed_form(khz(30.0), gamma_total, build_pin(minus, medium)), minus, medium);
    EXPECT_NEAR(t1(0), t2(0), 1e-15);
}

TEST(EigenEit, RelativeChangeInversionProperty) {
    oracle::Draws draws(8);
    for (int i = 0; i < 200; ++i) {
        const double gs = draws.uniform(-100, 100), g = draws.uniform(120, 400);
        const double r = relative_change_from_rate(gs, g);
        EXPECT_NEAR(r, oracle::relative_change(gs, g), 1e-13);
        EXPECT_NEAR(rate_from_relative_change(r, g) / gs, 1.0, 1e-12);
    }
    EXPECT_THROW(rate_from_relative_change(-1.0, 1.0), DomainError);
}

TEST(EigenEit, RoundTripRecoversEveryRate) {
    const auto s = four_site_spectrum(khz(5.0), khz(11.0));
    const auto grid = std::vector<double>{khz(-50.0), 0.0, khz(50.0)};
    for (Eigen::Index m = 0; m < 4; ++m) {
        const auto drive = drive_for_input(s.modes.col(m), medium, gamma_total, 0.1);
        const auto trace = eit_trace(LatticeSpec{}, Couplings{khz(5.0), khz(11.0), 0.0}, medium, drive, grid);
        const auto est = eigen_eit_extract(trace, trace.gamma);
        EXPECT_NEAR(est.mean / s.rates[m], 1.0, 1e-10);
        EXPECT_LT(est.spread, 1e-8 * std::abs(s.rates[m]));
        EXPECT_EQ(est.averaged_channels.size(), 2u);
        const auto from_t = eigen_eit_extract_from_transmission(trace, trace.gamma, medium);
        EXPECT_NEAR(from_t.mean / s.rates[m], 1.0, 1e-6);
    }
}

TEST(EigenEit, AveragesStrongestProbes) {
    const auto s = four_site_spectrum(khz(5.0), khz(11.0));
    const auto drive = drive_for_input(s.modes.col(3), medium, gamma_total, 0.1);
    const auto trace = eit_trace(LatticeSpec{}, Couplings{khz(5.0), khz(11.0), 0.0}, medium, drive, {0.0});
    const auto est = eigen_eit_extract(trace, trace.gamma);
    // The bulk mode has its large components on the inner channels.
    EXPECT_EQ(est.averaged_channels, (std::vector<int>{1, 2}));
}

TEST(EigenEit, ExcludesDarkChannel) {
    const double oc = control_rabi_for_decay(medium, gamma_total);
    const DriveConfig drive{std::vector<cplx>(4, cplx(oc)),
                            {cplx(0.1 * oc), cplx(0.0), cplx(0.05 * oc), cplx(0.02 * oc)}};
    const auto trace = eit_trace(LatticeSpec{}, Couplings{khz(5.0), khz(11.0), 0.0}, medium, drive, {0.0});
    const auto est = eigen_eit_extract(trace, trace.gamma);
    EXPECT_TRUE(std::isnan(est.per_channel[1]));
    EXPECT_EQ(est.warnings.size(), 1u);
    EXPECT_THROW(eigen_eit_extract(eit_trace(LatticeSpec{}, Couplings{}, medium, drive, {khz(1.0)}), gamma_total),
                 DomainError);
}

TEST(Drive, EigenstateSignsBecomeProbePhases) {
    Eigen::VectorXd psi(4);
    psi << -0.7, -0.3, 0.3, 0.7;
    const auto d = eigenstate_to_drive(psi, 10.0, 2.0);
    EXPECT_EQ(d.omega_p[0], cplx(-1.4));
    EXPECT_EQ(d.omega_p[3], cplx(1.4));
    const auto p = build_pin(d, medium);
    EXPECT_LT((p / p(3) - psi.cast<cplx>() / psi(3)).norm(), 1e-15);
    const auto ratios = probe_power_ratios(d);
    EXPECT_NEAR(ratios[1], 9.0 / 49.0, 1e-15);

    const Eigen::VectorXcd rotated = psi.cast<cplx>() * std::polar(1.0, 0.7);
    const auto dc = eigenstate_to_drive(rotated, 10.0, 2.0);
    // The global phase is removed up to an overall sign.
    const double sign = (dc.omega_p[3] / d.omega_p[3]).real() > 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(std::abs(dc.omega_p[j] - sign * d.omega_p[j]), 0.0, 1e-14);
    }
    Eigen::VectorXcd twisted = rotated;
    twisted(1) *= I;
    EXPECT_THROW(eigenstate_to_drive(twisted, 10.0, 2.0), DomainError);
}

TEST(Lineshape, LorentzianFitRecoversParameters) {
    std::vector<double> x, y;
    for (int i = -60; i <= 60; ++i) {
        x.push_back(i * 1.0);
        y.push_back(0.3 + 0.5 / (1.0 + (i / 12.5) * (i / 12.5)));
    }
    const auto f = fit_lorentzian(x, y);
    EXPECT_NEAR(f.half_width, 12.5, 1e-6);
    EXPECT_NEAR(f.amplitude, 0.5, 1e-6);
    EXPECT_NEAR(f.offset, 0.3, 1e-6);
    std::vector<double> peak(y.size());
    std::transform(y.begin(), y.end(), peak.begin(), [](double v) { return v - 0.3; });
    EXPECT_NEAR(full_width_half_max(x, peak), 25.0, 0.3);
}

TEST(Lineshape, FwhmErrors) {
    EXPECT_THROW(full_width_half_max({0, 1, 2}, {0, 0, 0}), FitError);
    EXPECT_THROW(full_width_half_max({0, 1, 2}, {1, 1, 1}), FitError);
}

TEST(Calibration, PeakRatioRecoversCoupling) {
    const double d = mm(3.0);
    const double g = coupling_from_distance(d, medium);
    const auto drive = drive_for_input(Eigen::VectorXd::Ones(2), medium, gamma_total, 0.1);
    const auto trace = eit_trace(pair_lattice(d), Couplings{g, g, 0.0}, medium, drive, uniform_grid(khz(-100), khz(100), 41));
    EXPECT_NEAR(calibrate_coupling(trace, CalibrationMethod::peak_ratio) / g, 1.0, 1e-10);
}

// The difference lineshape is set by the flight phase delta d / nu. Its width equals
// the coupling rate when nu = 3 kappa / (2 pi) (leading order in g / gamma).
TEST(Calibration, DifferenceLinewidthTracksCouplingAtMatchedSpeed) {
    MediumParams m = medium;
    m.nu = 3.0 * m.kappa / two_pi;
    for (double dmm : {3.0, 6.0}) {
        const double d = mm(dmm);
        const double g = coupling_from_distance(d, m);
        const auto drive = drive_for_input(Eigen::VectorXd::Ones(2), m, gamma_total, 0.1);
        const auto trace = eit_trace(pair_lattice(d), Couplings{g, g, 0.0}, m, drive,
                                     uniform_grid(khz(-200), khz(200), 801));
        EXPECT_NEAR(calibrate_coupling(trace, CalibrationMethod::difference_linewidth) / g, 1.0, 0.15) << dmm;
    }
}

TEST(Calibration, LinewidthScalesInverselyWithDistance) {
    std::vector<double> widths;
    for (double dmm : {3.0, 6.0}) {
        const double d = mm(dmm);
        const double g = coupling_from_distance(d, medium);
        const auto drive = drive_for_input(Eigen::VectorXd::Ones(2), medium, gamma_total, 0.1);
        const auto trace = eit_trace(pair_lattice(d), Couplings{g, g, 0.0}, medium, drive,
                                     uniform_grid(khz(-200), khz(200), 801));
        widths.push_back(calibrate_coupling(trace, CalibrationMethod::difference_linewidth));
    }
    EXPECT_NEAR(widths[0] / widths[1], 2.0, 0.2);
}

TEST(Calibration, Preconditions) {
    const auto drive = drive_for_input(Eigen::VectorXd::Ones(4), medium, gamma_total, 0.1);
    const auto trace = eit_trace(LatticeSpec{}, Couplings{khz(5.0), khz(11.0), 0.0}, medium, drive, {0.0});
    EXPECT_THROW(calibrate_coupling(trace, CalibrationMethod::peak_ratio), DomainError);
    Eigen::VectorXd skew(2);
    skew << 1.0, 0.5;
    const auto d2 = drive_for_input(skew, medium, gamma_total, 0.1);
    const auto t2 = eit_trace(pair_lattice(mm(3.0)), Couplings{khz(10.0), khz(10.0), 0.0}, medium, d2, {0.0});
    EXPECT_THROW(calibrate_coupling(t2, CalibrationMethod::peak_ratio), DomainError);
}

TEST(ChiralRing, OutputOnEvenChannelsOnly) {
    const double v = khz(5.0), w = khz(11.0);
    const auto r = chiral_ring_test(v, w, 0.0, medium);
    for (Eigen::Index j = 0; j < 6; ++j) {
        if (j % 2 == 0) {
            EXPECT_LT(std::abs(r.output(j)), 1e-12 * (v + w));
            EXPECT_TRUE(std::isfinite(r.transmission_difference(j)));
        } else {
            EXPECT_NEAR(std::abs(r.output(j)) / (v + w), 1.0, 1e-14);
            EXPECT_TRUE(std::isnan(r.transmission_difference(j)));
        }
    }
}

TEST(EitTrace, ThreadCountDoesNotChangeResults) {
    const auto drive = drive_for_input(Eigen::VectorXd::Ones(4), medium, gamma_total, 0.1);
    const auto grid = uniform_grid(khz(-100), khz(100), 21);
    const Couplings c{khz(5.0), khz(11.0), 0.0};
    const auto a = eit_trace(LatticeSpec{}, c, medium, drive, grid, {UncoupledMode::single_probe, 1});
    const auto b = eit_trace(LatticeSpec{}, c, medium, drive, grid, {UncoupledMode::single_probe, 4});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(a.t_coupled[i], b.t_coupled[i]);
        EXPECT_EQ(a.rho_uncoupled[i], b.rho_uncoupled[i]);
    }
    EXPECT_THROW(eit_trace(LatticeSpec{}, c, medium, drive, {khz(1.0), 0.0}), DomainError);
}
