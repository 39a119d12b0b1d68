// test_spectral.cpp — Dissipation spectra, Bloch bands, winding and phase diagram.

#include <gtest/gtest.h>

#include "dlab/spectral.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

LatticeSpec ring(int cells, Boundary b, Truncation tr) {
    LatticeSpec s;
    s.n_cells = cells;
    s.boundary = b;
    s.truncation = tr;
    return s;
}

// Distance from z to the nearest entry of values.
double nearest(const std::vector<EigenPair>& values, cplx z) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : values) {
        best = std::min(best, std::abs(p.value - z));
    }
    return best;
}

} // namespace

TEST(Spectrum, TopologicalFourSiteMatchesQuartic) {
    const double v = khz(5.0), w = khz(11.0);
    const auto h = build_hamiltonian(LatticeSpec{}, v, w, 0.0, 0.0, MediumParams{});
    const auto s = dissipation_spectrum(h, v, w, 0.0);
    const auto expected = oracle::four_site_rates(v, w);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(s.rates[i] / expected[i], 1.0, 1e-12);
    }
    EXPECT_NEAR(to_khz(s.rates[3]), 12.933, 5e-4);
    EXPECT_NEAR(to_khz(s.rates[2]), 1.933, 5e-4);
    EXPECT_EQ(std::count(s.in_gap.begin(), s.in_gap.end(), true), 2);
    EXPECT_TRUE(s.in_gap[1] && s.in_gap[2]);
    EXPECT_NEAR(to_khz(s.gap_half_width), 6.0, 1e-12);
    EXPECT_EQ(s.topology, Topology::topological);
    EXPECT_EQ(s.winding, 1);
}

TEST(Spectrum, TrivialFourSiteHasNoEdgeModes) {
    const double v = khz(11.0), w = khz(5.0);
    const auto h = build_hamiltonian(LatticeSpec{}, v, w, 0.0, 0.0, MediumParams{});
    const auto s = dissipation_spectrum(h, v, w, 0.0);
    const auto expected = oracle::four_site_rates(v, w);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(s.rates[i] / expected[i], 1.0, 1e-12);
    }
    EXPECT_EQ(std::count(s.in_gap.begin(), s.in_gap.end(), true), 0);
    EXPECT_EQ(s.topology, Topology::trivial);
    EXPECT_EQ(s.winding, 0);
}

TEST(Spectrum, ModesAreOrthonormalEigenvectors) {
    const double v = khz(5.0), w = khz(10.0);
    const auto spec = ring(5, Boundary::line_open, Truncation::nearest_neighbor);
    const auto h = build_hamiltonian(spec, v, w, 0.0, 0.0, MediumParams{});
    const auto s = dissipation_spectrum(h, v, w, 0.0);
    const Eigen::MatrixXd m = h.entries.imag();
    EXPECT_LT((s.modes.transpose() * s.modes - Eigen::MatrixXd::Identity(10, 10)).norm(), 1e-12);
    for (Eigen::Index j = 0; j < 10; ++j) {
        EXPECT_LT((m * s.modes.col(j) - s.rates[j] * s.modes.col(j)).norm(), 1e-9 * m.norm());
        // First entry of (near) maximal magnitude is positive.
        const double top = s.modes.col(j).cwiseAbs().maxCoeff();
        Eigen::Index first = 0;
        while (std::abs(s.modes(first, j)) < top * (1.0 - 1e-9)) {
            ++first;
        }
        EXPECT_GT(s.modes(first, j), 0.0);
    }
}

TEST(Spectrum, ChiralPairingForNearestNeighbour) {
    oracle::Draws draws(5);
    for (int i = 0; i < 30; ++i) {
        const double v = khz(draws.uniform(0.5, 20)), w = khz(draws.uniform(0.5, 20));
        const auto spec = ring(draws.integer(1, 6), Boundary::line_open, Truncation::nearest_neighbor);
        const auto s = dissipation_spectrum(build_hamiltonian(spec, v, w, 0.0, 0.0, MediumParams{}), v, w, 0.0);
        const auto n = s.rates.size();
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_NEAR(s.rates[j], -s.rates[n - 1 - j], 1e-9 * std::max(v, w));
        }
    }
}

TEST(Spectrum, RejectsDetunedMatrix) {
    const auto h = build_hamiltonian(LatticeSpec{}, khz(5.0), khz(11.0), 0.0, khz(1.0), MediumParams{});
    EXPECT_THROW(dissipation_spectrum(h, khz(5.0), khz(11.0), 0.0), DomainError);
}

TEST(Winding, SignConventionAndErrors) {
    EXPECT_EQ(winding_number(1.0, 2.0, 0.0, 0.0), 1);
    EXPECT_EQ(winding_number(2.0, 1.0, 0.0, 0.0), 0);
    EXPECT_EQ(winding_number(1.0, 2.0, 0.3, -1.1), 1);
    EXPECT_THROW(winding_number(1.0, 1.0, 0.0, 0.0), DomainError);
    EXPECT_THROW(winding_number(0.0, 0.0, 0.0, 0.0), DomainError);
}

TEST(Topology, Classification) {
    EXPECT_EQ(classify_topology(1.0, 2.0, 0.0), Topology::topological);
    EXPECT_EQ(classify_topology(2.0, 1.0, 0.0), Topology::trivial);
    EXPECT_EQ(classify_topology(1.0, 1.0, 0.0), Topology::critical);
    EXPECT_EQ(classify_topology(1.0, 2.0, 0.5), Topology::topological);
    EXPECT_EQ(classify_topology(1.0, 2.0, 1.0), Topology::critical);
    EXPECT_EQ(classify_topology(1.0, 2.0, 1.5), Topology::trivial);
}

TEST(Bloch, GapClosesAtHalfW) {
    const double w = 1.0;
    const auto [lo0, hi0] = bloch_gap(0.5, w, 0.0);
    EXPECT_DOUBLE_EQ(hi0 - lo0, 1.0);
    const auto [lo, hi] = bloch_gap(0.5, w, 1.0 / 3.0);
    EXPECT_NEAR(hi - lo, 2.0 / 3.0, 1e-6);
    const auto [lc, hc] = bloch_gap(0.5, w, 0.5);
    EXPECT_NEAR(hc - lc, 0.0, 1e-6);
}

TEST(Bloch, AgreesWithExplicitQuadratic) {
    oracle::Draws draws(99);
    for (int i = 0; i < 50; ++i) {
        const double v = draws.uniform(0, 2), w = draws.uniform(0, 2), t = draws.uniform(0, 1);
        const double th1 = draws.uniform(-3, 3), th2 = draws.uniform(-3, 3), th3 = draws.uniform(-3, 3);
        const double k = draws.uniform(-pi, pi);
        const auto [ep, em] = bloch_eigenvalues(v, w, t, th1, th2, th3, k);
        const auto [a, b] = oracle::bloch_pair(v, w, t, th1, th2, th3, k);
        const double d1 = std::abs(ep - a) + std::abs(em - b);
        const double d2 = std::abs(ep - b) + std::abs(em - a);
        EXPECT_LT(std::min(d1, d2), 1e-12);
        EXPECT_GE(ep.imag(), em.imag());
    }
}

// Closed rings have Bloch spectra at k = 2 pi m / N.
TEST(Bloch, RealSpaceRingProperty) {
    oracle::Draws draws(314);
    const MediumParams medium;
    for (int i = 0; i < 20; ++i) {
        const int cells = draws.integer(2, 8);
        const double v = khz(draws.uniform(1, 15)), w = khz(draws.uniform(1, 15)), t = khz(draws.uniform(0, 4));
        const double delta = khz(draws.uniform(-80, 80));
        const auto spec = ring(cells, Boundary::ring_closed, Truncation::next_nearest_neighbor);
        const auto h = build_hamiltonian(spec, v, w, t, delta, medium);
        const auto eig = complex_eigen(h);
        const auto ph = bond_phases(spec, medium, delta);
        for (int m = 0; m < cells; ++m) {
            const double k = two_pi * m / cells;
            const auto [ep, em] = bloch_eigenvalues(v, w, t, ph.theta1, ph.theta2, ph.theta3, k);
            EXPECT_LT(nearest(eig, ep), 1e-9 * std::abs(ep) + 1e-9 * v);
            EXPECT_LT(nearest(eig, em), 1e-9 * std::abs(em) + 1e-9 * v);
        }
    }
}

TEST(PhaseDiagram, ZeroNextNearestRowFollowsSSH) {
    const double w = khz(10.0);
    const std::vector<double> vs{khz(3.0), khz(7.0), khz(13.0)};
    const std::vector<double> ts{0.0, khz(2.0), khz(6.0)};
    const auto grid = phase_diagram_scan(w, vs, ts, 12, 2);
    ASSERT_EQ(grid.size(), 9u);
    EXPECT_EQ(grid[0].topology, Topology::topological);
    EXPECT_EQ(grid[1].topology, Topology::topological);
    EXPECT_EQ(grid[2].topology, Topology::trivial);
    EXPECT_EQ(grid[6].topology, Topology::trivial);
    EXPECT_DOUBLE_EQ(grid[4].v, khz(7.0));
    EXPECT_DOUBLE_EQ(grid[4].t, khz(2.0));
    const auto serial = phase_diagram_scan(w, vs, ts, 12, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(grid[i].rates, serial[i].rates);
    }
}
