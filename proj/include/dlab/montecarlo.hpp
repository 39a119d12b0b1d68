// montecarlo.hpp — 2D ballistic kinetic simulation of ground-state coherence transport
// between flat-top beams in a circular vacuum cell.
//
// Each flight is cut into segments at beam edges and walls; on a segment the coherence
// obeys a linear ODE with constant coefficients and is advanced by its exact solution.
// Every trajectory carries one coherence per (detuning, source beam) with a unit source,
// so coupled and uncoupled responses come from the same trajectories.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dlab/error.hpp"
#include "dlab/lattice.hpp"
#include "dlab/parallel.hpp"
#include "dlab/spectroscopy.hpp"
#include "dlab/units.hpp"

namespace dlab {

struct MCConfig {
    double cell_diameter{mm(25.0)};
    std::vector<Point2> beam_centers;      // m, cell centre at the origin
    double beam_diameter{mm(1.2)};
    int n_velocities{10};
    int n_trajectories_per_velocity{1000};
    double warmup_time{ms(1.0)};
    double sample_time{ms(20.0)};
    std::uint64_t master_seed{1};
    double temperature{313.15};
    double atomic_mass{rb87_mass};
    double ground_dephasing{khz(0.5)};     // free-flight decay of rho12
    double wall_survival{0.0};             // fraction of rho12 kept at a wall hit
    bool resample_speed_on_wall{true};
    DriveConfig drive;                     // one entry per beam
    std::vector<double> delta_grid;        // rad/s
    int threads{0};

    std::size_t beams() const { return beam_centers.size(); }
    std::size_t trajectories() const {
        return static_cast<std::size_t>(n_velocities) * static_cast<std::size_t>(n_trajectories_per_velocity);
    }
};

inline void validate(const MCConfig& c) {
    if (!(c.cell_diameter > 0.0) || !(c.beam_diameter > 0.0)) {
        throw ConfigError("mc: cell_diameter and beam_diameter must be > 0");
    }
    if (c.beam_centers.empty()) {
        throw ConfigError("mc: at least one beam is required");
    }
    const double radius = 0.5 * c.cell_diameter;
    const double rb = 0.5 * c.beam_diameter;
    for (std::size_t j = 0; j < c.beams(); ++j) {
        if (std::hypot(c.beam_centers[j].x, c.beam_centers[j].y) + rb >= radius) {
            throw ConfigError(fmt::format("mc: beam {} does not fit inside the cell", j + 1));
        }
        for (std::size_t k = 0; k < j; ++k) {
            if (distance(c.beam_centers[j], c.beam_centers[k]) <= c.beam_diameter) {
                throw ConfigError(fmt::format("mc: beams {} and {} overlap", k + 1, j + 1));
            }
        }
    }
    if (c.n_velocities < 1 || c.n_trajectories_per_velocity < 1) {
        throw ConfigError("mc: n_velocities and n_trajectories_per_velocity must be >= 1");
    }
    if (!(c.warmup_time >= 0.0) || !(c.sample_time > 0.0)) {
        throw ConfigError("mc: warmup_time must be >= 0 and sample_time > 0");
    }
    if (!(c.temperature > 0.0) || !(c.atomic_mass > 0.0)) {
        throw ConfigError("mc: temperature and atomic_mass must be > 0");
    }
    if (!(c.ground_dephasing >= 0.0)) {
        throw ConfigError("mc: ground_dephasing must be >= 0");
    }
    if (!(c.wall_survival >= 0.0 && c.wall_survival < 1.0)) {
        throw ConfigError("mc: wall_survival must lie in [0, 1)");
    }
    if (c.delta_grid.empty()) {
        throw ConfigError("mc: delta grid is empty");
    }
    validate(c.drive, c.beams());
}

// ---------------------------------------------------------------------------
// Random streams

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t velocity, std::uint64_t trajectory) {
    return splitmix64(splitmix64(splitmix64(master) ^ velocity) ^ (trajectory * 0xd1b54a32d192ed03ULL));
}

// Draws are built by hand on top of mt19937_64 so that streams do not depend on the
// standard library's distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; } // [0, 1)
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; } // (0, 1)

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double phi = two_pi * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

private:
    std::mt19937_64 engine_;
    double spare_{0.0};
    bool has_spare_{false};
};

// Speed scale sqrt(kT/m) of the 2D Maxwell-Boltzmann distribution.
inline double thermal_scale(double temperature, double atomic_mass) {
    if (!(temperature >= 0.0) || !(atomic_mass > 0.0)) {
        throw DomainError("temperature must be >= 0 and atomic_mass > 0");
    }
    return std::sqrt(boltzmann * temperature / atomic_mass);
}

inline double mean_speed_2d(double temperature, double atomic_mass) {
    return std::sqrt(pi / 2.0) * thermal_scale(temperature, atomic_mass);
}

// Rayleigh speed, uniform direction.
inline Point2 sample_velocity(RandomStream& rng, double temperature, double atomic_mass) {
    const double sigma = thermal_scale(temperature, atomic_mass);
    return {sigma * rng.normal(), sigma * rng.normal()};
}

// Speeds at the midpoint quantiles (i + 1/2)/n of the Rayleigh distribution.
inline std::vector<double> stratified_speeds(int n, double temperature, double atomic_mass) {
    if (n < 1) {
        throw DomainError("need at least one velocity class");
    }
    const double sigma = thermal_scale(temperature, atomic_mass);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double q = (i + 0.5) / n;
        out[static_cast<std::size_t>(i)] = sigma * std::sqrt(-2.0 * std::log1p(-q));
    }
    return out;
}

// Speed of an atom leaving a wall: the flux-weighted 2D distribution ~ v^2 exp(-v^2/2s^2).
inline double sample_wall_speed(RandomStream& rng, double sigma) {
    const double a = rng.normal();
    const double b = rng.normal();
    const double c = rng.normal();
    return sigma * std::sqrt(a * a + b * b + c * c);
}

// ---------------------------------------------------------------------------
// Ensemble accumulation

namespace detail {

struct MCAccumulator {
    std::size_t n_delta{0};
    std::size_t n_beams{0};
    std::size_t trajectories{0};
    std::vector<double> dwell;           // [j]  sum of W
    std::vector<double> dwell_sq;        // [j]  sum of W^2
    std::vector<cplx> green;             // [(d*J + j)*J + k] sum of X_jk
    std::array<std::vector<double>, 3> abs_sq; // coupled/uncoupled/diff: [d*J + j] sum |X|^2
    std::array<std::vector<cplx>, 3> cross;    // [d*J + j] sum X W

    MCAccumulator() = default;
    MCAccumulator(std::size_t nd, std::size_t nb)
        : n_delta(nd), n_beams(nb), dwell(nb, 0.0), dwell_sq(nb, 0.0), green(nd * nb * nb, cplx(0.0)) {
        for (int c = 0; c < 3; ++c) {
            abs_sq[c].assign(nd * nb, 0.0);
            cross[c].assign(nd * nb, cplx(0.0));
        }
    }

    MCAccumulator& operator+=(const MCAccumulator& o) {
        trajectories += o.trajectories;
        for (std::size_t j = 0; j < n_beams; ++j) {
            dwell[j] += o.dwell[j];
            dwell_sq[j] += o.dwell_sq[j];
        }
        for (std::size_t i = 0; i < green.size(); ++i) {
            green[i] += o.green[i];
        }
        for (int c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < abs_sq[c].size(); ++i) {
                abs_sq[c][i] += o.abs_sq[c][i];
                cross[c][i] += o.cross[c][i];
            }
        }
        return *this;
    }
};

struct FlightSegment {
    double length;
    int beam; // -1 outside all beams
};

class TrajectorySimulator {
public:
    TrajectorySimulator(const MCConfig& cfg, const Eigen::VectorXcd& p_in, double gamma23)
        : cfg_(cfg), p_in_(p_in), n_delta_(cfg.delta_grid.size()), n_beams_(cfg.beams()),
          radius_(0.5 * cfg.cell_diameter), beam_radius_(0.5 * cfg.beam_diameter),
          sigma_(thermal_scale(cfg.temperature, cfg.atomic_mass)), rho_(n_delta_ * n_beams_),
          integral_(n_beams_ * n_delta_ * n_beams_), decay_(n_delta_), phi_(n_delta_) {
        // In-beam optical pumping rate |Oc|^2 / gamma23.
        pumping_.resize(n_beams_);
        for (std::size_t j = 0; j < n_beams_; ++j) {
            pumping_[j] = std::norm(cfg.drive.omega_c[j]) / gamma23;
        }
    }

    void run(std::uint64_t seed, double initial_speed, MCAccumulator& acc) {
        RandomStream rng(seed);
        std::fill(rho_.begin(), rho_.end(), cplx(0.0));
        std::fill(integral_.begin(), integral_.end(), cplx(0.0));
        std::vector<double> dwell(n_beams_, 0.0);

        // Uniform start inside the disk, isotropic direction.
        const double r0 = radius_ * std::sqrt(rng.uniform());
        const double a0 = two_pi * rng.uniform();
        Point2 pos{r0 * std::cos(a0), r0 * std::sin(a0)};
        const double d0 = two_pi * rng.uniform();
        Point2 dir{std::cos(d0), std::sin(d0)};
        double speed = initial_speed;

        const double t_warm = cfg_.warmup_time;
        const double t_end = cfg_.warmup_time + cfg_.sample_time;
        double clock = 0.0;
        std::vector<FlightSegment> segments;
        while (clock < t_end) {
            const double wall = wall_distance(pos, dir);
            flight_segments(pos, dir, wall, segments);
            for (const auto& seg : segments) {
                double tau = seg.length / speed;
                if (clock + tau > t_end) {
                    tau = t_end - clock;
                }
                if (clock < t_warm && clock + tau > t_warm) {
                    advance(seg.beam, t_warm - clock, false);
                    tau -= t_warm - clock;
                    clock = t_warm;
                }
                const bool record = clock >= t_warm;
                advance(seg.beam, tau, record);
                if (record && seg.beam >= 0) {
                    dwell[static_cast<std::size_t>(seg.beam)] += tau;
                }
                clock += tau;
                if (clock >= t_end) {
                    break;
                }
            }
            if (clock >= t_end) {
                break;
            }
            // Wall hit: move onto the wall, drop coherence, re-emit diffusely.
            pos = {pos.x + wall * dir.x, pos.y + wall * dir.y};
            const double r = std::hypot(pos.x, pos.y);
            if (r > radius_ * (1.0 + 1e-9)) {
                throw NumericalError("mc: trajectory escaped the cell");
            }
            pos = {pos.x * radius_ / r, pos.y * radius_ / r};
            for (auto& z : rho_) {
                z *= cfg_.wall_survival;
            }
            const Point2 inward{-pos.x / radius_, -pos.y / radius_};
            const double angle = std::asin(2.0 * rng.uniform() - 1.0);
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            dir = {inward.x * c - inward.y * s, inward.x * s + inward.y * c};
            if (cfg_.resample_speed_on_wall) {
                speed = sample_wall_speed(rng, sigma_);
            }
        }
        accumulate(dwell, acc);
    }

private:
    double wall_distance(Point2 p, Point2 u) const {
        const double b = p.x * u.x + p.y * u.y;
        const double c = p.x * p.x + p.y * p.y - radius_ * radius_;
        const double disc = std::max(b * b - c, 0.0);
        return -b + std::sqrt(disc);
    }

    void flight_segments(Point2 p, Point2 u, double wall, std::vector<FlightSegment>& out) const {
        struct Interval {
            double start, stop;
            int beam;
        };
        std::vector<Interval> hits;
        for (std::size_t j = 0; j < n_beams_; ++j) {
            const Point2 q{p.x - cfg_.beam_centers[j].x, p.y - cfg_.beam_centers[j].y};
            const double b = q.x * u.x + q.y * u.y;
            const double c = q.x * q.x + q.y * q.y - beam_radius_ * beam_radius_;
            const double disc = b * b - c;
            if (disc <= 0.0) {
                continue;
            }
            const double root = std::sqrt(disc);
            const double l1 = std::max(-b - root, 0.0);
            const double l2 = std::min(-b + root, wall);
            if (l2 > l1) {
                hits.push_back({l1, l2, static_cast<int>(j)});
            }
        }
        std::sort(hits.begin(), hits.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
        out.clear();
        double at = 0.0;
        for (const auto& h : hits) {
            if (h.start > at) {
                out.push_back({h.start - at, -1});
            }
            out.push_back({h.stop - std::max(h.start, at), h.beam});
            at = h.stop;
        }
        if (wall > at) {
            out.push_back({wall - at, -1});
        }
    }

    // Exact update over tau: rho <- rho e + (s/a)(1 - e), a = lambda + i delta, with the unit
    // source only in the column of the beam the atom is in.
    void advance(int beam, double tau, bool record) {
        if (tau <= 0.0) {
            return;
        }
        const double lambda = cfg_.ground_dephasing + (beam >= 0 ? pumping_[static_cast<std::size_t>(beam)] : 0.0);
        const double damp = std::exp(-lambda * tau);
        for (std::size_t d = 0; d < n_delta_; ++d) {
            const double delta = cfg_.delta_grid[d];
            decay_[d] = damp * cplx(std::cos(delta * tau), -std::sin(delta * tau));
            const cplx a(lambda, delta);
            const cplx at = a * tau;
            // phi = (1 - e^{-a tau}) / a, series near zero
            phi_[d] = std::abs(at) < 1e-6 ? tau * (1.0 - 0.5 * at + at * at / 6.0) : (1.0 - decay_[d]) / a;
        }
        if (beam < 0) {
            for (std::size_t d = 0; d < n_delta_; ++d) {
                for (std::size_t k = 0; k < n_beams_; ++k) {
                    rho_[d * n_beams_ + k] *= decay_[d];
                }
            }
            return;
        }
        const auto j = static_cast<std::size_t>(beam);
        for (std::size_t d = 0; d < n_delta_; ++d) {
            const cplx a(lambda, cfg_.delta_grid[d]);
            for (std::size_t k = 0; k < n_beams_; ++k) {
                cplx& r = rho_[d * n_beams_ + k];
                if (record) {
                    cplx area = r * phi_[d];
                    if (k == j) {
                        area += (tau - phi_[d]) / a;
                    }
                    integral_[(j * n_delta_ + d) * n_beams_ + k] += area;
                }
                r = r * decay_[d] + (k == j ? phi_[d] : cplx(0.0));
            }
        }
    }

    void accumulate(const std::vector<double>& dwell, MCAccumulator& acc) const {
        acc.trajectories += 1;
        for (std::size_t j = 0; j < n_beams_; ++j) {
            const double w = dwell[j];
            acc.dwell[j] += w;
            acc.dwell_sq[j] += w * w;
            for (std::size_t d = 0; d < n_delta_; ++d) {
                cplx coupled(0.0);
                for (std::size_t k = 0; k < n_beams_; ++k) {
                    const cplx x = integral_[(j * n_delta_ + d) * n_beams_ + k];
                    acc.green[(d * n_beams_ + j) * n_beams_ + k] += x;
                    coupled += x * p_in_(static_cast<Eigen::Index>(k));
                }
                const cplx uncoupled = integral_[(j * n_delta_ + d) * n_beams_ + j] * p_in_(static_cast<Eigen::Index>(j));
                const std::array<cplx, 3> combos{coupled, uncoupled, coupled - uncoupled};
                const std::size_t slot = d * n_beams_ + j;
                for (int c = 0; c < 3; ++c) {
                    acc.abs_sq[c][slot] += std::norm(combos[c]);
                    acc.cross[c][slot] += combos[c] * w;
                }
            }
        }
    }

    const MCConfig& cfg_;
    Eigen::VectorXcd p_in_;
    std::size_t n_delta_;
    std::size_t n_beams_;
    double radius_;
    double beam_radius_;
    double sigma_;
    std::vector<double> pumping_;
    std::vector<cplx> rho_;       // [d*J + k]
    std::vector<cplx> integral_;  // [(j*D + d)*J + k]
    std::vector<cplx> decay_;
    std::vector<cplx> phi_;
};

} // namespace detail

struct MCResult {
    std::vector<double> delta_grid;
    std::vector<Eigen::VectorXcd> rho12_coupled;    // per delta, per channel
    std::vector<Eigen::VectorXcd> rho12_uncoupled;
    std::vector<Eigen::VectorXd> stderr_coupled;    // standard error of the complex mean
    std::vector<Eigen::VectorXd> stderr_uncoupled;
    std::vector<Eigen::VectorXd> stderr_difference;
    std::vector<Eigen::VectorXcd> rho32_coupled;
    std::vector<Eigen::VectorXcd> rho32_uncoupled;
    std::vector<Eigen::VectorXd> t_coupled;
    std::vector<Eigen::VectorXd> t_uncoupled;
    Eigen::MatrixXd coupling_matrix;                // Re G_jk / (G_jj G_kk) at the smallest |delta|
    std::vector<double> dwell_time;                 // total sampled dwell per beam, s
    std::size_t trajectories{0};
    DriveConfig drive;
};

inline constexpr std::size_t mc_chunk_size = 64;

inline MCResult mc_eit(const MCConfig& cfg, const MediumParams& medium) {
    validate(cfg);
    validate(medium);
    const std::size_t n_delta = cfg.delta_grid.size();
    const std::size_t n_beams = cfg.beams();
    const Eigen::VectorXcd p_in = build_pin(cfg.drive, medium);
    const auto speeds = stratified_speeds(cfg.n_velocities, cfg.temperature, cfg.atomic_mass);

    const std::size_t total = cfg.trajectories();
    const std::size_t n_chunks = (total + mc_chunk_size - 1) / mc_chunk_size;
    std::vector<detail::MCAccumulator> chunks(n_chunks, detail::MCAccumulator(n_delta, n_beams));
    parallel_for(n_chunks, resolve_threads(cfg.threads), [&](std::size_t c) {
        detail::TrajectorySimulator sim(cfg, p_in, medium.gamma23);
        const std::size_t begin = c * mc_chunk_size;
        const std::size_t end = std::min(total, begin + mc_chunk_size);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t v = i / static_cast<std::size_t>(cfg.n_trajectories_per_velocity);
            const std::size_t t = i % static_cast<std::size_t>(cfg.n_trajectories_per_velocity);
            sim.run(trajectory_seed(cfg.master_seed, v, t), speeds[v], chunks[c]);
        }
    });
    // Pairwise tree in chunk order: the sum does not depend on the thread count.
    for (std::size_t stride = 1; stride < n_chunks; stride *= 2) {
        for (std::size_t i = 0; i + stride < n_chunks; i += 2 * stride) {
            chunks[i] += chunks[i + stride];
        }
    }
    const detail::MCAccumulator& acc = chunks.front();

    MCResult res;
    res.delta_grid = cfg.delta_grid;
    res.drive = cfg.drive;
    res.trajectories = acc.trajectories;
    res.dwell_time = acc.dwell;
    const double n = static_cast<double>(acc.trajectories);
    const double bessel = n > 1.0 ? n / (n - 1.0) : std::numeric_limits<double>::quiet_NaN();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto nb = static_cast<Eigen::Index>(n_beams);

    for (std::size_t d = 0; d < n_delta; ++d) {
        Eigen::VectorXcd coupled(nb), uncoupled(nb);
        std::array<Eigen::VectorXd, 3> se{Eigen::VectorXd(nb), Eigen::VectorXd(nb), Eigen::VectorXd(nb)};
        for (std::size_t j = 0; j < n_beams; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double w = acc.dwell[j];
            if (!(w > 0.0)) {
                coupled(jj) = uncoupled(jj) = cplx(nan, nan);
                for (auto& s : se) {
                    s(jj) = nan;
                }
                continue;
            }
            cplx sum_c(0.0);
            for (std::size_t k = 0; k < n_beams; ++k) {
                sum_c += acc.green[(d * n_beams + j) * n_beams + k] * p_in(static_cast<Eigen::Index>(k));
            }
            const cplx sum_u = acc.green[(d * n_beams + j) * n_beams + j] * p_in(jj);
            const std::array<cplx, 3> sums{sum_c, sum_u, sum_c - sum_u};
            coupled(jj) = sum_c / w;
            uncoupled(jj) = sum_u / w;
            const std::size_t slot = d * n_beams + j;
            for (int c = 0; c < 3; ++c) {
                const cplx r = sums[c] / w;
                const double ss = acc.abs_sq[c][slot] - 2.0 * (std::conj(r) * acc.cross[c][slot]).real() +
                                  std::norm(r) * acc.dwell_sq[j];
                se[c](jj) = std::sqrt(std::max(ss, 0.0) * bessel) / w;
            }
        }
        res.rho12_coupled.push_back(coupled);
        res.rho12_uncoupled.push_back(uncoupled);
        res.stderr_coupled.push_back(se[0]);
        res.stderr_uncoupled.push_back(se[1]);
        res.stderr_difference.push_back(se[2]);
        res.rho32_coupled.push_back(optical_coherence(coupled, cfg.drive, medium));
        res.rho32_uncoupled.push_back(optical_coherence(uncoupled, cfg.drive, medium));
        res.t_coupled.push_back(transmission(coupled, cfg.drive, medium));
        res.t_uncoupled.push_back(transmission(uncoupled, cfg.drive, medium));
    }

    std::size_t d0 = 0;
    for (std::size_t d = 1; d < n_delta; ++d) {
        if (std::abs(cfg.delta_grid[d]) < std::abs(cfg.delta_grid[d0])) {
            d0 = d;
        }
    }
    res.coupling_matrix = Eigen::MatrixXd::Zero(nb, nb);
    for (std::size_t j = 0; j < n_beams; ++j) {
        for (std::size_t k = 0; k < n_beams; ++k) {
            if (j == k || !(acc.dwell[j] > 0.0) || !(acc.dwell[k] > 0.0)) {
                continue;
            }
            const cplx gjk = acc.green[(d0 * n_beams + j) * n_beams + k] / acc.dwell[j];
            const cplx gjj = acc.green[(d0 * n_beams + j) * n_beams + j] / acc.dwell[j];
            const cplx gkk = acc.green[(d0 * n_beams + k) * n_beams + k] / acc.dwell[k];
            res.coupling_matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = (gjk / (gjj * gkk)).real();
        }
    }
    return res;
}

// Two beams a distance d apart on the x axis, equal real probes.
inline MCConfig mc_pair_config(double d, const MediumParams& medium, double gamma, double probe_ratio = 0.1) {
    MCConfig cfg;
    cfg.beam_centers = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
    const double control = control_rabi_for_decay(medium, gamma);
    cfg.drive.omega_c.assign(2, cplx(control));
    cfg.drive.omega_p.assign(2, cplx(probe_ratio * control));
    return cfg;
}

inline std::vector<double> uniform_grid(double lo, double hi, int count) {
    if (count < 2 || !(hi > lo)) {
        throw DomainError("grid needs count >= 2 and hi > lo");
    }
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    }
    // Exact zero when the grid is symmetric with an odd count.
    if (count % 2 == 1 && lo == -hi) {
        g[static_cast<std::size_t>(count / 2)] = 0.0;
    }
    return g;
}

struct MCCouplingEstimate {
    double rate{0.0};             // FWHM of the channel-averaged difference spectrum, rad/s
    std::vector<double> difference; // per delta
    double noise{0.0};            // largest standard error of the difference
    MCResult result;
};

inline MCCouplingEstimate mc_coupling_rate(const MCConfig& cfg, const MediumParams& medium) {
    if (cfg.beams() != 2) {
        throw DomainError("mc coupling rate needs exactly two beams");
    }
    for (const auto& p : cfg.drive.omega_p) {
        if (p == 0.0) {
            throw DomainError("mc coupling rate needs both probes on");
        }
    }
    MCCouplingEstimate est;
    est.result = mc_eit(cfg, medium);
    const auto& r = est.result;
    double peak = 0.0;
    for (std::size_t d = 0; d < r.delta_grid.size(); ++d) {
        double diff = 0.0;
        double noise = 0.0;
        for (Eigen::Index j = 0; j < 2; ++j) {
            diff += 0.5 * (r.t_coupled[d](j) - r.t_uncoupled[d](j));
            // dT / d rho12 = -T alphaL Re(Oc/Op .) / gamma23
            const double gain = r.t_uncoupled[d](j) * medium.alphaL / medium.gamma23 *
                                std::abs(cfg.drive.omega_c[static_cast<std::size_t>(j)] /
                                         cfg.drive.omega_p[static_cast<std::size_t>(j)]);
            noise = std::max(noise, gain * r.stderr_difference[d](j));
        }
        est.difference.push_back(diff);
        est.noise = std::max(est.noise, noise);
        peak = std::max(peak, std::abs(diff));
    }
    if (!(peak > 3.0 * est.noise)) {
        throw NumericalError(fmt::format("mc: difference amplitude {:.3e} is within 3 standard errors ({:.3e}); "
                                         "increase n_trajectories_per_velocity by at least {}x",
                                         peak, est.noise,
                                         static_cast<int>(std::ceil(std::pow(3.0 * est.noise / peak, 2.0)))));
    }
    est.rate = full_width_half_max(r.delta_grid, est.difference);
    return est;
}

} // namespace dlab
