// ring_chiral_probe.cpp — Sends light into the odd channels of a closed six-channel ring
// and prints where the coupling term lands.

#include <cmath>

#include <fmt/format.h>

#include "dlab/dlab.hpp"

int main() {
    using namespace dlab;
    const auto r = chiral_ring_test(khz(5.0), khz(11.0), 0.0, MediumParams{});
    for (Eigen::Index j = 0; j < r.input.size(); ++j) {
        fmt::print("channel {}: input {:.0f}  |H input| = {:8.4f} kHz  dT = {:+.3e}\n", j + 1, r.input(j),
                   to_khz(std::abs(r.output(j))), r.transmission_difference(j));
    }
}
