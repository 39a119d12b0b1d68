// units.hpp — Unit conversions and physical constants (SI, angular rates in rad/s)

#pragma once

#include <numbers>

namespace dlab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double boltzmann = 1.380649e-23;     // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double rb87_mass = 86.909180520 * atomic_mass_unit;

// Linear kHz -> angular rad/s.
constexpr double khz(double f) { return two_pi * 1e3 * f; }
// Angular rad/s -> linear kHz.
constexpr double to_khz(double omega) { return omega / (two_pi * 1e3); }

constexpr double mm(double x) { return 1e-3 * x; }
constexpr double to_mm(double x) { return 1e3 * x; }

constexpr double ms(double x) { return 1e-3 * x; }

} // namespace dlab
