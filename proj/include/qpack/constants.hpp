#pragma once

// Physical constants, SI (CODATA 2018). All qpack quantities are SI unless a
// file format declares an explicit unit string.

namespace qpack {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;          // m/s
inline constexpr double kMu0 = 1.25663706212e-6;              // H/m
inline constexpr double kEps0 = 8.8541878128e-12;             // F/m
inline constexpr double kHbar = 1.054571817e-34;              // J*s
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K
inline constexpr double kFreeSpaceImpedance = 376.730313668;  // Ohm

inline constexpr double angular(double frequency_hz) { return 2.0 * kPi * frequency_hz; }

}  // namespace qpack
