#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace tbq {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Grid resolution used when a scalar PSD has to be sampled on [0, 2pi).
inline constexpr int kDefaultPsdGrid = 1024;

/// (a - 1)^+, the mode-activation function of the waterfilling designs.
inline double active_part(double a) { return a > 1.0 ? a - 1.0 : 0.0; }

}  // namespace tbq
