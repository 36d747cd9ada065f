#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace cableimp {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 4e-7 * pi;            // H/m
inline constexpr double eps0 = 8.8541878128e-12;    // F/m
inline const double c0 = 1.0 / std::sqrt(mu0 * eps0);
inline constexpr cplx jj{0.0, 1.0};

}  // namespace cableimp
