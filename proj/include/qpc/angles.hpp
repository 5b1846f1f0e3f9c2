#pragma once

#include <cmath>
#include <numbers>

namespace qpc {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double half_pi = 0.5 * std::numbers::pi;

// Representative of x mod 2pi in [0, 2pi).
inline double wrap_2pi(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

// Line angle mod pi, representative in [-pi/2, pi/2]. Small angles keep
// their full relative precision, which matters because the cocycle angles
// of the construction all live near 0.
inline double wrap_pi(double x) { return std::remainder(x, pi); }

// Distance between two lines of RP^1, in [0, pi/2].
inline double proj_dist(double a, double b) { return std::fabs(std::remainder(a - b, pi)); }

inline double circle_dist(double x, double y) { return std::fabs(std::remainder(x - y, two_pi)); }

}  // namespace qpc
