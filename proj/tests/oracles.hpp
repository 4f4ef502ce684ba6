#pragma once

#include <cmath>
#include <functional>

namespace oracle {

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Scalar quartic double well written out independently of the library.
inline double quartic(double u) { return 0.25 * (1.0 - u * u) * (1.0 - u * u); }

// Geodesic action int sqrt(2 W) du between two scalar states.
inline double scalar_action(double from, double to) {
    return std::abs(simpson([](double u) { return std::sqrt(2.0 * quartic(u)); }, from, to));
}

}  // namespace oracle
