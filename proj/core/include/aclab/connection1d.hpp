#pragma once

#include "aclab/potential.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aclab {

/// A map v: [s0, s0 + (n-1) ds] -> R^m sampled on a uniform grid,
/// stored sample-major (values[i*m + k]).
struct Profile1D {
    double s0 = 0.0;
    double ds = 1.0;
    int m = 1;
    std::vector<double> values;

    std::size_t size() const { return m > 0 ? values.size() / static_cast<std::size_t>(m) : 0; }
    double s(std::size_t i) const { return s0 + ds * static_cast<double>(i); }
    std::span<const double> at(std::size_t i) const { return {values.data() + i * m, static_cast<std::size_t>(m)}; }
    std::span<double> at(std::size_t i) { return {values.data() + i * m, static_cast<std::size_t>(m)}; }

    /// Linear interpolation; clamps to the end samples outside the range.
    Point sample(double s) const;
};

/// Exponential tail envelope |v(s) - a_+-| <= K e^{-k|s|} on the fitted range.
struct TailFit {
    double k = 0.0;
    double K = 0.0;
    double k_minus = 0.0;
    double K_minus = 0.0;
    double k_plus = 0.0;
    double K_plus = 0.0;
    bool converged = false;
};

/// Discrete 1D minimizer of the action together with its diagnostics.
struct ConnectionProfile {
    Profile1D profile;
    double action = 0.0;
    Point start;  // a_- (full line) or z (half line)
    Point end;    // the arrival well
    std::vector<Point> optimal_set;  // every arrival well attaining the minimum
    std::vector<double> candidate_actions;  // one per well, NaN for the start well
    TailFit tail_fit;
    double equipartition_residual = 0.0;
    double tail_correction = 0.0;  // estimated action beyond the truncation, not included
    int iterations = 0;
    bool half_line = false;
};

struct ConnectionSettings {
    double tolerance = 1e-9;  // max-norm of the action gradient density
    int max_iterations = 400000;
    double tie_tolerance = 1e-7;
};

/// Full-line heteroclinic leaving `a_minus`; the arrival well is found by
/// solving towards every other well and keeping the cheapest. Both ends are
/// pinned at wells, L is the half-length of the window [-L, L] and n the
/// number of samples.
ConnectionProfile solve_connection(const Potential& p, const Point& a_minus, double L, int n,
                                   const ConnectionSettings& settings = {});

/// Same, starting from a caller-provided initial profile towards `a_plus`.
/// A constant initial profile is rejected.
ConnectionProfile solve_connection_from(const Potential& p, const Profile1D& init, const Point& a_plus,
                                        const ConnectionSettings& settings = {});

/// Half-line connection on [0, L] from v(0) = z to the cheapest well.
/// Ties are broken by the lexicographically smallest well.
ConnectionProfile solve_halfline(const Potential& p, const Point& z, double L, int n,
                                 const ConnectionSettings& settings = {});

/// Minimal half-line action from z into the wells other than the optimal
/// arrival. `excluding_given` removes only `excluded`, `excluding_optimal_set`
/// removes every optimal arrival well (infinite when nothing is left).
struct SigmaStar {
    double excluding_given = 0.0;
    double excluding_optimal_set = 0.0;
    double sigma_plus = 0.0;
    std::vector<Point> optimal_set;
};

SigmaStar sigma_star(const Potential& p, const Point& z, const Point& excluded, double L = 20.0,
                     int n = 2048, const ConnectionSettings& settings = {});

/// Trapezoid value of J^eps(v) = int (eps/2 |v'|^2 + W(v)/eps) ds over the
/// sample range, kinetic term on the grid intervals.
double action(const Potential& p, const Profile1D& profile, double eps = 1.0);

/// max_s | |v'|^2/2 - W(v) | with centered differences (one-sided at the ends).
double equipartition_residual(const Potential& p, const Profile1D& profile);

/// Certified lower bound sigma - C_W (delta_-^2 + delta_+^2) / 2.
double lower_bound_delta(double sigma, double C_W, double delta_minus, double delta_plus);

TailFit fit_tails(const Profile1D& profile, std::span<const double> a_minus, std::span<const double> a_plus);

/// Classes of a one-dimensional fiber in the boundary-layer analysis.
enum class FiberClass { WStar, VA, WHatC, WTildeC };

std::string to_string(FiberClass c);

struct FiberSpec {
    Point a_minus;
    Point a_plus;
    double eps = 0.0;
    double delta = 0.0;     // ball radius, typically eps^{1/4}
    double K_margin = 0.0;  // outer ball multiplier K > 1
    double sigma = 0.0;
    double c_W = 0.0;
    bool strict = false;  // throw instead of labelling bad endpoints V_a
};

struct FiberRecord {
    double s_minus = 0.0;
    double s_plus = 0.0;
    double width = 0.0;
    double sw_measure = 0.0;
    double c_star = 0.0;  // 4 sigma / c_W^2
    FiberClass label = FiberClass::WStar;
    bool endpoints_ok = true;
};

FiberRecord fiber_transition_points(const Potential& p, const Profile1D& profile, const FiberSpec& spec);

}  // namespace aclab
