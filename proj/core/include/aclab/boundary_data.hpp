#pragma once

#include "aclab/geometry.hpp"
#include "aclab/potential.hpp"

#include <string>

namespace aclab {

enum class BoundaryMode { StepH3, ConstZ };

std::string to_string(BoundaryMode m);
BoundaryMode boundary_mode_from_string(const std::string& s);

/// Dirichlet data on the domain boundary.
///
/// StepH3: a_+ on the flat parts (0,l) x {0,h} away from linear ramps of
/// width C0 eps at both ends, a_- on the rest of the boundary.
/// ConstZ: the constant z everywhere.
struct BoundaryData {
    BoundaryMode mode = BoundaryMode::StepH3;
    double C0 = 2.0;
    double eps = 0.0;
    Point a_minus;
    Point a_plus;
    Point z;
    double M = 0.0;  // bound |g| <= M checked by validate_boundary
};

/// Value at a boundary point of `d`. Points off the boundary are rejected.
Point eval_boundary(const BoundaryData& b, const Domain2D& d, double x, double y);

/// Value along the flat parts as a function of x only (no boundary check).
Point flat_value(const BoundaryData& b, double l, double x);

/// Checks |g| <= M, the discrete ramp slope against |a_+ - a_-| / (C0 eps)
/// and continuity at the ramp junctions, sampled at spacing dx.
ValidationReport validate_boundary(const BoundaryData& b, double l, double dx);

}  // namespace aclab
