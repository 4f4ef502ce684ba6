#pragma once

#include "aclab/boundary_data.hpp"
#include "aclab/energy.hpp"
#include "aclab/geometry.hpp"

#include <cmath>
#include <memory>

namespace fixture {

inline std::size_t node_at(const aclab::Domain2D& d, double x, double y) {
    const int i = static_cast<int>(std::lround((x - d.grid.x0) / d.grid.dx));
    const int j = static_cast<int>(std::lround((y - d.grid.y0) / d.grid.dx));
    return d.grid.index(i, j);
}

inline aclab::DomainPtr stadium(double l, double h, double dx) {
    return std::make_shared<const aclab::Domain2D>(aclab::build_stadium(l, h, dx));
}

inline aclab::BoundaryData step(double eps, double C0 = 2.0) {
    aclab::BoundaryData b;
    b.mode = aclab::BoundaryMode::StepH3;
    b.C0 = C0;
    b.eps = eps;
    b.a_minus = {-1.0};
    b.a_plus = {1.0};
    b.z = {-1.0};
    b.M = 2.0;
    return b;
}

inline aclab::BoundaryData constant(double eps, aclab::Point z) {
    aclab::BoundaryData b;
    b.mode = aclab::BoundaryMode::ConstZ;
    b.eps = eps;
    b.a_minus = {-1.0};
    b.a_plus = {1.0};
    b.z = std::move(z);
    b.M = 2.0;
    return b;
}

}  // namespace fixture
