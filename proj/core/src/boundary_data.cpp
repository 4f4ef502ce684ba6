#include "aclab/boundary_data.hpp"

#include "aclab/error.hpp"

#include <algorithm>
#include <cmath>

namespace aclab {

namespace {

double norm_diff(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

double norm(const Point& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::string to_string(BoundaryMode m) { return m == BoundaryMode::StepH3 ? "step_h3" : "const_z"; }

BoundaryMode boundary_mode_from_string(const std::string& s) {
    if (s == "step_h3") return BoundaryMode::StepH3;
    if (s == "const_z") return BoundaryMode::ConstZ;
    throw ConfigError("unknown boundary mode '" + s + "'");
}

Point flat_value(const BoundaryData& b, double l, double x) {
    if (b.mode == BoundaryMode::ConstZ) return b.z;
    if (!(x > 0.0 && x < l)) return b.a_minus;
    const double w = b.C0 * b.eps;
    const double t = w > 0.0 ? std::min({1.0, x / w, (l - x) / w}) : 1.0;
    Point out(b.a_minus.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = b.a_minus[k] + t * (b.a_plus[k] - b.a_minus[k]);
    return out;
}

Point eval_boundary(const BoundaryData& b, const Domain2D& d, double x, double y) {
    const double tol = 1e-6 * d.grid.dx;
    if (!std::isfinite(x) || !std::isfinite(y) || std::abs(d.sdf(x, y)) > tol)
        throw DomainError("eval_boundary: point is not on the boundary");
    if (b.mode == BoundaryMode::ConstZ) return b.z;
    if (!d.has_rectangle) return b.a_minus;
    const bool flat = (std::abs(y) <= tol || std::abs(y - d.h) <= tol) && x > 0.0 && x < d.l;
    return flat ? flat_value(b, d.l, x) : b.a_minus;
}

ValidationReport validate_boundary(const BoundaryData& b, double l, double dx) {
    ValidationReport rep;
    HypothesisCheck bound{"bounded_by_M", true, {}};
    HypothesisCheck slope{"ramp_slope", true, {}};
    HypothesisCheck cont{"continuity", true, {}};
    if (b.mode == BoundaryMode::ConstZ) {
        if (norm(b.z) > b.M) {
            bound.passed = false;
            bound.witnesses.push_back(b.z);
        }
        rep.checks = {bound, slope, cont};
        return rep;
    }
    for (const Point* a : {&b.a_minus, &b.a_plus})
        if (norm(*a) > b.M) {
            bound.passed = false;
            bound.witnesses.push_back(*a);
        }
    const double jump = norm_diff(b.a_plus, b.a_minus);
    const double w = b.C0 * b.eps;
    if (!(w > 0.0)) {
        // A step cannot satisfy any slope bound and jumps at x = 0 and x = l.
        slope.passed = false;
        slope.witnesses.push_back({0.0});
        cont.passed = jump == 0.0;
        if (!cont.passed) cont.witnesses = {{0.0}, {l}};
        rep.checks = {bound, slope, cont};
        return rep;
    }
    const double allowed = jump / w * (1.0 + 1e-9);
    const int n = std::max(2, static_cast<int>(std::ceil(l / dx)));
    Point prev = flat_value(b, l, 0.0);
    for (int i = 1; i <= n; ++i) {
        const double x = l * i / n;
        const Point cur = flat_value(b, l, x);
        const double s = norm_diff(cur, prev) / (l / n);
        if (s > allowed) {
            slope.passed = false;
            slope.witnesses.push_back({x});
        }
        prev = cur;
    }
    const double hstep = 1e-9 * std::max(1.0, l);
    for (double x : {0.0, w, l - w, l}) {
        const double gap = norm_diff(flat_value(b, l, x + hstep), flat_value(b, l, x - hstep));
        if (gap > 2.0 * hstep * allowed + 1e-12) {
            cont.passed = false;
            cont.witnesses.push_back({x});
        }
    }
    rep.checks = {bound, slope, cont};
    return rep;
}

}  // namespace aclab
