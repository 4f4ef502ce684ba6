#include "aclab/analysis.hpp"

#include "aclab/error.hpp"
#include "aclab/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aclab {

namespace {

double dist(std::span<const double> u, const Point& a) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (u[c] - a[c]) * (u[c] - a[c]);
    return std::sqrt(s);
}

void require_rectangle(const Domain2D& d, const char* who) {
    if (!d.has_rectangle) throw DomainError(std::string(who) + ": domain has no flat parts");
}

void check_point(const Field2D& f, const Point& a, const char* who) {
    if (static_cast<int>(a.size()) != f.m) throw DomainError(std::string(who) + ": point dimension mismatch");
}

// Value on the column x at grid row j, linear between neighbouring columns.
Point column_value(const Field2D& f, double x, int j) {
    const Grid& g = f.domain->grid;
    const double fx = (x - g.x0) / g.dx;
    int i = static_cast<int>(std::floor(fx));
    i = std::clamp(i, 0, g.nx - 2);
    const double t = fx - i;
    Point v(static_cast<std::size_t>(f.m));
    const auto u0 = f.at(g.index(i, j));
    const auto u1 = f.at(g.index(i + 1, j));
    for (int c = 0; c < f.m; ++c) v[c] = (1 - t) * u0[c] + t * u1[c];
    return v;
}

}  // namespace

std::string to_string(LayerClass c) {
    switch (c) {
        case LayerClass::BoundaryLayer: return "BoundaryLayer";
        case LayerClass::InternalLayer: return "InternalLayer";
        case LayerClass::Ambiguous: return "Ambiguous";
    }
    return "?";
}

double delta0(const Potential& p) { return 0.5 * p.min_well_separation(); }

LayerReport classify_layer(const Field2D& f, const Potential& p, const Point& a_minus, const Point& a_plus,
                           double residual_tol) {
    const Domain2D& d = *f.domain;
    require_rectangle(d, "classify_layer");
    check_point(f, a_minus, "classify_layer");
    check_point(f, a_plus, "classify_layer");
    const double res = residual_norm(f, p);
    if (!(res <= residual_tol))
        throw DomainError("classify_layer: field is not converged (residual " + std::to_string(res) + ")");

    LayerReport r;
    r.delta0 = delta0(p);
    const auto to_plus = distance_field(d, Target::PlusBoundary);
    const auto to_R = distance_field(d, Target::R);
    const double l = d.l, h = d.h, margin = h / 4.0;
    const Grid& g = d.grid;
    bool block_seen = false, outside_seen = false;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (d.kind[k] != NodeKind::Interior) continue;
            const double x = g.x(i), y = g.y(j);
            const auto u = f.at(k);
            const double dm = dist(u, a_minus), dp = dist(u, a_plus);
            if (y >= h / 3.0 && y <= 2.0 * h / 3.0) r.band_deviation = std::max(r.band_deviation, dm);
            if (dp < r.delta0) r.plus_reach = std::max(r.plus_reach, to_plus[k]);
            if (x >= margin && x <= l - margin && y > 0.0 && y < h) {
                block_seen = true;
                r.block_deviation = std::max(r.block_deviation, dp);
            }
            if (to_R[k] >= margin) {
                outside_seen = true;
                r.outside_deviation = std::max(r.outside_deviation, dm);
            }
        }
    if (!block_seen) r.block_deviation = std::numeric_limits<double>::infinity();
    if (!outside_seen) r.outside_deviation = std::numeric_limits<double>::infinity();
    const bool boundary = r.band_deviation < r.delta0 && r.plus_reach < margin;
    const bool internal = r.block_deviation < r.delta0 && r.outside_deviation < r.delta0;
    if (boundary && !internal) r.classification = LayerClass::BoundaryLayer;
    else if (internal && !boundary) r.classification = LayerClass::InternalLayer;
    return r;
}

DecayFit decay_fit(const Field2D& f, const Point& a, const std::vector<double>& distance, double delta0,
                   double delta_floor, const std::vector<std::uint8_t>* exclude) {
    check_point(f, a, "decay_fit");
    const Domain2D& d = *f.domain;
    if (distance.size() != d.grid.size()) throw DomainError("decay_fit: distance field size mismatch");
    if (!(delta_floor > 0.0 && delta_floor < delta0)) throw DomainError("decay_fit: need 0 < delta_floor < delta0");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < d.grid.size(); ++k) {
        if (d.kind[k] != NodeKind::Interior || !(distance[k] > 0.0)) continue;
        if (exclude && (*exclude)[k]) continue;
        const double e = dist(f.at(k), a);
        if (!(e > delta_floor && e < delta0)) continue;
        const double x = distance[k] / f.eps, y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    if (n < 8) throw DomainError("decay_fit: only " + std::to_string(n) + " nodes in the fit window");
    const double N = static_cast<double>(n);
    const double vx = sxx - sx * sx / N, vy = syy - sy * sy / N, cxy = sxy - sx * sy / N;
    if (!(vx > 0.0)) throw DomainError("decay_fit: distances in the fit window are all equal");
    DecayFit out;
    const double slope = cxy / vx;
    const double icept = (sy - slope * sx) / N;
    out.k = -slope;
    out.K = std::exp(icept);
    out.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    out.samples = n;
    out.offset = out.k > 0.0 ? std::max(0.0, f.eps * (icept - std::log(delta0)) / out.k) : 0.0;
    return out;
}

ColumnProbe probe_column(const Field2D& f, const Point& a_plus, double x, double delta0, double K) {
    const Domain2D& d = *f.domain;
    require_rectangle(d, "probe_column");
    check_point(f, a_plus, "probe_column");
    if (!(x > 0.0 && x < d.l)) throw DomainError("probe_column: probe abscissa outside (0, l)");
    const Grid& g = d.grid;
    const int j0 = static_cast<int>(std::lround(-g.y0 / g.dx));
    const int jtop = static_cast<int>(std::lround((d.h - g.y0) / g.dx));
    ColumnProbe out;
    out.thickness = d.h;
    bool crossed = false;
    double prev = 0.0;
    for (int j = j0; j <= jtop; ++j) {
        const double y = g.y(j);
        const double e = dist(column_value(f, x, j), a_plus);
        if (y <= K * f.eps + 1e-12 * g.dx) out.sup_near = std::max(out.sup_near, e);
        if (!crossed && e >= delta0) {
            crossed = true;
            out.thickness = j == j0 ? 0.0 : y - g.dx * (e - delta0) / (e - prev);
        }
        prev = e;
    }
    const Point u0 = column_value(f, x, j0), u1 = column_value(f, x, j0 + 1), u2 = column_value(f, x, j0 + 2);
    double s = 0.0;
    for (int c = 0; c < f.m; ++c) {
        const double uy = (-3.0 * u0[c] + 4.0 * u1[c] - u2[c]) / (2.0 * g.dx);
        s += uy * uy;
    }
    out.eps_uy = f.eps * std::sqrt(s);
    return out;
}

ThicknessTrend thickness_scaling(const std::vector<const Field2D*>& sweep, const Point& a_plus, double x_hat,
                                 double delta0, double K) {
    if (sweep.size() < 3) throw DomainError("thickness_scaling: need at least three sweep points");
    ThicknessTrend t;
    t.x_hat = x_hat;
    t.K = K;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const Field2D& f = *sweep[i];
        if (i > 0 && !(f.eps < sweep[i - 1]->eps)) throw DomainError("thickness_scaling: eps must decrease");
        const ColumnProbe c = probe_column(f, a_plus, x_hat, delta0, K);
        t.rows.push_back({f.eps, c.thickness, c.thickness / f.eps, c.sup_near, c.eps_uy});
    }
    t.thickness_over_eps_increasing = t.eps_uy_decreasing = t.sup_near_decreasing = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        t.thickness_over_eps_increasing &= t.rows[i].thickness_over_eps > t.rows[i - 1].thickness_over_eps;
        t.eps_uy_decreasing &= t.rows[i].eps_uy < t.rows[i - 1].eps_uy;
        t.sup_near_decreasing &= t.rows[i].sup_near < t.rows[i - 1].sup_near;
    }
    return t;
}

LimitPartition limit_partition(const Field2D& f, const Potential& p, LayerClass expected, const Point& a_minus,
                               const Point& a_plus) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const double area = g.dx * g.dx;
    const auto& wells = p.wells();
    LimitPartition out;
    out.nearest_well.assign(g.size(), -1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (d.node_weight[k] <= 0.0) continue;
            const auto u = f.at(k);
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t w = 0; w < wells.size(); ++w) {
                const double e = dist(u, wells[w]);
                if (e < bd) {
                    bd = e;
                    best = static_cast<int>(w);
                }
            }
            out.nearest_well[k] = best;
            out.l1_to_nearest += d.node_weight[k] * area * bd;
            double de = bd;
            if (expected == LayerClass::BoundaryLayer) {
                de = dist(u, a_minus);
            } else if (expected == LayerClass::InternalLayer) {
                require_rectangle(d, "limit_partition");
                const double x = g.x(i), y = g.y(j);
                const bool inR = x > 0.0 && x < d.l && y > 0.0 && y < d.h;
                de = dist(u, inR ? a_plus : a_minus);
            }
            out.l1_to_expected += d.node_weight[k] * area * de;
        }
    return out;
}

double scaled_gradient_bound(const Field2D& f) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const std::size_t row = static_cast<std::size_t>(g.nx);
    double best = 0.0;
    auto edge = [&](std::size_t a, std::size_t b) {
        if (d.kind[a] != NodeKind::Interior && d.kind[b] != NodeKind::Interior) return;
        double s = 0.0;
        for (int c = 0; c < f.m; ++c) {
            const double q = f.values[a * f.m + c] - f.values[b * f.m + c];
            s += q * q;
        }
        best = std::max(best, std::sqrt(s));
    };
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            edge(k, k + 1);
            edge(k, k + row);
        }
    return f.eps * best / g.dx;
}

std::string to_string(BoundCase c) {
    switch (c) {
        case BoundCase::BoundaryLayer: return "boundary_layer";
        case BoundCase::InternalLayer: return "internal_layer";
        case BoundCase::Disc: return "disc";
    }
    return "?";
}

std::vector<BoundRow> bound_report(const BoundInputs& in) {
    if (!(in.eps > 0.0) || !(in.sigma > 0.0)) throw DomainError("bound_report: missing eps or connection data");
    const double e = in.eps;
    const double le = std::abs(std::log(e));
    std::vector<BoundRow> rows;
    auto upper = [&](double lead, double scale) {
        BoundRow r{"upper_total", lead, in.total, scale, (in.total - lead) / scale, true};
        if (in.comparison > 0.0) r.holds = in.total <= in.comparison;
        rows.push_back(r);
    };
    auto lower = [&](const std::string& name, double lead, double measured, double scale) {
        rows.push_back({name, lead, measured, scale, (lead - measured) / scale, true});
    };
    switch (in.which) {
        case BoundCase::BoundaryLayer: {
            const double lead = 2.0 * in.sigma * in.l;
            upper(lead, e * le * le * le);
            lower("lower_total", lead, in.total, e);
            lower("lower_directional", lead, in.directional, std::sqrt(e));
            lower("lower_directional_refined", lead, in.directional, e);
            break;
        }
        case BoundCase::InternalLayer: {
            const double lead = 2.0 * in.sigma * in.h;
            upper(lead, e);
            lower("lower_total", lead, in.total, std::sqrt(e));
            lower("lower_total_refined", lead, in.total, e);
            lower("lower_directional", lead, in.directional, e);
            // The alternative leading term 2 sigma l, for comparison only.
            rows.push_back({"leading_2sigma_l", 2.0 * in.sigma * in.l, in.total, 1.0,
                            in.total - 2.0 * in.sigma * in.l, true});
            break;
        }
        case BoundCase::Disc: {
            if (!(in.perimeter > 0.0)) throw DomainError("bound_report: disc perimeter missing");
            const double lead = in.sigma * in.perimeter;
            upper(lead, e);
            lower("lower_total_relative", lead, in.total, lead * std::cbrt(e));
            break;
        }
    }
    return rows;
}

bool constants_stable(const std::vector<double>& constants, double factor) {
    if (constants.empty()) return true;
    const double c0 = std::max(constants.front(), 0.0);
    for (std::size_t i = 1; i < constants.size(); ++i)
        if (constants[i] > factor * c0) return false;
    return true;
}

double spread(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi / lo;
}

HamiltonianFlux standard_hamiltonian(const Field2D& f, const Potential& p) {
    const Domain2D& d = *f.domain;
    require_rectangle(d, "standard_hamiltonian");
    return hamiltonian_flux(f, p, d.l / 4.0, 3.0 * d.l / 4.0, d.h / 2.0);
}

}  // namespace aclab
