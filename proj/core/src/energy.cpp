#include "aclab/energy.hpp"

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aclab {

namespace {

void check_field(const Field2D& f) {
    if (!f.domain) throw DomainError("field has no domain");
    if (f.values.size() != f.domain->grid.size() * static_cast<std::size_t>(f.m))
        throw DomainError("field dimensions do not match the domain grid");
    if (!(f.eps > 0.0)) throw DomainError("field eps must be positive");
    for (double v : f.values)
        if (!std::isfinite(v)) throw DomainError("field contains non-finite values");
}

double sq_diff(const double* a, const double* b, int m) {
    double s = 0.0;
    for (int c = 0; c < m; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return s;
}

struct Sums {
    double kx = 0.0, ky = 0.0, pot = 0.0;
};

// Row-ordered sums of the three energy parts with the given weights.
Sums weighted_sums(const Field2D& f, const Potential& p, const std::vector<double>& nw,
                   const std::vector<double>& xw, const std::vector<double>& yw) {
    const Grid& g = f.domain->grid;
    const int m = f.m;
    std::vector<Sums> rows(static_cast<std::size_t>(g.ny));
    parallel_rows(rows.size(), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        Sums s;
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double* u = f.values.data() + k * m;
            if (nw[k] > 0.0) s.pot += nw[k] * p.value({u, static_cast<std::size_t>(m)});
            if (xw[k] > 0.0) s.kx += xw[k] * sq_diff(u, u + m, m);
            if (yw[k] > 0.0) s.ky += yw[k] * sq_diff(u, u + static_cast<std::size_t>(g.nx) * m, m);
        }
        rows[jj] = s;
    });
    Sums t;
    for (const auto& s : rows) {
        t.kx += s.kx;
        t.ky += s.ky;
        t.pot += s.pot;
    }
    const double a = g.dx * g.dx;
    t.pot *= a;
    return t;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError("bad number '" + item + "' in subdomain id");
        }
    }
    return out;
}

Point lerp(const Point& a, const Point& b, double t) {
    Point out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return out;
}

double dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

// Boundary crossings of the vertical line through x, bracketing y = h/2.
bool column_bounds(const Domain2D& d, double x, double& lo, double& hi) {
    const double mid = 0.5 * d.h;
    if (!(d.sdf(x, mid) < 0.0)) return false;
    auto root = [&](double a, double b) {
        // a inside, b outside
        for (int it = 0; it < 80; ++it) {
            const double c = 0.5 * (a + b);
            (d.sdf(x, c) < 0.0 ? a : b) = c;
        }
        return 0.5 * (a + b);
    };
    const double reach = d.grid.dx * (d.grid.ny + 2);
    double b = mid - reach;
    if (d.sdf(x, b) < 0.0) return false;
    lo = root(mid, b);
    b = mid + reach;
    if (d.sdf(x, b) < 0.0) return false;
    hi = root(mid, b);
    return true;
}

void require_h2_step(const Domain2D& d, const BoundaryData& b, const char* what) {
    if (!d.has_rectangle) throw DomainError(std::string(what) + ": needs a domain with flat parts");
    if (b.mode != BoundaryMode::StepH3) throw DomainError(std::string(what) + ": needs step_h3 boundary data");
}

}  // namespace

Field2D make_field(DomainPtr d, int m, double eps, const Point& fill) {
    if (!d) throw DomainError("make_field: missing domain");
    if (static_cast<int>(fill.size()) != m) throw DomainError("make_field: fill value has the wrong dimension");
    Field2D f;
    f.domain = std::move(d);
    f.m = m;
    f.eps = eps;
    f.values.resize(f.domain->grid.size() * static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < f.domain->grid.size(); ++k)
        std::copy(fill.begin(), fill.end(), f.values.begin() + static_cast<std::ptrdiff_t>(k * m));
    return f;
}

void impose_boundary(Field2D& f, const BoundaryData& b) {
    const Domain2D& d = *f.domain;
    for (std::size_t k = 0; k < d.grid.size(); ++k) {
        if (d.kind[k] != NodeKind::Frozen) continue;
        const Point v = eval_boundary(b, d, d.proj_x[k], d.proj_y[k]);
        if (static_cast<int>(v.size()) != f.m) throw DomainError("impose_boundary: dimension mismatch");
        std::copy(v.begin(), v.end(), f.at(k).begin());
    }
}

Subdomain make_subdomain(const Domain2D& d, const std::string& id) {
    Subdomain s;
    s.id = id;
    if (id == "omega") {
        s.weights = {d.node_weight, d.xedge_weight, d.yedge_weight};
        return s;
    }
    if (id.rfind("rect:", 0) == 0) {
        const auto v = parse_numbers(id.substr(5));
        if (v.size() != 4 || !(v[1] > v[0]) || !(v[3] > v[2])) throw DomainError("bad rectangle '" + id + "'");
        s.weights = region_weights(d, [v](double x, double y) {
            return x > v[0] && x < v[1] && y > v[2] && y < v[3];
        });
        return s;
    }
    if (!d.has_rectangle) throw DomainError("subdomain '" + id + "' needs a domain with flat parts");
    const double l = d.l, h = d.h;
    auto inR = [l, h](double x, double y) { return x > 0.0 && x < l && y > 0.0 && y < h; };
    if (id == "R") {
        s.weights = region_weights(d, inR);
    } else if (id == "omega_minus_R") {
        s.weights = region_weights(d, [inR](double x, double y) { return !inR(x, y); });
    } else if (id == "D_boundary") {
        s.weights = region_weights(d, [inR, h](double x, double y) {
            return inR(x, y) && (y < h / 3.0 || y > 2.0 * h / 3.0);
        });
    } else if (id == "D_internal") {
        s.weights = region_weights(d, [l](double x, double) { return !(x > 0.25 * l && x < 0.75 * l); });
    } else {
        throw DomainError("unknown subdomain '" + id + "'");
    }
    return s;
}

EnergyBreakdown total_energy(const Field2D& f, const Potential& p, const std::vector<Subdomain>& parts) {
    check_field(f);
    const Domain2D& d = *f.domain;
    const Sums s = weighted_sums(f, p, d.node_weight, d.xedge_weight, d.yedge_weight);
    EnergyBreakdown e;
    e.kinetic_x = s.kx;
    e.kinetic_y = s.ky;
    e.potential_part = s.pot;
    e.total = 0.5 * f.eps * (s.kx + s.ky) + s.pot / f.eps;
    for (const auto& part : parts) {
        const Sums t = weighted_sums(f, p, part.weights.node, part.weights.xedge, part.weights.yedge);
        e.subdomains[part.id] = 0.5 * f.eps * (t.kx + t.ky) + t.pot / f.eps;
    }
    return e;
}

double energy_and_gradient(const Field2D& f, const Potential& p, std::vector<double>& grad) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const int m = f.m;
    const double eps = f.eps;
    const double area = g.dx * g.dx;
    const std::size_t row = static_cast<std::size_t>(g.nx) * m;
    grad.assign(f.values.size(), 0.0);
    std::vector<Sums> rows(static_cast<std::size_t>(g.ny));
    parallel_rows(rows.size(), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        Sums s;
        std::vector<double> wu(static_cast<std::size_t>(m));
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double* u = f.values.data() + k * m;
            const double nw = d.node_weight[k];
            if (nw > 0.0) s.pot += nw * p.value({u, static_cast<std::size_t>(m)});
            if (d.xedge_weight[k] > 0.0) s.kx += d.xedge_weight[k] * sq_diff(u, u + m, m);
            if (d.yedge_weight[k] > 0.0) s.ky += d.yedge_weight[k] * sq_diff(u, u + row, m);
            if (d.kind[k] != NodeKind::Interior) continue;
            // Interior nodes are never on the grid rim, so all four neighbours exist.
            const double wl = d.xedge_weight[k - 1];
            const double wr = d.xedge_weight[k];
            const double wd = d.yedge_weight[k - static_cast<std::size_t>(g.nx)];
            const double wt = d.yedge_weight[k];
            p.gradient({u, static_cast<std::size_t>(m)}, wu);
            double* out = grad.data() + k * m;
            for (int c = 0; c < m; ++c) {
                const double lap = wl * (u[c] - u[c - m]) + wr * (u[c] - u[c + m]) +
                                   wd * (u[c] - u[c - static_cast<std::ptrdiff_t>(row)]) + wt * (u[c] - u[c + row]);
                out[c] = eps * lap + nw * area * wu[c] / eps;
            }
        }
        rows[jj] = s;
    });
    Sums t;
    for (const auto& s : rows) {
        t.kx += s.kx;
        t.ky += s.ky;
        t.pot += s.pot;
    }
    return 0.5 * eps * (t.kx + t.ky) + t.pot * area / eps;
}

std::vector<double> first_variation(const Field2D& f, const Potential& p) {
    check_field(f);
    std::vector<double> grad;
    energy_and_gradient(f, p, grad);
    const double inv = 1.0 / (f.domain->grid.dx * f.domain->grid.dx);
    for (double& v : grad) v *= inv;
    return grad;
}

DirectionalEnergy energy_directional(const Field2D& f, const Potential& p, Axis axis, const Subdomain& sub) {
    check_field(f);
    const std::vector<double> zero(sub.weights.node.size(), 0.0);
    const Sums s = axis == Axis::X ? weighted_sums(f, p, sub.weights.node, sub.weights.xedge, zero)
                                   : weighted_sums(f, p, sub.weights.node, zero, sub.weights.yedge);
    DirectionalEnergy out;
    out.kinetic_raw = axis == Axis::X ? s.kx : s.ky;
    out.potential_part = s.pot;
    out.value = 0.5 * f.eps * out.kinetic_raw + s.pot / f.eps;
    return out;
}

std::string to_string(ComparisonMode m) {
    switch (m) {
        case ComparisonMode::NormalTube: return "normal_tube";
        case ComparisonMode::BoundaryLayerABCD: return "boundary_layer_ABCD";
        case ComparisonMode::InternalLayer: return "internal_layer";
    }
    return "?";
}

ComparisonMode comparison_mode_from_string(const std::string& s) {
    for (auto m : {ComparisonMode::NormalTube, ComparisonMode::BoundaryLayerABCD, ComparisonMode::InternalLayer})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown comparison mode '" + s + "'");
}

Field2D build_comparison_field(DomainPtr dp, const Potential& p, const BoundaryData& b, const ConnectionProfile& conn,
                               ComparisonMode mode, const ComparisonOptions& opt) {
    if (!dp) throw DomainError("build_comparison_field: missing domain");
    if (!conn.tail_fit.converged) throw DomainError("build_comparison_field: profile tails did not converge");
    if (!(b.eps > 0.0)) throw DomainError("build_comparison_field: eps must be positive");
    const Domain2D& d = *dp;
    const Grid& g = d.grid;
    const double eps = b.eps;
    const int m = p.dimension();

    Field2D f;
    auto at = [&](double s) { return conn.profile.sample(s); };

    if (mode == ComparisonMode::NormalTube) {
        if (!conn.half_line) throw DomainError("normal_tube needs a half-line profile");
        if (b.mode != BoundaryMode::ConstZ) throw DomainError("normal_tube needs const_z boundary data");
        if (dist(conn.start, b.z) > 1e-12) throw DomainError("normal_tube: profile does not start at z");
        f = make_field(dp, m, eps, conn.end);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (d.kind[k] != NodeKind::Interior) continue;
            const Point v = at(-d.sd[k] / eps);
            std::copy(v.begin(), v.end(), f.at(k).begin());
        }
        impose_boundary(f, b);
        return f;
    }

    require_h2_step(d, b, "build_comparison_field");
    if (conn.half_line) throw DomainError("layer constructions need the full-line heteroclinic");
    if (dist(conn.start, b.a_minus) > 1e-12 || dist(conn.end, b.a_plus) > 1e-12)
        throw DomainError("build_comparison_field: heteroclinic does not join a_- to a_+");
    const double l = d.l, h = d.h;
    f = make_field(dp, m, eps, b.a_minus);

    if (mode == ComparisonMode::BoundaryLayerABCD) {
        const double k = conn.tail_fit.k;
        const double eta = eps * std::abs(std::log(eps)) / (2.0 * k);
        const double c0e = b.C0 * eps;
        // At coarse eps the collar C2 eps may not fit inside eta; it is then
        // narrowed to eta / 2.
        const double c2 = std::min(opt.C2, 0.5 * eta / eps);
        const double c2e = c2 * eps;
        if (!(2.0 * eta < 0.5 * h) || !(c0e < 0.5 * l))
            throw DomainError("boundary_layer_ABCD: layer does not fit the domain at this eps");
        const Point u_lo = at(c2 - eta / eps);
        const Point u_hi = at(eta / eps - c2);
        auto vbar = [&](double s) -> Point {
            if (s <= -eta) return b.a_minus;
            if (s >= eta) return b.a_plus;
            if (s < -eta + c2e) return lerp(b.a_minus, u_lo, (s + eta) / c2e);
            if (s > eta - c2e) return lerp(u_hi, b.a_plus, (s - eta + c2e) / c2e);
            return at(s / eps);
        };
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t kk = g.index(i, j);
                if (d.kind[kk] != NodeKind::Interior) continue;
                // The construction is symmetric under x -> l - x and y -> h - y.
                const double x = g.x(i), y = g.y(j);
                const double xr = x <= 0.5 * l ? x : l - x;
                const double yr = y <= 0.5 * h ? y : h - y;
                Point v = b.a_minus;
                if (xr >= c0e && yr <= 2.0 * eta) {
                    v = vbar(eta - yr);
                } else if (xr >= 0.0 && xr < c0e && yr <= 2.0 * eta * xr / c0e) {
                    // Interpolate along the line parallel to the hypotenuse
                    // between the data at (x0, 0) and the strip at x = C0 eps.
                    const double x0 = xr - yr * c0e / (2.0 * eta);
                    const double y1 = 2.0 * eta * (c0e - x0) / c0e;
                    const double theta = y1 > 0.0 ? std::clamp(yr / y1, 0.0, 1.0) : 0.0;
                    v = lerp(flat_value(b, l, x0), vbar(eta - y1), theta);
                }
                std::copy(v.begin(), v.end(), f.at(kk).begin());
            }
        }
        impose_boundary(f, b);
        return f;
    }

    // Internal layers.
    const double lambda = opt.collar_n * std::abs(std::log(eps));
    const double band = eps * lambda + eps;
    const Point u_l = at(-lambda);
    const Point u_r = at(lambda);
    auto psi = [&](double t) -> Point {
        if (t <= -band) return b.a_minus;
        if (t >= band) return b.a_plus;
        if (t < -eps * lambda) return lerp(b.a_minus, u_l, (t + band) / eps);
        if (t > eps * lambda) return lerp(u_r, b.a_plus, (t - eps * lambda) / eps);
        return at(t / eps);
    };
    for (int i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        if (x < -band || x > l + band) continue;
        double lo = 0.0, hi = h;
        if (x < 0.0 || x > l) {
            if (!column_bounds(d, x, lo, hi)) continue;
        }
        const double t = std::min(x, l - x);
        const Point pt = psi(t);
        const Point gt = (x > 0.0 && x < l) ? flat_value(b, l, x) : b.a_minus;
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t kk = g.index(i, j);
            if (d.kind[kk] != NodeKind::Interior) continue;
            const double etav = h * (g.y(j) - lo) / (hi - lo);
            const double blend = std::clamp(std::min(etav, h - etav) / eps, 0.0, 1.0);
            const Point v = lerp(gt, pt, blend);
            std::copy(v.begin(), v.end(), f.at(kk).begin());
        }
    }
    impose_boundary(f, b);
    return f;
}

HamiltonianFlux hamiltonian_flux(const Field2D& f, const Potential& p, double x0, double x1, double ytop) {
    check_field(f);
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    if (!d.has_rectangle) throw DomainError("hamiltonian_flux: needs a domain with flat parts");
    const int i0 = static_cast<int>(std::lround((x0 - g.x0) / g.dx));
    const int i1 = static_cast<int>(std::lround((x1 - g.x0) / g.dx));
    const int j0 = static_cast<int>(std::lround(-g.y0 / g.dx));
    const int jt = static_cast<int>(std::lround((ytop - g.y0) / g.dx));
    if (!(i1 > i0) || !(jt > j0 + 2) || g.x(i0) < -1e-12 || g.x(i1) > d.l + 1e-12 || g.y(jt) >= d.h)
        throw DomainError("hamiltonian_flux: rectangle is clipped by the domain");
    for (int j = j0 + 1; j <= jt; ++j)
        for (int i = i0; i <= i1; ++i)
            if (d.kind[g.index(i, j)] != NodeKind::Interior)
                throw DomainError("hamiltonian_flux: rectangle is clipped by the domain");

    const int m = f.m;
    const double dx = g.dx;
    const double eps = f.eps;
    auto u = [&](int i, int j, int c) { return f.values[g.index(i, j) * m + c]; };
    auto ux = [&](int i, int j, int c) { return (u(i + 1, j, c) - u(i - 1, j, c)) / (2.0 * dx); };
    auto uy = [&](int i, int j, int c) {
        if (j == j0) return (-3.0 * u(i, j, c) + 4.0 * u(i, j + 1, c) - u(i, j + 2, c)) / (2.0 * dx);
        return (u(i, j + 1, c) - u(i, j - 1, c)) / (2.0 * dx);
    };
    auto trap = [](int a, int b, int q) { return (q == a || q == b) ? 0.5 : 1.0; };

    HamiltonianFlux r;
    r.x0 = g.x(i0);
    r.x1 = g.x(i1);
    r.ytop = g.y(jt);
    for (int i = i0; i <= i1; ++i) {
        double ax = 0.0, ay = 0.0, by = 0.0;
        for (int c = 0; c < m; ++c) {
            ax += ux(i, jt, c) * ux(i, jt, c);
            ay += uy(i, jt, c) * uy(i, jt, c);
            by += uy(i, j0, c) * uy(i, j0, c);
        }
        const double w = trap(i0, i1, i) * dx;
        const double W = p.value(f.at(g.index(i, jt)));
        r.top += w * (0.5 * eps * eps * (ax - ay) + W) / eps;
        r.bottom += w * 0.5 * eps * by;
    }
    for (int j = j0; j <= jt; ++j) {
        const double w = trap(j0, jt, j) * dx;
        double sm = 0.0, sp = 0.0;
        for (int c = 0; c < m; ++c) {
            sm += ux(i0, j, c) * uy(i0, j, c);
            sp += ux(i1, j, c) * uy(i1, j, c);
        }
        r.side_minus += w * eps * sm;
        r.side_plus += w * eps * sp;
        r.abs_side_minus += w * eps * std::abs(sm);
        r.abs_side_plus += w * eps * std::abs(sp);
    }
    r.residual = r.top + r.bottom - (r.side_plus - r.side_minus);
    return r;
}

ModicaReport modica_residual(const Field2D& f, const Potential& p, double tol, const std::vector<std::uint8_t>* exclude,
                             bool allow_vector) {
    check_field(f);
    if (f.m != 1 && !allow_vector) throw DomainError("modica_residual: the inequality is only claimed for scalar fields");
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const int m = f.m;
    ModicaReport rep;
    rep.tol = tol;
    rep.residual.assign(g.size(), 0.0);
    const double eps2 = f.eps * f.eps;
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (d.kind[k] != NodeKind::Interior) continue;
            const std::size_t nb[4] = {k - 1, k + 1, k - static_cast<std::size_t>(g.nx), k + static_cast<std::size_t>(g.nx)};
            if (exclude) {
                bool skip = (*exclude)[k] != 0;
                for (std::size_t q : nb) skip = skip || (*exclude)[q] != 0;
                if (skip) continue;
            }
            // Frozen neighbours across a cut edge enter as ghosts at the crossing.
            const double cut[4] = {d.xedge_cut[k - 1], d.xedge_cut[k], d.yedge_cut[nb[2]], d.yedge_cut[k]};
            double grad2 = 0.0;
            for (int c = 0; c < m; ++c) {
                const double uk = f.values[k * m + c];
                double v[4];
                for (int q = 0; q < 4; ++q) v[q] = uk + (f.values[nb[q] * m + c] - uk) / cut[q];
                const double gx = (v[1] - v[0]) / (2.0 * g.dx);
                const double gy = (v[3] - v[2]) / (2.0 * g.dx);
                grad2 += gx * gx + gy * gy;
            }
            const double r = std::max(0.0, 0.5 * eps2 * grad2 - p.value(f.at(k)));
            rep.residual[k] = r;
            if (r > rep.max) {
                rep.max = r;
                rep.argmax = k;
            }
            if (r > tol) rep.violation_area += d.node_weight[k] * g.dx * g.dx;
        }
    }
    return rep;
}

}  // namespace aclab
