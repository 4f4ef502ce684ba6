#include "aclab/geometry.hpp"

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aclab {

namespace {

constexpr int kSub = 8;
constexpr double kMinWeight = 1.0 / 128.0;
constexpr double kMinCut = 1.0 / 64.0;
constexpr int kPad = 3;

using Projector = std::function<void(double, double, double&, double&)>;

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

// Inside fraction of the dx x dx box centered at (cx, cy).
double box_fraction(const SignedDistance& sdf, double cx, double cy, double dx,
                    const std::function<bool(double, double)>* extra = nullptr) {
    int hits = 0;
    for (int a = 0; a < kSub; ++a) {
        const double x = cx + dx * ((a + 0.5) / kSub - 0.5);
        for (int b = 0; b < kSub; ++b) {
            const double y = cy + dx * ((b + 0.5) / kSub - 0.5);
            if (sdf(x, y) < 0.0 && (!extra || (*extra)(x, y))) ++hits;
        }
    }
    return static_cast<double>(hits) / (kSub * kSub);
}

bool is_integer_multiple(double a, double dx) {
    const double q = a / dx;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

void numeric_projection(const SignedDistance& sdf, double scale, double px, double py, double& qx, double& qy) {
    qx = px;
    qy = py;
    const double hstep = 1e-7 * scale;
    for (int it = 0; it < 8; ++it) {
        const double d = sdf(qx, qy);
        const double gx = (sdf(qx + hstep, qy) - sdf(qx - hstep, qy)) / (2 * hstep);
        const double gy = (sdf(qx, qy + hstep) - sdf(qx, qy - hstep)) / (2 * hstep);
        const double gn = std::hypot(gx, gy);
        if (gn == 0.0) break;
        qx -= d * gx / gn;
        qy -= d * gy / gn;
        if (std::abs(d) < 1e-13 * scale) break;
    }
}

// Fills masks, projections and weights once grid, sdf and the flat-part
// parameters are set.
void finalize(Domain2D& d, const Projector& project) {
    const Grid& g = d.grid;
    const std::size_t N = g.size();
    const double dx = g.dx;
    d.kind.assign(N, NodeKind::Outside);
    d.tag.assign(N, BoundaryTag::None);
    d.proj_x.assign(N, 0.0);
    d.proj_y.assign(N, 0.0);
    d.sd.assign(N, 0.0);
    d.node_weight.assign(N, 0.0);
    d.xedge_weight.assign(N, 0.0);
    d.yedge_weight.assign(N, 0.0);
    const double tol = 1e-9 * dx;

    parallel_rows(static_cast<std::size_t>(g.ny), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double x = g.x(i), y = g.y(j);
            const double s = d.sdf(x, y);
            d.sd[k] = s;
            if (s < 0.0) {
                d.kind[k] = NodeKind::Interior;
            } else if (s <= 1.5 * dx) {
                d.kind[k] = NodeKind::Frozen;
                double qx = 0.0, qy = 0.0;
                project(x, y, qx, qy);
                d.proj_x[k] = qx;
                d.proj_y[k] = qy;
                const bool flat = d.has_rectangle && qx > tol && qx < d.l - tol &&
                                  (std::abs(qy) <= tol || std::abs(qy - d.h) <= tol);
                d.tag[k] = flat ? BoundaryTag::Plus : BoundaryTag::Minus;
            }
            auto weight = [&](double cx, double cy, double sd_center) {
                if (sd_center < -dx) return 1.0;
                if (sd_center > dx) return 0.0;
                return box_fraction(d.sdf, cx, cy, dx);
            };
            d.node_weight[k] = weight(x, y, s);
            if (i + 1 < g.nx) {
                const double mx = x + 0.5 * dx;
                d.xedge_weight[k] = weight(mx, y, d.sdf(mx, y));
            }
            if (j + 1 < g.ny) {
                const double my = y + 0.5 * dx;
                d.yedge_weight[k] = weight(x, my, d.sdf(x, my));
            }
        }
    });

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const bool in = d.kind[k] == NodeKind::Interior;
            if (in) d.node_weight[k] = std::max(d.node_weight[k], kMinWeight);
            if (i + 1 < g.nx && (in || d.kind[g.index(i + 1, j)] == NodeKind::Interior))
                d.xedge_weight[k] = std::max(d.xedge_weight[k], kMinWeight);
            if (j + 1 < g.ny && (in || d.kind[g.index(i, j + 1)] == NodeKind::Interior))
                d.yedge_weight[k] = std::max(d.yedge_weight[k], kMinWeight);
        }
    }

    // Edges from an interior node to a frozen one: the frozen value acts as a
    // ghost placed at the boundary crossing, so the difference is divided by
    // the crossing fraction theta.
    d.xedge_cut.assign(N, 1.0);
    d.yedge_cut.assign(N, 1.0);
    auto crossing = [&](std::size_t a, std::size_t b, double ax, double ay, double bx, double by) {
        const bool ain = d.kind[a] == NodeKind::Interior, bin = d.kind[b] == NodeKind::Interior;
        if (ain == bin || (d.kind[a] == NodeKind::Outside || d.kind[b] == NodeKind::Outside)) return 1.0;
        if (bin) {
            std::swap(ax, bx);
            std::swap(ay, by);
        }
        double lo = 0.0, hi = 1.0;  // sdf < 0 at lo, >= 0 at hi
        for (int it = 0; it < 40; ++it) {
            const double t = 0.5 * (lo + hi);
            if (d.sdf(ax + t * (bx - ax), ay + t * (by - ay)) < 0.0) lo = t;
            else hi = t;
        }
        return std::max(hi, kMinCut);
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double x = g.x(i), y = g.y(j);
            if (i + 1 < g.nx) {
                const double t = crossing(k, k + 1, x, y, x + dx, y);
                d.xedge_cut[k] = t;
                d.xedge_weight[k] /= t * t;
            }
            if (j + 1 < g.ny) {
                const double t = crossing(k, k + static_cast<std::size_t>(g.nx), x, y, x, y + dx);
                d.yedge_cut[k] = t;
                d.yedge_weight[k] /= t * t;
            }
        }
}

Grid make_grid(double xmin, double xmax, double ymin, double ymax, double dx) {
    Grid g;
    g.dx = dx;
    const long ix0 = static_cast<long>(std::floor(xmin / dx + 1e-9)) - kPad;
    const long iy0 = static_cast<long>(std::floor(ymin / dx + 1e-9)) - kPad;
    const long ix1 = static_cast<long>(std::ceil(xmax / dx - 1e-9)) + kPad;
    const long iy1 = static_cast<long>(std::ceil(ymax / dx - 1e-9)) + kPad;
    g.x0 = static_cast<double>(ix0) * dx;
    g.y0 = static_cast<double>(iy0) * dx;
    g.nx = static_cast<int>(ix1 - ix0 + 1);
    g.ny = static_cast<int>(iy1 - iy0 + 1);
    return g;
}

void check_dx(double dx) {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("grid spacing must be positive");
}

}  // namespace

std::string to_string(Target t) {
    switch (t) {
        case Target::PlusBoundary: return "plus_boundary";
        case Target::Boundary: return "boundary";
        case Target::R: return "R";
        case Target::OmegaMinusR: return "omega_minus_R";
    }
    return "?";
}

Target target_from_string(const std::string& s) {
    for (Target t : {Target::PlusBoundary, Target::Boundary, Target::R, Target::OmegaMinusR})
        if (to_string(t) == s) return t;
    throw DomainError("unknown distance target '" + s + "'");
}

std::size_t Domain2D::interior_count() const {
    return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), NodeKind::Interior));
}

std::size_t Domain2D::frozen_count() const {
    return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), NodeKind::Frozen));
}

double Domain2D::area() const {
    double s = 0.0;
    for (std::size_t k = 0; k < node_weight.size(); ++k)
        if (kind[k] != NodeKind::Outside || node_weight[k] > 0.0) s += node_weight[k];
    return s * grid.dx * grid.dx;
}

double Domain2D::perimeter() const {
    const Grid& g = grid;
    double total = 0.0;
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v[4] = {sd[g.index(i, j)], sd[g.index(i + 1, j)], sd[g.index(i + 1, j + 1)],
                                 sd[g.index(i, j + 1)]};
            const double px[4] = {0, 1, 1, 0};
            const double py[4] = {0, 0, 1, 1};
            double cx[4], cy[4];
            int nc = 0;
            for (int e = 0; e < 4; ++e) {
                const int a = e, b = (e + 1) % 4;
                if ((v[a] < 0.0) != (v[b] < 0.0)) {
                    const double t = v[a] / (v[a] - v[b]);
                    cx[nc] = px[a] + t * (px[b] - px[a]);
                    cy[nc] = py[a] + t * (py[b] - py[a]);
                    ++nc;
                }
            }
            for (int c = 0; c + 1 < nc; c += 2) total += std::hypot(cx[c + 1] - cx[c], cy[c + 1] - cy[c]);
        }
    }
    return total * g.dx;
}

double Domain2D::plus_boundary_length() const { return has_rectangle ? 2.0 * l : 0.0; }

Domain2D build_stadium(double l, double h, double dx) {
    if (!(l > 0.0) || !(h > 0.0)) throw DomainError("build_stadium: l and h must be positive");
    check_dx(dx);
    if (dx > std::min(l, h) / 32.0 * (1.0 + 1e-12))
        throw ResolutionError("build_stadium: dx must be <= min(l, h)/32");
    if (!is_integer_multiple(l, dx) || !is_integer_multiple(h, dx))
        throw ResolutionError("build_stadium: l/dx and h/dx must be integers");
    Domain2D d;
    d.shape = ShapeKind::Stadium;
    d.name = "stadium";
    d.l = l;
    d.h = h;
    d.has_rectangle = true;
    const double rc = 0.5 * h;
    d.sdf = [l, rc](double x, double y) {
        const double cx = std::clamp(x, 0.0, l);
        return std::hypot(x - cx, y - rc) - rc;
    };
    d.grid = make_grid(-rc, l + rc, 0.0, h, dx);
    finalize(d, [l, rc](double x, double y, double& qx, double& qy) {
        const double cx = std::clamp(x, 0.0, l);
        const double n = std::hypot(x - cx, y - rc);
        if (n == 0.0) {
            qx = cx;
            qy = 0.0;
            return;
        }
        qx = cx + rc * (x - cx) / n;
        qy = rc + rc * (y - rc) / n;
        // Snap the flat parts so the plus tag sees exact coordinates.
        if (x > 0.0 && x < l) {
            qx = x;
            qy = y < rc ? 0.0 : 2.0 * rc;
        }
    });
    return d;
}

Domain2D build_disc(double r, double dx) {
    if (!(r > 0.0)) throw DomainError("build_disc: radius must be positive");
    check_dx(dx);
    if (dx > r / 32.0 * (1.0 + 1e-12)) throw ResolutionError("build_disc: dx must be <= r/32");
    Domain2D d;
    d.shape = ShapeKind::Disc;
    d.name = "disc";
    d.r = r;
    d.sdf = [r](double x, double y) { return std::hypot(x, y) - r; };
    d.grid = make_grid(-r, r, -r, r, dx);
    finalize(d, [r](double x, double y, double& qx, double& qy) {
        const double n = std::hypot(x, y);
        qx = n > 0.0 ? r * x / n : r;
        qy = n > 0.0 ? r * y / n : 0.0;
    });
    return d;
}

Domain2D build_generic(const SignedDistance& sdf, double xmin, double xmax, double ymin, double ymax, double dx,
                       double l, double h, const std::string& name) {
    check_dx(dx);
    if (!sdf) throw DomainError("build_generic: missing signed distance");
    if (!(xmax > xmin) || !(ymax > ymin)) throw DomainError("build_generic: empty bounding box");
    Domain2D d;
    d.shape = ShapeKind::Generic;
    d.name = name;
    d.sdf = sdf;
    if (l > 0.0 && h > 0.0) {
        if (!is_integer_multiple(l, dx) || !is_integer_multiple(h, dx))
            throw ResolutionError("build_generic: l/dx and h/dx must be integers");
        d.l = l;
        d.h = h;
        d.has_rectangle = true;
    }
    d.grid = make_grid(xmin, xmax, ymin, ymax, dx);
    const double scale = std::max(xmax - xmin, ymax - ymin);
    finalize(d, [sdf, scale](double x, double y, double& qx, double& qy) {
        numeric_projection(sdf, scale, x, y, qx, qy);
    });
    return d;
}

H2Report validate_h2(const Domain2D& d) {
    H2Report rep;
    if (!d.has_rectangle) {
        rep.passed = false;
        rep.failures.push_back("domain has no flat parts (l, h unset)");
        return rep;
    }
    const Grid& g = d.grid;
    const int i0 = static_cast<int>(std::lround(-g.x0 / g.dx));
    const int i1 = i0 + static_cast<int>(std::lround(d.l / g.dx));
    const int j0 = static_cast<int>(std::lround(-g.y0 / g.dx));
    const int j1 = j0 + static_cast<int>(std::lround(d.h / g.dx));
    const double tol = 1e-9 * g.dx;
    auto fail = [&](const std::string& what, int i, int j) {
        rep.passed = false;
        if (rep.failures.size() < 20)
            rep.failures.push_back(what + " at (" + std::to_string(g.x(i)) + ", " + std::to_string(g.y(j)) + ")");
    };
    if (i0 < 0 || i1 >= g.nx || j0 < 1 || j1 + 1 >= g.ny) {
        rep.passed = false;
        rep.failures.push_back("rectangle not covered by the grid");
        return rep;
    }
    for (int i = i0; i <= i1; ++i) {
        for (int j = j0 + 1; j < j1; ++j)
            if (d.kind[g.index(i, j)] != NodeKind::Interior) fail("node of [0,l]x(0,h) not inside", i, j);
        for (int j : {j0, j1}) {
            const std::size_t k = g.index(i, j);
            if (std::abs(d.sd[k]) > tol) fail("node of [0,l]x{0,h} not on the boundary", i, j);
            if (i > i0 && i < i1 && d.tag[k] != BoundaryTag::Plus) fail("flat boundary node not tagged plus", i, j);
        }
        if (d.sd[g.index(i, j0 - 1)] <= 0.0) fail("domain extends below y = 0", i, j0 - 1);
        if (d.sd[g.index(i, j1 + 1)] <= 0.0) fail("domain extends above y = h", i, j1 + 1);
    }
    return rep;
}

std::vector<double> squared_edt(const std::vector<std::uint8_t>& mask, int nx, int ny) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(mask.size());
    for (std::size_t k = 0; k < mask.size(); ++k) f[k] = mask[k] ? 0.0 : inf;

    // One-dimensional lower envelope transform over a strided line.
    auto pass = [&](std::size_t start, std::size_t stride, int n) {
        std::vector<double> src(n), out(n);
        for (int q = 0; q < n; ++q) src[q] = f[start + stride * q];
        std::vector<int> v(n);
        std::vector<double> z(n + 1);
        int k = -1;
        for (int q = 0; q < n; ++q) {
            if (!std::isfinite(src[q])) continue;
            if (k < 0) {
                k = 0;
                v[0] = q;
                z[0] = -inf;
                z[1] = inf;
                continue;
            }
            double s = 0.0;
            for (;;) {
                const int p = v[k];
                s = ((src[q] + q * q) - (src[p] + p * p)) / (2.0 * (q - p));
                if (s <= z[k] && k > 0) {
                    --k;
                    continue;
                }
                break;
            }
            if (s <= z[k]) {
                // k == 0 and the new parabola dominates everywhere
                v[0] = q;
                z[0] = -inf;
                z[1] = inf;
                continue;
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = inf;
        }
        if (k < 0) return;
        int c = 0;
        for (int q = 0; q < n; ++q) {
            while (z[c + 1] < q) ++c;
            const double dq = q - v[c];
            out[q] = dq * dq + src[v[c]];
        }
        for (int q = 0; q < n; ++q) f[start + stride * q] = out[q];
    };
    for (int i = 0; i < nx; ++i) pass(static_cast<std::size_t>(i), static_cast<std::size_t>(nx), ny);
    for (int j = 0; j < ny; ++j) pass(static_cast<std::size_t>(j) * nx, 1, nx);
    return f;
}

std::vector<double> distance_field(const Domain2D& d, Target target) {
    const Grid& g = d.grid;
    std::vector<double> out(g.size(), 0.0);
    if (target == Target::Boundary) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::abs(d.sd[k]);
        return out;
    }
    if (!d.has_rectangle) throw DomainError("distance_field: target " + to_string(target) + " needs an h2 domain");
    const double l = d.l, h = d.h;
    switch (target) {
        case Target::PlusBoundary:
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    out[g.index(i, j)] = std::min(segment_distance(g.x(i), g.y(j), 0, 0, l, 0),
                                                  segment_distance(g.x(i), g.y(j), 0, h, l, h));
            break;
        case Target::R:
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double ddx = std::max({0.0, -g.x(i), g.x(i) - l});
                    const double ddy = std::max({0.0, -g.y(j), g.y(j) - h});
                    out[g.index(i, j)] = std::hypot(ddx, ddy);
                }
            break;
        case Target::OmegaMinusR: {
            std::vector<std::uint8_t> mask(g.size(), 0);
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double x = g.x(i), y = g.y(j);
                    const bool inR = x > 0.0 && x < l && y > 0.0 && y < h;
                    mask[g.index(i, j)] = d.sd[g.index(i, j)] < 0.0 && !inR;
                }
            const auto sq = squared_edt(mask, g.nx, g.ny);
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const std::size_t k = g.index(i, j);
                    double v = std::sqrt(sq[k]) * g.dx;
                    // The sides {0, l} x [0, h] lie in the closure of the complement.
                    v = std::min({v, segment_distance(g.x(i), g.y(j), 0, 0, 0, h),
                                  segment_distance(g.x(i), g.y(j), l, 0, l, h)});
                    out[k] = mask[k] ? 0.0 : v;
                }
            break;
        }
        case Target::Boundary:
            break;
    }
    return out;
}

RegionWeights region_weights(const Domain2D& d, const std::function<bool(double, double)>& inside) {
    const Grid& g = d.grid;
    const double dx = g.dx;
    RegionWeights w;
    w.node.assign(g.size(), 0.0);
    w.xedge.assign(g.size(), 0.0);
    w.yedge.assign(g.size(), 0.0);
    parallel_rows(static_cast<std::size_t>(g.ny), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double x = g.x(i), y = g.y(j);
            // Scale the domain weights by the fraction of the inside samples
            // that also satisfy the predicate, so a full region reproduces
            // the domain weights exactly.
            auto restrict = [&](double base, double cx, double cy) {
                if (base <= 0.0) return 0.0;
                int all = 0, hit = 0;
                for (int a = 0; a < kSub; ++a) {
                    const double px = cx + dx * ((a + 0.5) / kSub - 0.5);
                    for (int b = 0; b < kSub; ++b) {
                        const double py = cy + dx * ((b + 0.5) / kSub - 0.5);
                        const bool pin = inside(px, py);
                        if (d.sdf(px, py) < 0.0) {
                            ++all;
                            if (pin) ++hit;
                        }
                    }
                }
                if (all == 0) return inside(cx, cy) ? base : 0.0;
                return base * static_cast<double>(hit) / all;
            };
            w.node[k] = restrict(d.node_weight[k], x, y);
            if (i + 1 < g.nx) w.xedge[k] = restrict(d.xedge_weight[k], x + 0.5 * dx, y);
            if (j + 1 < g.ny) w.yedge[k] = restrict(d.yedge_weight[k], x, y + 0.5 * dx);
        }
    });
    return w;
}

}  // namespace aclab
