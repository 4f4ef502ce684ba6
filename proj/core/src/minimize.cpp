#include "aclab/minimize.hpp"

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace aclab {

namespace {

double max_well_norm(const Potential& p) {
    double r = 0.0;
    for (const auto& a : p.wells()) {
        double s = 0.0;
        for (double x : a) s += x * x;
        r = std::max(r, std::sqrt(s));
    }
    return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

// Kinetic stiffness eps K applied to v (interior rows only).
void apply_stiffness(const Field2D& f, const std::vector<double>& v, std::vector<double>& out) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const int m = f.m;
    const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(g.nx) * m;
    out.assign(v.size(), 0.0);
    parallel_rows(static_cast<std::size_t>(g.ny), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (d.kind[k] != NodeKind::Interior) continue;
            const double wl = d.xedge_weight[k - 1], wr = d.xedge_weight[k];
            const double wd = d.yedge_weight[k - static_cast<std::size_t>(g.nx)], wt = d.yedge_weight[k];
            const double* u = v.data() + k * m;
            for (int c = 0; c < m; ++c)
                out[k * m + c] = f.eps * (wl * (u[c] - u[c - m]) + wr * (u[c] - u[c + m]) +
                                          wd * (u[c] - u[c - row]) + wt * (u[c] - u[c + row]));
        }
    });
}

std::vector<double> interior_mask(const Field2D& f) {
    std::vector<double> mask(f.values.size(), 0.0);
    for (std::size_t k = 0; k < f.domain->grid.size(); ++k)
        if (f.domain->kind[k] == NodeKind::Interior)
            for (int c = 0; c < f.m; ++c) mask[k * f.m + c] = 1.0;
    return mask;
}

// Diagonal of the energy Hessian with the potential replaced by its well
// curvature; used as the L-BFGS preconditioner.
std::vector<double> diagonal_preconditioner(const Field2D& f, const Potential& p) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    double well_curv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.wells().size(); ++i)
        for (double ev : well_hessian_eigenvalues(p, i)) well_curv = std::min(well_curv, ev);
    std::vector<double> diag(f.values.size(), 1.0);
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (d.kind[k] != NodeKind::Interior) continue;
            const double kin = d.xedge_weight[k - 1] + d.xedge_weight[k] +
                               d.yedge_weight[k - static_cast<std::size_t>(g.nx)] + d.yedge_weight[k];
            const double v = f.eps * kin + d.node_weight[k] * g.dx * g.dx * well_curv / f.eps;
            for (int c = 0; c < f.m; ++c) diag[k * f.m + c] = v;
        }
    return diag;
}

struct Descent {
    Field2D f;
    std::vector<double> g;
    double E = 0.0;
    std::deque<std::vector<double>> S, Y;
    std::deque<double> rho;
    std::vector<double> history;
    int iterations = 0;

    void forget() {
        S.clear();
        Y.clear();
        rho.clear();
    }
};

// Armijo backtracking along dir; accepts the step and returns true on decrease.
bool line_search(Descent& st, const Potential& p, const std::vector<double>& dir, double slope, Field2D& cand,
                 std::vector<double>& g_new) {
    double t = 1.0;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
        for (std::size_t k = 0; k < dir.size(); ++k) cand.values[k] = st.f.values[k] + t * dir[k];
        const double E_new = energy_and_gradient(cand, p, g_new);
        if (E_new <= st.E + 1e-4 * t * slope) {
            st.E = E_new;
            return true;
        }
    }
    return false;
}

// L-BFGS iterations until the raw residual drops below `stop`, `budget`
// iterations pass, or no decrease is possible. Returns false on a stall.
bool lbfgs_chunk(Descent& st, const Potential& p, const std::vector<double>& diag, const std::vector<double>& mask,
                 int memory, int budget, double stop) {
    Field2D cand = st.f;
    std::vector<double> g_new, dir(st.f.values.size());
    for (int done = 0; done < budget && max_abs(st.g) > stop;) {
        std::vector<double> q = st.g;
        std::vector<double> alpha(st.S.size());
        for (std::size_t i = st.S.size(); i-- > 0;) {
            alpha[i] = st.rho[i] * dot(st.S[i], q);
            for (std::size_t k = 0; k < q.size(); ++k) q[k] -= alpha[i] * st.Y[i][k];
        }
        double gamma = 1.0;
        if (!st.S.empty()) {
            const auto& y = st.Y.back();
            double yhy = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k) yhy += y[k] * y[k] / diag[k];
            gamma = dot(st.S.back(), y) / yhy;
        }
        for (std::size_t k = 0; k < q.size(); ++k) q[k] *= gamma * mask[k] / diag[k];
        for (std::size_t i = 0; i < st.S.size(); ++i) {
            const double beta = st.rho[i] * dot(st.Y[i], q);
            for (std::size_t k = 0; k < q.size(); ++k) q[k] += (alpha[i] - beta) * st.S[i][k];
        }
        for (std::size_t k = 0; k < q.size(); ++k) dir[k] = -q[k] * mask[k];
        double slope = dot(st.g, dir);
        if (!(slope < 0.0)) {
            st.forget();
            for (std::size_t k = 0; k < q.size(); ++k) dir[k] = -st.g[k] * mask[k] / diag[k];
            slope = dot(st.g, dir);
        }
        if (!line_search(st, p, dir, slope, cand, g_new)) {
            if (st.S.empty()) return false;
            st.forget();
            continue;
        }
        std::vector<double> sv(dir.size()), yv(dir.size());
        for (std::size_t k = 0; k < sv.size(); ++k) {
            sv[k] = cand.values[k] - st.f.values[k];
            yv[k] = g_new[k] - st.g[k];
        }
        const double sy = dot(sv, yv);
        st.f.values.swap(cand.values);
        st.g.swap(g_new);
        st.history.push_back(st.E);
        ++st.iterations;
        ++done;
        if (sy > 1e-14 * std::sqrt(dot(sv, sv) * dot(yv, yv))) {
            st.S.push_back(std::move(sv));
            st.Y.push_back(std::move(yv));
            st.rho.push_back(1.0 / sy);
            if (static_cast<int>(st.S.size()) > memory) {
                st.S.pop_front();
                st.Y.pop_front();
                st.rho.pop_front();
            }
        }
    }
    return true;
}

// Sparse Hessian over the interior unknowns, shifted by mu times its diagonal.
Eigen::SparseMatrix<double> assemble_hessian(const Field2D& f, const Potential& p, const std::vector<long>& col,
                                             long n, double mu) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const int m = f.m;
    const double area = g.dx * g.dx;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * (5 + m));
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (d.kind[k] != NodeKind::Interior) continue;
        const std::size_t nb[4] = {k - 1, k + 1, k - static_cast<std::size_t>(g.nx), k + static_cast<std::size_t>(g.nx)};
        const double w[4] = {d.xedge_weight[k - 1], d.xedge_weight[k], d.yedge_weight[k - static_cast<std::size_t>(g.nx)],
                             d.yedge_weight[k]};
        const auto H = p.hessian(f.at(k));
        const double kin = f.eps * (w[0] + w[1] + w[2] + w[3]);
        for (int c = 0; c < m; ++c) {
            const long r = col[k * m + c];
            for (int e = 0; e < m; ++e) {
                double v = d.node_weight[k] * area * H[c * m + e] / f.eps;
                if (e == c) v = (v + kin) * (1.0 + mu);
                trip.emplace_back(r, col[k * m + e], v);
            }
            for (int q = 0; q < 4; ++q)
                if (d.kind[nb[q]] == NodeKind::Interior) trip.emplace_back(r, col[nb[q] * m + c], -f.eps * w[q]);
        }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

// Damped Newton step. The Hessian is shifted until the LDL^T factor is
// positive definite. Returns false when no decrease is found.
bool newton_step(Descent& st, const Potential& p, const std::vector<long>& col, long n, double& mu) {
    Field2D cand = st.f;
    std::vector<double> g_new;
    for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(assemble_hessian(st.f, p, col, n, mu));
        const bool pd = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
        if (pd) {
            Eigen::VectorXd rhs(n);
            for (std::size_t k = 0; k < col.size(); ++k)
                if (col[k] >= 0) rhs[col[k]] = -st.g[k];
            const Eigen::VectorXd x = ldlt.solve(rhs);
            std::vector<double> dir(st.f.values.size(), 0.0);
            for (std::size_t k = 0; k < col.size(); ++k)
                if (col[k] >= 0) dir[k] = x[col[k]];
            const double slope = dot(st.g, dir);
            if (slope < 0.0 && -slope < 64.0 * std::numeric_limits<double>::epsilon() * std::abs(st.E)) {
                // The predicted decrease is below the resolution of E: take the
                // full step if it shrinks the gradient, otherwise give up.
                for (std::size_t k = 0; k < dir.size(); ++k) cand.values[k] = st.f.values[k] + dir[k];
                const double E_new = energy_and_gradient(cand, p, g_new);
                if (!(max_abs(g_new) < 0.5 * max_abs(st.g))) return false;
                st.E = E_new;
                st.f.values.swap(cand.values);
                st.g.swap(g_new);
                st.history.push_back(st.E);
                ++st.iterations;
                return true;
            }
            if (slope < 0.0 && line_search(st, p, dir, slope, cand, g_new)) {
                st.f.values.swap(cand.values);
                st.g.swap(g_new);
                st.history.push_back(st.E);
                ++st.iterations;
                mu *= 0.1;
                if (mu < 1e-12) mu = 0.0;
                return true;
            }
        }
        mu = std::max(4.0 * mu, 1e-6);
    }
    return false;
}

RelaxResult relax_lbfgs(Field2D f, const Potential& p, const SolveSettings& s, const std::string& label) {
    RelaxResult out;
    out.record.label = label;
    const double area = f.domain->grid.dx * f.domain->grid.dx;
    const double gtol = s.tolerance * area;
    const double newton_switch = 1e-2 * area;
    const auto diag = diagonal_preconditioner(f, p);
    const auto mask = interior_mask(f);
    std::vector<long> col(f.values.size(), -1);
    long n = 0;
    for (std::size_t k = 0; k < col.size(); ++k)
        if (mask[k] > 0.0) col[k] = n++;

    Descent st{std::move(f), {}, 0.0, {}, {}, {}, {}, 0};
    st.E = energy_and_gradient(st.f, p, st.g);
    out.record.initial_energy = st.E;
    st.history.push_back(st.E);
    double mu = 0.0;
    while (max_abs(st.g) > gtol && st.iterations < s.max_iterations) {
        const int budget = std::min(500, s.max_iterations - st.iterations);
        if (max_abs(st.g) > newton_switch || n == 0) {
            if (!lbfgs_chunk(st, p, diag, mask, s.lbfgs_memory, budget, newton_switch)) break;
            continue;
        }
        if (newton_step(st, p, col, n, mu)) continue;
        // Newton could not make progress; fall back to quasi-Newton steps.
        const int before = st.iterations;
        if (!lbfgs_chunk(st, p, diag, mask, s.lbfgs_memory, budget, gtol) || st.iterations == before) break;
    }
    const double res = max_abs(st.g);
    out.record.final_energy = st.E;
    out.record.iterations = st.iterations;
    out.record.residual = res / area;
    out.record.converged = res <= gtol;
    out.energy_history = std::move(st.history);
    out.field = std::move(st.f);
    return out;
}

RelaxResult relax_flow(Field2D f, const Potential& p, const SolveSettings& s, const std::string& label) {
    RelaxResult out;
    out.record.label = label;
    std::vector<double> g;
    out.record.initial_energy = energy_and_gradient(f, p, g);
    out.energy_history.push_back(out.record.initial_energy);
    const double area = f.domain->grid.dx * f.domain->grid.dx;
    double res = max_abs(g) / area;
    double tau = s.tau * f.eps * f.eps;
    int it = 0;
    while (res > s.tolerance && it < s.max_iterations) {
        const FlowStep st = gradient_flow_step(f, p, s, tau);
        // Recover from earlier halvings gradually.
        tau = std::min(st.tau * 2.0, s.tau * f.eps * f.eps);
        out.energy_history.push_back(st.energy_after);
        energy_and_gradient(f, p, g);
        res = max_abs(g) / area;
        ++it;
    }
    out.record.final_energy = out.energy_history.back();
    out.record.iterations = it;
    out.record.residual = res;
    out.record.converged = res <= s.tolerance;
    out.field = std::move(f);
    return out;
}

double bilinear(const Field2D& f, double x, double y, int c) {
    const Grid& g = f.domain->grid;
    const double fx = std::clamp((x - g.x0) / g.dx, 0.0, g.nx - 1.000001);
    const double fy = std::clamp((y - g.y0) / g.dx, 0.0, g.ny - 1.000001);
    const int i = static_cast<int>(fx), j = static_cast<int>(fy);
    const double a = fx - i, b = fy - j;
    auto u = [&](int ii, int jj) { return f.values[g.index(ii, jj) * f.m + c]; };
    return (1 - a) * (1 - b) * u(i, j) + a * (1 - b) * u(i + 1, j) + (1 - a) * b * u(i, j + 1) + a * b * u(i + 1, j + 1);
}

}  // namespace

std::string to_string(InitKind k) {
    switch (k) {
        case InitKind::ComparisonField: return "comparison_field";
        case InitKind::WellConstant: return "well_constant";
        case InitKind::RandomPerturbed: return "random_perturbed";
    }
    return "?";
}

InitKind init_kind_from_string(const std::string& s) {
    for (auto k : {InitKind::ComparisonField, InitKind::WellConstant, InitKind::RandomPerturbed})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown initialization '" + s + "'");
}

std::string to_string(Method m) { return m == Method::LBFGS ? "lbfgs" : "flow"; }

Method method_from_string(const std::string& s) {
    if (s == "lbfgs") return Method::LBFGS;
    if (s == "flow") return Method::Flow;
    throw ConfigError("unknown solver method '" + s + "'");
}

void SolveSettings::validate() const {
    if (!(tau > 0.0)) throw ConfigError("solver: tau must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("solver: tolerance must be positive");
    if (max_iterations < 0) throw ConfigError("solver: max_iterations must be >= 0");
    if (lbfgs_memory < 1) throw ConfigError("solver: lbfgs memory must be >= 1");
    if (M < 0.0) throw ConfigError("solver: M must be >= 0");
    if (inits.empty()) throw ConfigError("solver: no initialization selected");
    if (seeds.empty()) throw ConfigError("solver: no seeds");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i - 1])) throw ConfigError("solver: eps schedule must be strictly decreasing");
    for (double e : schedule)
        if (!(e > 0.0)) throw ConfigError("solver: eps values must be positive");
}

FlowStep gradient_flow_step(Field2D& f, const Potential& p, const SolveSettings& s, double tau_phys) {
    s.validate();
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    const double area = g.dx * g.dx;
    const double eps = f.eps;
    double tau = tau_phys > 0.0 ? tau_phys : s.tau * eps * eps;
    const double radius = s.M > 0.0 ? s.M : 1.0 + max_well_norm(p);
    const double S = 0.5 * p.curvature_bound(radius);
    const auto mask = interior_mask(f);

    std::vector<double> grad;
    FlowStep st;
    st.energy_before = energy_and_gradient(f, p, grad);
    std::vector<double> mass(f.values.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k)
        for (int c = 0; c < f.m; ++c) mass[k * f.m + c] = mask[k * f.m + c] * d.node_weight[k] * area;
    if (max_abs(grad) == 0.0) {
        st.energy_after = st.energy_before;
        st.tau = tau;
        return st;
    }

    std::vector<double> Kv;
    Field2D probe = f;
    for (st.halvings = 0; st.halvings < 60; ++st.halvings, tau *= 0.5) {
        const double shift = 1.0 / tau + S / eps;
        auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
            apply_stiffness(f, v, out);
            for (std::size_t k = 0; k < v.size(); ++k) out[k] = mask[k] * (out[k] + shift * mass[k] * v[k]);
        };
        std::vector<double> diag(f.values.size(), 1.0);
        {
            const auto pre = diagonal_preconditioner(f, p);
            for (std::size_t k = 0; k < diag.size(); ++k)
                if (mask[k] > 0.0) diag[k] = pre[k] + shift * mass[k];
        }
        // Preconditioned CG on the interior unknowns.
        std::vector<double> x(f.values.size(), 0.0), r(f.values.size()), z(f.values.size()), pd, Ap;
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = -grad[k] * mask[k];
        for (std::size_t k = 0; k < r.size(); ++k) z[k] = r[k] / diag[k];
        pd = z;
        double rz = dot(r, z);
        const double r0 = std::sqrt(dot(r, r));
        for (int it = 0; it < 2000 && std::sqrt(dot(r, r)) > 1e-12 * r0; ++it) {
            apply(pd, Ap);
            const double a = rz / dot(pd, Ap);
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k] += a * pd[k];
                r[k] -= a * Ap[k];
            }
            for (std::size_t k = 0; k < r.size(); ++k) z[k] = r[k] / diag[k];
            const double rz_new = dot(r, z);
            for (std::size_t k = 0; k < pd.size(); ++k) pd[k] = z[k] + (rz_new / rz) * pd[k];
            rz = rz_new;
        }
        for (std::size_t k = 0; k < x.size(); ++k) probe.values[k] = f.values[k] + x[k];
        std::vector<double> unused;
        const double E = energy_and_gradient(probe, p, unused);
        if (E <= st.energy_before) {
            f.values.swap(probe.values);
            st.energy_after = E;
            st.tau = tau;
            return st;
        }
    }
    throw SolverError("gradient_flow_step: backtracking on tau exhausted", max_abs(grad) / area);
}

std::size_t project_bound(Field2D& f, const Potential& p, double M) {
    if (M < max_well_norm(p)) throw ConfigError("project_bound: M is smaller than a well norm");
    std::size_t moved = 0;
    for (std::size_t k = 0; k < f.domain->grid.size(); ++k) {
        if (f.domain->kind[k] != NodeKind::Interior) continue;
        auto u = f.at(k);
        double n = 0.0;
        for (double x : u) n += x * x;
        n = std::sqrt(n);
        if (n > M) {
            for (double& x : u) x *= M / n;
            ++moved;
        }
    }
    return moved;
}

double residual_norm(const Field2D& f, const Potential& p) {
    const auto fv = first_variation(f, p);
    return max_abs(fv);
}

RelaxResult relax(Field2D init, const Potential& p, const SolveSettings& s, const std::string& label) {
    s.validate();
    if (init.m != p.dimension()) throw DomainError("relax: field dimension does not match the potential");
    project_bound(init, p, s.M > 0.0 ? s.M : 1.0 + max_well_norm(p));
    return s.method == Method::LBFGS ? relax_lbfgs(std::move(init), p, s, label)
                                     : relax_flow(std::move(init), p, s, label);
}

Field2D transfer_field(const Field2D& from, DomainPtr to, double eps, const BoundaryData& b) {
    Field2D f = make_field(to, from.m, eps, b.mode == BoundaryMode::ConstZ ? b.z : b.a_minus);
    const Grid& g = to->grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (to->kind[k] != NodeKind::Interior) continue;
            for (int c = 0; c < f.m; ++c) f.values[k * f.m + c] = bilinear(from, g.x(i), g.y(j), c);
        }
    impose_boundary(f, b);
    return f;
}

MinimizeResult minimize(DomainPtr d, const Potential& p, const BoundaryData& b, const SolveSettings& s,
                        Connections& conns, const Field2D* warm) {
    s.validate();
    if (!d) throw DomainError("minimize: missing domain");
    const int m = p.dimension();
    const double eps = b.eps;
    const Point& base = b.mode == BoundaryMode::ConstZ ? b.z : b.a_minus;

    std::vector<std::pair<std::string, Field2D>> starts;
    for (InitKind kind : s.inits) {
        switch (kind) {
            case InitKind::ComparisonField: {
                if (b.mode == BoundaryMode::ConstZ) {
                    if (!conns.half) conns.half = solve_halfline(p, b.z, 20.0, 2048);
                    starts.emplace_back("comparison:normal_tube",
                                        build_comparison_field(d, p, b, *conns.half, ComparisonMode::NormalTube,
                                                               s.comparison));
                } else if (d->has_rectangle) {
                    if (!conns.full) conns.full = solve_connection(p, b.a_minus, 20.0, 2048);
                    for (auto mode : {ComparisonMode::BoundaryLayerABCD, ComparisonMode::InternalLayer}) {
                        try {
                            starts.emplace_back("comparison:" + to_string(mode),
                                                build_comparison_field(d, p, b, *conns.full, mode, s.comparison));
                        } catch (const DomainError&) {
                            // construction does not fit at this scale
                        }
                    }
                }
                break;
            }
            case InitKind::WellConstant: {
                Field2D f = make_field(d, m, eps, base);
                impose_boundary(f, b);
                starts.emplace_back("well_constant", std::move(f));
                break;
            }
            case InitKind::RandomPerturbed: {
                for (std::uint64_t seed : s.seeds) {
                    Field2D f = make_field(d, m, eps, b.mode == BoundaryMode::ConstZ ? b.z : b.a_minus);
                    std::mt19937_64 rng(seed);
                    std::uniform_real_distribution<double> U(-s.perturbation, s.perturbation);
                    for (double& v : f.values) v += U(rng);
                    impose_boundary(f, b);
                    starts.emplace_back("random_perturbed:" + std::to_string(seed), std::move(f));
                }
                break;
            }
        }
    }
    if (warm) starts.emplace_back("continuation", transfer_field(*warm, d, eps, b));
    if (starts.empty()) throw SolverError("minimize: no applicable initialization", 0.0);

    MinimizeResult out;
    bool have = false;
    double best = std::numeric_limits<double>::infinity();
    for (auto& [label, init] : starts) {
        try {
            RelaxResult r = relax(std::move(init), p, s, label);
            out.starts.push_back(r.record);
            if (r.record.converged && r.record.final_energy < best) {
                best = r.record.final_energy;
                out.winner = out.relaxed.size();
                out.energy_history = r.energy_history;
                have = true;
            }
            out.relaxed.push_back(std::move(r.field));
        } catch (const Error& e) {
            StartRecord rec;
            rec.label = label;
            rec.error = e.what();
            out.starts.push_back(rec);
            out.relaxed.push_back(make_field(d, m, eps, base));
        }
    }
    if (!have) {
        double last = std::numeric_limits<double>::infinity();
        for (const auto& r : out.starts) last = std::min(last, r.residual > 0.0 ? r.residual : last);
        std::string msg = "minimize: no initialization converged;";
        for (const auto& r : out.starts)
            msg += " " + r.label + (r.error.empty() ? " residual=" + std::to_string(r.residual) : " error=" + r.error);
        throw SolverError(msg, last);
    }
    out.field = out.relaxed[out.winner];
    return out;
}

}  // namespace aclab
