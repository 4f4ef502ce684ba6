#include "aclab/connection1d.hpp"

#include "aclab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace aclab {

namespace {

constexpr double kArrivalTolerance = 1e-6;

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

bool lex_less(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Discrete action with both end samples pinned. Returns the action and
// fills the gradient density (raw derivative / ds) for the free samples.
double action_and_gradient(const Potential& p, const Profile1D& v, std::vector<double>& grad) {
    const std::size_t n = v.size();
    const int m = v.m;
    const double ds = v.ds;
    std::fill(grad.begin(), grad.end(), 0.0);
    double kinetic = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (int k = 0; k < m; ++k) {
            const double d = v.values[(i + 1) * m + k] - v.values[i * m + k];
            kinetic += 0.5 * d * d / ds;
        }
    }
    double pot = 0.0;
    std::vector<double> g(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        pot += w * ds * p.value(v.at(i));
        if (i == 0 || i + 1 == n) continue;
        p.gradient(v.at(i), g);
        for (int k = 0; k < m; ++k) {
            const double lap =
                (2.0 * v.values[i * m + k] - v.values[(i - 1) * m + k] - v.values[(i + 1) * m + k]) / ds;
            grad[i * m + k] = (lap + ds * g[k]) / ds;
        }
    }
    return kinetic + pot;
}

double max_abs(const std::vector<double>& x) {
    double r = 0.0;
    for (double v : x) r = std::max(r, std::abs(v));
    return r;
}

// Barzilai-Borwein descent with a nonmonotone (max of the last 10 values)
// Armijo safeguard. End samples stay fixed. Stops at `tol` or `cap` steps.
int bb_run(const Potential& p, Profile1D& v, double tol, int cap, double& res) {
    const std::size_t dof = v.values.size();
    std::vector<double> g(dof), g_new(dof);
    double E = action_and_gradient(p, v, g);
    std::deque<double> history{E};
    double alpha = 0.1 * v.ds * v.ds;
    res = max_abs(g);
    Profile1D cand = v;
    int it = 0;
    for (; it < cap && res > tol; ++it) {
        const double E_ref = *std::max_element(history.begin(), history.end());
        double gg = 0.0;
        for (double x : g) gg += x * x;
        gg *= v.ds;
        double E_new = 0.0;
        for (int bt = 0;; ++bt) {
            for (std::size_t i = 0; i < dof; ++i) cand.values[i] = v.values[i] - alpha * g[i];
            E_new = action_and_gradient(p, cand, g_new);
            // Slack of a few ulps: near convergence the decrease drops below round-off.
            if (E_new <= E_ref - 1e-4 * alpha * gg + 1e-14 * std::abs(E_ref) || alpha < 1e-14) break;
            alpha *= 0.5;
            if (bt > 60) break;
        }
        double sy = 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < dof; ++i) {
            const double s = cand.values[i] - v.values[i];
            const double y = g_new[i] - g[i];
            sy += s * y;
            ss += s * s;
        }
        v.values.swap(cand.values);
        g.swap(g_new);
        E = E_new;
        history.push_back(E);
        if (history.size() > 10) history.pop_front();
        alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e6) : 1e-2;
        res = max_abs(g);
    }
    return it;
}

// Damped Newton on the free samples. The Hessian of the discrete action is
// block tridiagonal with off-diagonal blocks -I/ds; it is factored by block
// elimination and the step is refused when a pivot block is not positive
// definite. Returns false when Newton cannot make progress.
bool newton_polish(const Potential& p, Profile1D& v, double tol, int& steps, double& res) {
    const std::size_t n = v.size();
    const int m = v.m;
    const double ds = v.ds;
    const double c = -1.0 / ds;
    std::vector<double> g(v.values.size()), g_new(v.values.size());
    double E = action_and_gradient(p, v, g);
    res = max_abs(g);
    std::vector<Eigen::LLT<Eigen::MatrixXd>> piv(n);
    std::vector<Eigen::VectorXd> y(n);
    Profile1D cand = v;
    for (int k = 0; k < 40; ++k) {
        if (res <= tol) return true;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const auto h = p.hessian(v.at(i));
            Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(h.data(), m, m) * ds;
            S.diagonal().array() += 2.0 / ds;
            Eigen::VectorXd b(m);
            for (int j = 0; j < m; ++j) b[j] = -ds * g[i * m + j];
            if (i > 1) {
                S -= c * c * piv[i - 1].solve(Eigen::MatrixXd::Identity(m, m));
                b -= c * piv[i - 1].solve(y[i - 1]);
            }
            piv[i].compute(S);
            if (piv[i].info() != Eigen::Success || piv[i].matrixLLT().diagonal().minCoeff() <= 0.0) return false;
            y[i] = b;
        }
        std::vector<double> step(v.values.size(), 0.0);
        Eigen::VectorXd next = Eigen::VectorXd::Zero(m);
        for (std::size_t i = n - 2; i >= 1; --i) {
            Eigen::VectorXd x = piv[i].solve(y[i] - c * next);
            for (int j = 0; j < m; ++j) step[i * m + j] = x[j];
            next = x;
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < step.size(); ++i) slope += ds * g[i] * step[i];
        double t = 1.0;
        double E_new = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 20; ++bt, t *= 0.5) {
            for (std::size_t i = 0; i < step.size(); ++i) cand.values[i] = v.values[i] + t * step[i];
            E_new = action_and_gradient(p, cand, g_new);
            if (E_new <= E + 1e-4 * t * slope + 1e-14 * std::abs(E)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) return false;
        v.values.swap(cand.values);
        g.swap(g_new);
        E = E_new;
        res = max_abs(g);
        ++steps;
    }
    return res <= tol;
}

// BB descent brings the profile near a minimizer, Newton finishes it. While
// Newton refuses (indefinite Hessian), descent continues in short chunks.
int descend(const Potential& p, Profile1D& v, const ConnectionSettings& settings) {
    constexpr double kSwitch = 1e-2;
    constexpr int kChunk = 500;
    double res = 0.0;
    int it = 0;
    while (it < settings.max_iterations) {
        const int cap = std::min(settings.max_iterations - it, kChunk);
        it += bb_run(p, v, std::max(kSwitch, settings.tolerance), cap, res);
        if (res <= settings.tolerance) return it;
        if (res > kSwitch) continue;
        Profile1D trial = v;
        int steps = 0;
        if (newton_polish(p, trial, settings.tolerance, steps, res)) {
            v = std::move(trial);
            return it + steps;
        }
        it += bb_run(p, v, settings.tolerance, cap, res);
        if (res <= settings.tolerance) return it;
    }
    throw SolverError("connection solver did not converge within the iteration cap", res);
}

Profile1D make_grid(double s0, double s1, int n, int m) {
    Profile1D v;
    v.s0 = s0;
    v.ds = (s1 - s0) / (n - 1);
    v.m = m;
    v.values.assign(static_cast<std::size_t>(n) * m, 0.0);
    return v;
}

void finish(const Potential& p, ConnectionProfile& c) {
    const auto& v = c.profile;
    c.action = action(p, v, 1.0);
    c.equipartition_residual = equipartition_residual(p, v);
    c.tail_fit = fit_tails(v, c.half_line ? std::span<const double>{} : std::span<const double>(c.start), c.end);
    const double L = std::max(std::abs(v.s0), std::abs(v.s(v.size() - 1)));
    double corr = 0.0;
    if (c.tail_fit.k_plus > 0.0)
        corr += 0.5 * c.tail_fit.k_plus * c.tail_fit.K_plus * c.tail_fit.K_plus * std::exp(-2.0 * c.tail_fit.k_plus * L);
    if (c.tail_fit.k_minus > 0.0)
        corr += 0.5 * c.tail_fit.k_minus * c.tail_fit.K_minus * c.tail_fit.K_minus *
                std::exp(-2.0 * c.tail_fit.k_minus * L);
    c.tail_correction = corr;
}

void check_grid(double L, int n) {
    if (!(L >= 10.0)) throw DomainError("connection solver: L must be >= 10");
    if (n < 256) throw DomainError("connection solver: n must be >= 256");
}

std::size_t well_index(const Potential& p, const Point& a) {
    for (std::size_t i = 0; i < p.wells().size(); ++i)
        if (a.size() == p.wells()[i].size() && dist(a, p.wells()[i]) < 1e-12) return i;
    throw DomainError("point is not a well of the potential");
}

// Picks the cheapest candidate, records the optimal set and breaks ties by
// the lexicographically smallest well.
ConnectionProfile pick_best(const Potential& p, std::vector<std::optional<ConnectionProfile>>& cands,
                            double tie_tol) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands)
        if (c) best = std::min(best, c->action);
    std::vector<std::size_t> opt;
    for (std::size_t i = 0; i < cands.size(); ++i)
        if (cands[i] && cands[i]->action <= best + tie_tol * std::max(1.0, best)) opt.push_back(i);
    std::size_t chosen = opt.front();
    for (std::size_t i : opt)
        if (lex_less(p.wells()[i], p.wells()[chosen])) chosen = i;
    ConnectionProfile out = std::move(*cands[chosen]);
    out.optimal_set.clear();
    for (std::size_t i : opt) out.optimal_set.push_back(p.wells()[i]);
    out.candidate_actions.assign(cands.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < cands.size(); ++i)
        if (cands[i]) out.candidate_actions[i] = cands[i]->action;
    return out;
}

}  // namespace

Point Profile1D::sample(double s) const {
    const std::size_t n = size();
    Point out(static_cast<std::size_t>(m));
    if (n == 0) return out;
    double t = (s - s0) / ds;
    if (t <= 0.0) {
        auto a = at(0);
        return {a.begin(), a.end()};
    }
    if (t >= static_cast<double>(n - 1)) {
        auto a = at(n - 1);
        return {a.begin(), a.end()};
    }
    const auto i = static_cast<std::size_t>(t);
    const double f = t - static_cast<double>(i);
    for (int k = 0; k < m; ++k) out[k] = (1.0 - f) * values[i * m + k] + f * values[(i + 1) * m + k];
    return out;
}

double action(const Potential& p, const Profile1D& v, double eps) {
    const std::size_t n = v.size();
    if (n < 2) throw DomainError("action: at least two samples required");
    if (!(eps > 0.0)) throw DomainError("action: eps must be positive");
    for (double x : v.values)
        if (!std::isfinite(x)) throw DomainError("action: non-finite profile");
    double kinetic = 0.0;
    double pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        pot += w * p.value(v.at(i));
        if (i + 1 < n) {
            for (int k = 0; k < v.m; ++k) {
                const double d = v.values[(i + 1) * v.m + k] - v.values[i * v.m + k];
                kinetic += d * d;
            }
        }
    }
    return 0.5 * eps * kinetic / v.ds + pot * v.ds / eps;
}

double equipartition_residual(const Potential& p, const Profile1D& v) {
    const std::size_t n = v.size();
    if (n < 2) throw DomainError("equipartition_residual: at least two samples required");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        double d2 = 0.0;
        for (int k = 0; k < v.m; ++k) {
            const double d = (v.values[hi * v.m + k] - v.values[lo * v.m + k]) / (v.ds * static_cast<double>(hi - lo));
            d2 += d * d;
        }
        worst = std::max(worst, std::abs(0.5 * d2 - p.value(v.at(i))));
    }
    return worst;
}

double lower_bound_delta(double sigma, double C_W, double delta_minus, double delta_plus) {
    if (delta_minus < 0.0 || delta_plus < 0.0) throw DomainError("lower_bound_delta: negative delta");
    return sigma - 0.5 * C_W * (delta_minus * delta_minus + delta_plus * delta_plus);
}

TailFit fit_tails(const Profile1D& v, std::span<const double> a_minus, std::span<const double> a_plus) {
    TailFit fit;
    const std::size_t n = v.size();
    constexpr double lo = 1e-10;
    constexpr double hi = 1e-2;
    // Least squares of log|v - a| against s on one side, then the smallest
    // K making the envelope hold on every fitted sample.
    auto fit_side = [&](std::span<const double> a, double sign, double& k, double& K) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = v.s(i);
            if (sign * s <= 0.0) continue;
            const double d = dist(v.at(i), a);
            if (d > lo && d < hi) {
                xs.push_back(std::abs(s));
                ys.push_back(std::log(d));
            }
        }
        if (xs.size() < 5) return false;
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        if (sxx <= 0.0) return false;
        k = -sxy / sxx;
        K = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) K = std::max(K, std::exp(ys[i] + k * xs[i]));
        return k > 0.0;
    };
    bool ok = true;
    if (!a_minus.empty()) ok = fit_side(a_minus, -1.0, fit.k_minus, fit.K_minus) && ok;
    if (!a_plus.empty()) ok = fit_side(a_plus, 1.0, fit.k_plus, fit.K_plus) && ok;
    fit.converged = ok;
    fit.k = std::numeric_limits<double>::infinity();
    if (fit.k_minus > 0.0) fit.k = std::min(fit.k, fit.k_minus);
    if (fit.k_plus > 0.0) fit.k = std::min(fit.k, fit.k_plus);
    if (!std::isfinite(fit.k)) fit.k = 0.0;
    fit.K = std::max(fit.K_minus, fit.K_plus);
    return fit;
}

ConnectionProfile solve_connection_from(const Potential& p, const Profile1D& init, const Point& a_plus,
                                        const ConnectionSettings& settings) {
    if (init.size() < 3 || init.m != p.dimension()) throw DomainError("solve_connection_from: bad initial profile");
    double spread = 0.0;
    for (std::size_t i = 1; i < init.size(); ++i) spread = std::max(spread, dist(init.at(i), init.at(0)));
    if (spread < 1e-12)
        throw DomainError("solve_connection_from: constant initial profile is a critical point of the action");
    ConnectionProfile c;
    c.profile = init;
    c.start.assign(init.at(0).begin(), init.at(0).end());
    c.end = a_plus;
    auto last = c.profile.at(c.profile.size() - 1);
    std::copy(a_plus.begin(), a_plus.end(), last.begin());
    c.iterations = descend(p, c.profile, settings);
    finish(p, c);
    return c;
}

ConnectionProfile solve_connection(const Potential& p, const Point& a_minus, double L, int n,
                                   const ConnectionSettings& settings) {
    check_grid(L, n);
    const std::size_t start = well_index(p, a_minus);
    const int m = p.dimension();
    std::vector<std::optional<ConnectionProfile>> cands(p.wells().size());
    for (std::size_t b = 0; b < p.wells().size(); ++b) {
        if (b == start) continue;
        const Point& a_plus = p.wells()[b];
        Profile1D v = make_grid(-L, L, n, m);
        for (int i = 0; i < n; ++i) {
            const double t = 0.5 * (1.0 + std::tanh(v.s(static_cast<std::size_t>(i)) / std::sqrt(2.0)));
            for (int k = 0; k < m; ++k) v.values[i * m + k] = (1.0 - t) * a_minus[k] + t * a_plus[k];
        }
        for (int k = 0; k < m; ++k) {
            v.values[k] = a_minus[k];
            v.values[(n - 1) * m + k] = a_plus[k];
        }
        ConnectionProfile c;
        c.profile = std::move(v);
        c.start = a_minus;
        c.end = a_plus;
        c.iterations = descend(p, c.profile, settings);
        finish(p, c);
        cands[b] = std::move(c);
    }
    if (std::none_of(cands.begin(), cands.end(), [](const auto& c) { return c.has_value(); }))
        throw DomainError("solve_connection: potential has a single well");
    return pick_best(p, cands, settings.tie_tolerance);
}

ConnectionProfile solve_halfline(const Potential& p, const Point& z, double L, int n,
                                 const ConnectionSettings& settings) {
    check_grid(L, n);
    const int m = p.dimension();
    if (static_cast<int>(z.size()) != m) throw DomainError("solve_halfline: dimension mismatch");
    for (const auto& a : p.wells())
        if (dist(z, a) < kArrivalTolerance) throw DomainError("solve_halfline: z is already a well");
    std::vector<std::optional<ConnectionProfile>> cands(p.wells().size());
    for (std::size_t b = 0; b < p.wells().size(); ++b) {
        const Point& a_plus = p.wells()[b];
        Profile1D v = make_grid(0.0, L, n, m);
        for (int i = 0; i < n; ++i) {
            const double t = std::exp(-v.s(static_cast<std::size_t>(i)));
            for (int k = 0; k < m; ++k) v.values[i * m + k] = a_plus[k] + t * (z[k] - a_plus[k]);
        }
        for (int k = 0; k < m; ++k) {
            v.values[k] = z[k];
            v.values[(n - 1) * m + k] = a_plus[k];
        }
        ConnectionProfile c;
        c.profile = std::move(v);
        c.start = z;
        c.end = a_plus;
        c.half_line = true;
        c.iterations = descend(p, c.profile, settings);
        finish(p, c);
        cands[b] = std::move(c);
    }
    return pick_best(p, cands, settings.tie_tolerance);
}

SigmaStar sigma_star(const Potential& p, const Point& z, const Point& excluded, double L, int n,
                     const ConnectionSettings& settings) {
    if (p.wells().size() < 2) throw DomainError("sigma_star: no competitor well (N = 1)");
    const std::size_t ex = well_index(p, excluded);
    const auto best = solve_halfline(p, z, L, n, settings);
    SigmaStar out;
    out.sigma_plus = best.action;
    out.optimal_set = best.optimal_set;
    out.excluding_given = std::numeric_limits<double>::infinity();
    out.excluding_optimal_set = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.wells().size(); ++i) {
        const double a = best.candidate_actions[i];
        if (i != ex) out.excluding_given = std::min(out.excluding_given, a);
        const bool optimal = std::any_of(best.optimal_set.begin(), best.optimal_set.end(),
                                         [&](const Point& w) { return dist(w, p.wells()[i]) < 1e-12; });
        if (!optimal) out.excluding_optimal_set = std::min(out.excluding_optimal_set, a);
    }
    return out;
}

std::string to_string(FiberClass c) {
    switch (c) {
        case FiberClass::WStar: return "W*";
        case FiberClass::VA: return "V_a";
        case FiberClass::WHatC: return "W^c_hat";
        case FiberClass::WTildeC: return "W^c_tilde";
    }
    return "?";
}

FiberRecord fiber_transition_points(const Potential& p, const Profile1D& v, const FiberSpec& spec) {
    const std::size_t n = v.size();
    if (n < 2) throw DomainError("fiber_transition_points: at least two samples required");
    if (!(spec.delta > 0.0) || !(spec.eps > 0.0)) throw DomainError("fiber_transition_points: bad scale");
    FiberRecord rec;
    rec.c_star = spec.c_W > 0.0 ? 4.0 * spec.sigma / (spec.c_W * spec.c_W) : 0.0;

    auto in_ball = [&](std::size_t i, const Point& a, double r) { return dist(v.at(i), a) < r; };

    if (!in_ball(0, spec.a_minus, spec.delta) || !in_ball(n - 1, spec.a_plus, spec.delta)) {
        if (spec.strict) throw DomainError("fiber_transition_points: endpoints are not near the declared wells");
        rec.endpoints_ok = false;
        rec.label = FiberClass::VA;
        return rec;
    }

    std::vector<Point> others;
    for (const auto& a : p.wells())
        if (dist(a, spec.a_minus) > 1e-12 && dist(a, spec.a_plus) > 1e-12) others.push_back(a);

    // V_a: a third well is visited, or the ordered visits a_-, a_+, a_- occur.
    int phase = 0;
    bool va = false;
    std::size_t last_minus = 0;
    std::optional<std::size_t> first_plus;
    double outside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool bm = in_ball(i, spec.a_minus, spec.delta);
        const bool bp = in_ball(i, spec.a_plus, spec.delta);
        bool bo = false;
        for (const auto& a : others) bo = bo || in_ball(i, a, spec.delta);
        if (bo) va = true;
        if (phase == 0 && bm) phase = 1;
        else if (phase == 1 && bp) phase = 2;
        else if (phase == 2 && bm) va = true;
        if (bm) last_minus = i;
        if (bp && !first_plus) first_plus = i;
        if (!bm && !bp && !bo) outside += (i == 0 || i + 1 == n) ? 0.5 * v.ds : v.ds;
    }
    rec.s_minus = v.s(last_minus);
    rec.s_plus = first_plus ? v.s(*first_plus) : v.s(n - 1);
    rec.width = rec.s_plus - rec.s_minus;
    rec.sw_measure = outside;
    if (va) {
        rec.label = FiberClass::VA;
        return rec;
    }
    if (outside >= 2.0 * rec.c_star * std::sqrt(spec.eps)) {
        rec.label = FiberClass::WHatC;
        return rec;
    }
    const double R = spec.K_margin * spec.delta;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = v.s(i);
        if (s >= rec.s_minus && s <= rec.s_plus) continue;
        if (!in_ball(i, spec.a_minus, R) && !in_ball(i, spec.a_plus, R)) {
            rec.label = FiberClass::WTildeC;
            return rec;
        }
    }
    rec.label = FiberClass::WStar;
    return rec;
}

}  // namespace aclab
