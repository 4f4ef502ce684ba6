#include "aclab/potential.hpp"

#include "aclab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace aclab {

namespace {

bool all_finite(std::span<const double> u) {
    return std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
}

double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

double norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

// Unit directions on S^{m-1}: equispaced for m = 1, 2, Gaussian otherwise.
std::vector<Point> sphere_directions(int m, int count, std::mt19937_64& rng) {
    std::vector<Point> dirs;
    if (m == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    dirs.reserve(static_cast<std::size_t>(count));
    if (m == 2) {
        for (int k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * (k + 0.5) / count;
            dirs.push_back({std::cos(t), std::sin(t)});
        }
        return dirs;
    }
    std::normal_distribution<double> gauss;
    for (int k = 0; k < count; ++k) {
        Point d(static_cast<std::size_t>(m));
        double n = 0.0;
        while (n < 1e-12) {
            for (auto& v : d) v = gauss(rng);
            n = norm(d);
        }
        for (auto& v : d) v /= n;
        dirs.push_back(std::move(d));
    }
    return dirs;
}

Point random_in_ball(int m, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Point d(static_cast<std::size_t>(m));
    double n = 0.0;
    while (n < 1e-12) {
        for (auto& v : d) v = gauss(rng);
        n = norm(d);
    }
    const double r = radius * std::pow(unif(rng), 1.0 / m);
    for (auto& v : d) v *= r / n;
    return d;
}

double min_dist_to_wells(const Potential& p, std::span<const double> u) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : p.wells()) best = std::min(best, std::sqrt(dist2(u, a)));
    return best;
}

}  // namespace

std::vector<double> Potential::hessian(std::span<const double> u) const {
    const int m = dimension();
    std::vector<double> H(static_cast<std::size_t>(m * m));
    Point up(u.begin(), u.end());
    Point um(u.begin(), u.end());
    Point gp(static_cast<std::size_t>(m));
    Point gm(static_cast<std::size_t>(m));
    const double h = 1e-5;
    for (int j = 0; j < m; ++j) {
        up[j] += h;
        um[j] -= h;
        gradient(up, gp);
        gradient(um, gm);
        for (int i = 0; i < m; ++i) H[i * m + j] = (gp[i] - gm[i]) / (2.0 * h);
        up[j] = u[j];
        um[j] = u[j];
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double s = 0.5 * (H[i * m + j] + H[j * m + i]);
            H[i * m + j] = H[j * m + i] = s;
        }
    return H;
}

double Potential::curvature_bound(double radius) const {
    const int m = dimension();
    std::mt19937_64 rng(3);
    double bound = 0.0;
    auto visit = [&](std::span<const double> u) {
        const auto H = hessian(u);
        Eigen::Map<const Eigen::MatrixXd> mat(H.data(), m, m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
        bound = std::max(bound, es.eigenvalues().cwiseAbs().maxCoeff());
    };
    if (m == 1) {
        for (int k = 0; k <= 400; ++k) {
            const double u = -radius + 2.0 * radius * k / 400.0;
            visit(std::span<const double>(&u, 1));
        }
    } else {
        for (int k = 0; k < 4000; ++k) visit(random_in_ball(m, radius, rng));
    }
    return bound;
}

double Potential::min_well_separation() const {
    const auto& A = wells();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j) best = std::min(best, std::sqrt(dist2(A[i], A[j])));
    return best;
}

// ---------------------------------------------------------------------------

QuarticDoubleWell::QuarticDoubleWell() : wells_{{-1.0}, {1.0}} {}

double QuarticDoubleWell::value(std::span<const double> u) const {
    const double t = 1.0 - u[0] * u[0];
    return 0.25 * t * t;
}

void QuarticDoubleWell::gradient(std::span<const double> u, std::span<double> out) const {
    out[0] = -u[0] * (1.0 - u[0] * u[0]);
}

std::vector<double> QuarticDoubleWell::hessian(std::span<const double> u) const {
    return {3.0 * u[0] * u[0] - 1.0};
}

PlanarTwoWell::PlanarTwoWell() : wells_{{-1.0, 0.0}, {1.0, 0.0}} {}

double PlanarTwoWell::value(std::span<const double> u) const {
    return dist2(u, wells_[0]) * dist2(u, wells_[1]);
}

void PlanarTwoWell::gradient(std::span<const double> u, std::span<double> out) const {
    const double q0 = dist2(u, wells_[0]);
    const double q1 = dist2(u, wells_[1]);
    for (int k = 0; k < 2; ++k)
        out[k] = 2.0 * (u[k] - wells_[0][k]) * q1 + 2.0 * (u[k] - wells_[1][k]) * q0;
}

TripleWell::TripleWell() {
    for (int k = 0; k < 3; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 3.0;
        wells_.push_back({std::cos(t), std::sin(t)});
    }
    // Exact zeros keep W(a_i) = 0 to machine precision.
    wells_[1][0] = wells_[2][0] = -0.5;
}

double TripleWell::value(std::span<const double> u) const {
    return dist2(u, wells_[0]) * dist2(u, wells_[1]) * dist2(u, wells_[2]);
}

void TripleWell::gradient(std::span<const double> u, std::span<double> out) const {
    const double q[3] = {dist2(u, wells_[0]), dist2(u, wells_[1]), dist2(u, wells_[2])};
    for (int k = 0; k < 2; ++k) {
        out[k] = 2.0 * (u[k] - wells_[0][k]) * q[1] * q[2] + 2.0 * (u[k] - wells_[1][k]) * q[0] * q[2] +
                 2.0 * (u[k] - wells_[2][k]) * q[0] * q[1];
    }
}

// ---------------------------------------------------------------------------

PotentialRegistry::PotentialRegistry() {
    factories_["quartic"] = [] { return std::make_shared<QuarticDoubleWell>(); };
    factories_["two_well"] = [] { return std::make_shared<PlanarTwoWell>(); };
    factories_["triple_well"] = [] { return std::make_shared<TripleWell>(); };
}

PotentialRegistry& PotentialRegistry::instance() {
    static PotentialRegistry registry;
    return registry;
}

void PotentialRegistry::add(const std::string& name, Factory factory) {
    factories_[name] = std::move(factory);
}

PotentialPtr PotentialRegistry::make(const std::string& name) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown potential '" + name + "'");
    return it->second();
}

std::vector<std::string> PotentialRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : factories_) out.push_back(k);
    return out;
}

PotentialPtr make_potential(const std::string& name) { return PotentialRegistry::instance().make(name); }

double eval_potential(const Potential& p, std::span<const double> u) {
    if (static_cast<int>(u.size()) != p.dimension()) throw DomainError("eval_potential: dimension mismatch");
    if (!all_finite(u)) throw DomainError("eval_potential: non-finite input");
    return p.value(u);
}

Point eval_gradient(const Potential& p, std::span<const double> u) {
    if (static_cast<int>(u.size()) != p.dimension()) throw DomainError("eval_gradient: dimension mismatch");
    if (!all_finite(u)) throw DomainError("eval_gradient: non-finite input");
    Point g(u.size());
    p.gradient(u, g);
    return g;
}

// ---------------------------------------------------------------------------

double default_trapping_radius(const Potential& p) { return 0.2 * p.min_well_separation(); }

WellConstants well_constants(const Potential& p, double delta, std::uint64_t seed) {
    const double sep = p.min_well_separation();
    if (!(delta > 0.0) || !(delta < 0.5 * sep))
        throw DomainError("well_constants: delta must lie in (0, half the minimal well separation)");

    const int m = p.dimension();
    std::mt19937_64 rng(seed);
    const auto dirs = sphere_directions(m, kSphereDirections, rng);

    double cmin = std::numeric_limits<double>::infinity();
    double cmax = 0.0;
    Point u(static_cast<std::size_t>(m));
    // The trapping bracket must hold for every radius up to delta.
    constexpr int kShells = 8;
    for (const auto& a : p.wells()) {
        for (int s = 1; s <= kShells; ++s) {
            const double r = delta * s / kShells;
            for (const auto& d : dirs) {
                for (int k = 0; k < m; ++k) u[k] = a[k] + r * d[k];
                const double q = 2.0 * p.value(u) / (r * r);
                cmin = std::min(cmin, q);
                cmax = std::max(cmax, q);
            }
        }
    }
    if (!(cmin > 0.0)) throw ConstantsError("well_constants: W vanishes on a trapping sphere");

    WellConstants wc{delta, std::sqrt(cmin), std::sqrt(cmax)};

    // Exterior bound: every point at distance >= delta from all wells has
    // W >= c_W^2 delta^2 / 2.
    const double floor = 0.5 * cmin * delta * delta;
    double max_norm = 0.0;
    for (const auto& a : p.wells()) max_norm = std::max(max_norm, norm(a));
    const double R = std::max(2.0 * p.coercivity_radius(), max_norm + 1.0);
    for (int k = 0; k < 20000; ++k) {
        const Point v = random_in_ball(m, R, rng);
        if (min_dist_to_wells(p, v) < delta) continue;
        if (p.value(v) < floor * (1.0 - 1e-12))
            throw ConstantsError("well_constants: exterior bound fails, delta too large for trapping");
    }
    return wc;
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<double> well_hessian_eigenvalues(const Potential& p, std::size_t well) {
    const int m = p.dimension();
    const auto H = p.hessian(p.wells().at(well));
    Eigen::Map<const Eigen::MatrixXd> mat(H.data(), m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
    const auto ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

namespace {

// Plain gradient descent on W from `start`; used to land sampled near-zeros
// onto an actual zero of W.
Point descend(const Potential& p, Point u) {
    const int m = p.dimension();
    Point g(static_cast<std::size_t>(m));
    double step = 0.1;
    double w = p.value(u);
    for (int it = 0; it < 2000 && w > 1e-14; ++it) {
        p.gradient(u, g);
        Point trial(u);
        for (int k = 0; k < m; ++k) trial[k] -= step * g[k];
        const double wt = p.value(trial);
        if (wt < w) {
            u = std::move(trial);
            w = wt;
            step *= 1.2;
        } else {
            step *= 0.5;
            if (step < 1e-14) break;
        }
    }
    return u;
}

}  // namespace

ValidationReport validate_hypotheses(const Potential& p, double M, std::size_t sample_budget,
                                     std::uint64_t seed) {
    if (sample_budget < 1000) throw DomainError("validate_hypotheses: sample_budget must be >= 1000");
    if (!(M > 0.0)) throw DomainError("validate_hypotheses: M must be positive");
    const int m = p.dimension();
    std::mt19937_64 rng(seed);
    ValidationReport report;

    HypothesisCheck wells{"wells_are_critical_zeros", true, {}};
    for (const auto& a : p.wells()) {
        Point g(static_cast<std::size_t>(m));
        p.gradient(a, g);
        if (std::abs(p.value(a)) > 1e-12 || norm(g) > 1e-10) {
            wells.passed = false;
            wells.witnesses.push_back(a);
        }
    }
    report.checks.push_back(std::move(wells));

    // Samples: a structured lattice for m <= 2, random points otherwise.
    double max_norm = 0.0;
    for (const auto& a : p.wells()) max_norm = std::max(max_norm, norm(a));
    const double R = std::max(3.0 * M, 2.0 * max_norm + 1.0);
    std::vector<Point> samples;
    const std::size_t half = sample_budget / 2;
    if (m == 1) {
        for (std::size_t k = 0; k < half; ++k) samples.push_back({-R + 2.0 * R * (k + 0.5) / half});
    } else if (m == 2) {
        const auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(half)));
        for (std::size_t i = 0; i < side; ++i)
            for (std::size_t j = 0; j < side; ++j)
                samples.push_back({-R + 2.0 * R * (i + 0.5) / side, -R + 2.0 * R * (j + 0.5) / side});
    }
    while (samples.size() < sample_budget) samples.push_back(random_in_ball(m, R, rng));

    const double delta = default_trapping_radius(p);
    HypothesisCheck finite{"finite_zero_set", true, {}};
    for (const auto& u : samples) {
        if (min_dist_to_wells(p, u) < delta) continue;
        const double w = p.value(u);
        if (w <= 0.0) {
            finite.passed = false;
            finite.witnesses.push_back(u);
            continue;
        }
        if (w < 0.05) {
            const Point z = descend(p, u);
            if (p.value(z) < 1e-10 && min_dist_to_wells(p, z) > 0.5 * delta) {
                finite.passed = false;
                if (finite.witnesses.size() < 8) finite.witnesses.push_back(z);
            }
        }
    }
    report.checks.push_back(std::move(finite));

    const auto dirs = sphere_directions(m, 256, rng);
    HypothesisCheck liminf{"liminf_at_infinity_positive", true, {}};
    for (double scale : {2.0, 4.0, 8.0, 16.0}) {
        for (const auto& d : dirs) {
            Point u(d);
            for (auto& v : u) v *= scale * std::max(M, max_norm);
            if (!(p.value(u) > 1e-12)) {
                liminf.passed = false;
                liminf.witnesses.push_back(u);
            }
        }
    }
    report.checks.push_back(std::move(liminf));

    HypothesisCheck coercive{"gradient_outward_beyond_M", true, {}};
    std::uniform_real_distribution<double> radial(1.0, 8.0);
    Point g(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < sample_budget; ++k) {
        const auto& d = dirs[k % dirs.size()];
        const double r = M * (k < dirs.size() ? 1.0 + 1e-6 : radial(rng));
        Point u(d);
        for (auto& v : u) v *= r;
        p.gradient(u, g);
        double dot = 0.0;
        for (int i = 0; i < m; ++i) dot += g[i] * u[i];
        if (!(dot > 0.0)) {
            coercive.passed = false;
            if (coercive.witnesses.size() < 8) coercive.witnesses.push_back(u);
        }
    }
    report.checks.push_back(std::move(coercive));

    HypothesisCheck hess{"hessian_positive_at_wells", true, {}};
    for (std::size_t i = 0; i < p.wells().size(); ++i) {
        const auto ev = well_hessian_eigenvalues(p, i);
        if (!(ev.front() > 0.0)) {
            hess.passed = false;
            hess.witnesses.push_back(p.wells()[i]);
        }
    }
    report.checks.push_back(std::move(hess));
    return report;
}

}  // namespace aclab
