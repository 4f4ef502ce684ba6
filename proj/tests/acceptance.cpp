// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include "aclab/analysis.hpp"
#include "aclab/harness.hpp"
#include "aclab/snapshot.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace aclab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const double kSigma = 2.0 * std::sqrt(2.0) / 3.0;  // heteroclinic action of the quartic well
const double kSigmaPlus = std::sqrt(2.0) / 3.0;    // half-line action from z = 0

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const char* id, const char* what, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s  [%s]\n", id, o.pass ? "PASS" : "FAIL", what, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.4g", x);
    return s;
}

fs::path workdir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("aclab_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig config(const std::string& text, const std::string& name) {
    RunConfig c = parse_config(text);
    c.out = workdir(name);
    return c;
}

const char* kBoundaryLayer = R"(
[potential]
name = quartic
[domain]
shape = stadium
l = 1
h = 2
dx_per_eps = 0.25
[boundary]
mode = step_h3
C0 = 2
[run]
eps = 0.08, 0.04, 0.02
seed = 1
)";

const char* kInternalLayer = R"(
[potential]
name = quartic
[domain]
shape = stadium
l = 2
h = 1
dx_per_eps = 0.25
[boundary]
mode = step_h3
C0 = 2
[run]
eps = 0.08, 0.04, 0.02
seed = 1
)";

const char* kDisc = R"(
[potential]
name = quartic
[domain]
shape = disc
r = 1
dx_per_eps = 0.25
[boundary]
mode = const_z
z = 0
[run]
eps = 0.08, 0.04
seed = 1
)";

const char* kDichotomy = R"(
[potential]
name = quartic
[domain]
shape = stadium
dx = 0.01
[boundary]
mode = step_h3
C0 = 2
[run]
eps = 0.04
seed = 1
analyses = classify
[sweep]
lh = 2:1, 0.5:1
workers = 2
)";

const char* kSmall = R"(
[potential]
name = quartic
[domain]
shape = stadium
l = 1
h = 1
dx = 0.03125
[boundary]
mode = step_h3
[run]
eps = 0.2, 0.125
seed = 7
)";

std::vector<double> constants_of(const RunRecord& r, const std::string& name) {
    std::vector<double> out;
    for (const auto& e : r.results)
        for (const auto& b : e.bounds)
            if (b.name == name) out.push_back(b.constant);
    return out;
}

struct Runs {
    RunRecord bl, il, disc;
    double bl_seconds = 0.0, il_seconds = 0.0, disc_seconds = 0.0;
};

RunRecord timed_run(const char* text, const std::string& name, double& secs) {
    RunOptions o;
    o.keep_fields = true;
    const auto t0 = Clock::now();
    RunRecord r = run(config(text, name), o);
    secs = seconds_since(t0);
    if (r.status != "ok") throw std::runtime_error(name + " run failed in " + r.stage + ": " + r.error);
    return r;
}

// x positions where u crosses the midpoint of the wells along the row nearest y = h/2.
std::vector<double> midline_crossings(const Field2D& f) {
    const Domain2D& d = *f.domain;
    const int j = static_cast<int>(std::lround((d.h / 2.0 - d.grid.y0) / d.grid.dx));
    std::vector<double> xs;
    for (int i = 0; i + 1 < d.grid.nx; ++i) {
        const std::size_t a = d.grid.index(i, j), b = d.grid.index(i + 1, j);
        if (d.kind[a] == NodeKind::Outside || d.kind[b] == NodeKind::Outside) continue;
        const double ua = f.values[a], ub = f.values[b];
        if ((ua < 0.0) != (ub < 0.0)) xs.push_back(d.grid.x(i) + d.grid.dx * ua / (ua - ub));
    }
    return xs;
}

}  // namespace

int main() {
    const PotentialPtr p = make_potential("quartic");

    report("AC1", "1D heteroclinic action, equipartition and runtime", [&] {
        const double oracle = oracle::scalar_action(-1.0, 1.0);
        const auto t0 = Clock::now();
        const ConnectionProfile cp = solve_connection(*p, {-1.0}, 20.0, 2048);
        const double secs = seconds_since(t0);
        const bool ok = std::abs(cp.action - oracle) < 1e-4 && std::abs(oracle - 0.942809) < 1e-4 &&
                        cp.equipartition_residual < 5e-3 && secs < 5.0;
        return Outcome{ok, fmt("sigma %.7f oracle %.7f equipartition %.2e time %.2fs", cp.action, oracle,
                               cp.equipartition_residual, secs)};
    });

    report("AC2", "first variation against finite differences on a 64x64 field", [&] {
        const auto t0 = Clock::now();
        auto d = std::make_shared<const Domain2D>(build_generic(
            [](double x, double y) { return std::max(std::abs(x - 0.5), std::abs(y - 0.5)) - 0.5; }, 0.0, 1.0, 0.0,
            1.0, 1.0 / 57.0));
        if (d->grid.nx != 64 || d->grid.ny != 64) return Outcome{false, "grid is not 64x64"};
        Field2D f = make_field(d, 1, 0.05, {0.0});
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& v : f.values) v = u(rng);
        const auto fv = first_variation(f, *p);
        std::vector<std::size_t> nodes;
        for (std::size_t k = 0; k < d->grid.size(); ++k)
            if (d->kind[k] == NodeKind::Interior) nodes.push_back(k);
        std::shuffle(nodes.begin(), nodes.end(), rng);
        const double area = d->grid.dx * d->grid.dx;
        double worst = 0.0;
        for (int n = 0; n < 50; ++n) {
            const std::size_t k = nodes[n];
            auto energy_at = [&](double h) {
                Field2D g = f;
                g.values[k] += h;
                return total_energy(g, *p).total;
            };
            const double h = 1e-3;
            const double d1 = (energy_at(h) - energy_at(-h)) / (2 * h);
            const double d2 = (energy_at(h / 2) - energy_at(-h / 2)) / h;
            const double fd = (4.0 * d2 - d1) / 3.0;
            worst = std::max(worst, std::abs(fv[k] * area - fd) / std::abs(fd));
        }
        const double secs = seconds_since(t0);
        return Outcome{worst < 1e-6 && secs < 1.0, fmt("max relative error %.2e time %.2fs", worst, secs)};
    });

    report("AC3", "boundary-layer comparison energies, (E - 2 sigma l)/(eps |ln eps|^3) within a factor 3", [&] {
        const auto t0 = Clock::now();
        const RunConfig c = config(kBoundaryLayer, "ac3");
        const ConnectionProfile conn = solve_connection(*p, {-1.0}, 20.0, 2048);
        std::vector<double> q, energies;
        for (double eps : c.eps) {
            const DomainPtr d = build_domain(c, eps);
            const BoundaryData b = build_boundary(c, *p, eps);
            const Field2D f = build_comparison_field(d, *p, b, conn, ComparisonMode::BoundaryLayerABCD);
            const double E = total_energy(f, *p).total;
            const double le = std::abs(std::log(eps));
            energies.push_back(E);
            q.push_back((E - 2.0 * kSigma * c.domain.l) / (eps * le * le * le));
        }
        const double secs = seconds_since(t0);
        const double s = spread(q);
        return Outcome{s <= 3.0 && secs < 600.0,
                       fmt("E %s  ratio %s  spread %.3f time %.1fs", list(energies).c_str(), list(q).c_str(), s, secs)};
    });

    Runs runs;
    std::string bl_error, il_error, disc_error;
    try {
        runs.bl = timed_run(kBoundaryLayer, "boundary_layer", runs.bl_seconds);
    } catch (const std::exception& e) {
        bl_error = e.what();
    }
    try {
        runs.il = timed_run(kInternalLayer, "internal_layer", runs.il_seconds);
    } catch (const std::exception& e) {
        il_error = e.what();
    }
    try {
        runs.disc = timed_run(kDisc, "disc", runs.disc_seconds);
    } catch (const std::exception& e) {
        disc_error = e.what();
    }
    auto need = [](const std::string& err) {
        if (!err.empty()) throw std::runtime_error(err);
    };

    report("AC4", "directional lower bound constants stable under eps-halving (boundary layer)", [&] {
        need(bl_error);
        const auto c = constants_of(runs.bl, "boundary_layer.lower_directional");
        const auto cr = constants_of(runs.bl, "boundary_layer.lower_directional_refined");
        const bool ok = c.size() == 3 && cr.size() == 3 && constants_stable(c) && constants_stable(cr);
        return Outcome{ok, fmt("c (sqrt eps) %s  c' (eps) %s  run %.1fs", list(c).c_str(), list(cr).c_str(),
                               runs.bl_seconds)};
    });

    report("AC5", "dichotomy: (2,1) internal, (0.5,1) boundary at eps 0.04, dx 0.01", [&] {
        const auto t0 = Clock::now();
        const SweepRecord s = sweep(config(kDichotomy, "dichotomy"));
        const double secs = seconds_since(t0);
        std::vector<std::string> cls;
        for (const auto& j : s.jobs)
            cls.push_back(j.status == "ok" && !j.results.empty() && j.results[0].layer
                              ? to_string(j.results[0].layer->classification)
                              : "failed");
        const bool ok = cls.size() == 2 && cls[0] == "InternalLayer" && cls[1] == "BoundaryLayer" && secs < 900.0;
        return Outcome{ok, fmt("(2,1) %s  (0.5,1) %s  time %.1fs", cls.size() > 0 ? cls[0].c_str() : "-",
                               cls.size() > 1 ? cls[1].c_str() : "-", secs)};
    });

    report("AC6", "internal-case energy within [2 sigma h - c sqrt(eps), 2 sigma h + c' eps], layers at x = 0, l", [&] {
        need(il_error);
        const auto up = constants_of(runs.il, "internal_layer.upper_total");
        const auto lo = constants_of(runs.il, "internal_layer.lower_total");
        bool located = true;
        std::string where;
        for (const auto& e : runs.il.results) {
            const auto xs = midline_crossings(*e.field);
            const double tol = 3.0 * std::pow(e.eps, 0.25), l = runs.il.config.domain.l;
            bool near0 = false, nearl = false;
            for (double x : xs) {
                const bool a = std::abs(x) <= tol, b = std::abs(x - l) <= tol;
                near0 |= a;
                nearl |= b;
                located &= a || b;
            }
            located &= near0 && nearl;
            where += (where.empty() ? "" : " | ") + list(xs);
        }
        const bool ok = up.size() == 3 && lo.size() == 3 && constants_stable(up) && constants_stable(lo) && located;
        return Outcome{ok, fmt("c' %s  c %s  crossings %s", list(up).c_str(), list(lo).c_str(), where.c_str())};
    });

    report("AC7", "exponential decay rate within 25 percent of sqrt(2), R^2 > 0.98 (internal case, finest eps)", [&] {
        need(il_error);
        std::vector<double> ks, r2s;
        for (const auto& e : runs.il.results) {
            if (!e.decay) throw std::runtime_error("decay fit missing: " + e.decay_error);
            ks.push_back(e.decay->k);
            r2s.push_back(e.decay->r2);
        }
        const bool ok = std::abs(ks.back() - std::sqrt(2.0)) <= 0.25 * std::sqrt(2.0) && r2s.back() > 0.98;
        return Outcome{ok, fmt("k %s  R^2 %s", list(ks).c_str(), list(r2s).c_str())};
    });

    report("AC8", "boundary-layer thickness trends and decreasing side fluxes", [&] {
        need(bl_error);
        if (!runs.bl.thickness || !runs.bl.side_flux_decreasing) throw std::runtime_error("trend missing");
        std::vector<double> t, uy, side;
        for (const auto& row : runs.bl.thickness->rows) {
            t.push_back(row.thickness_over_eps);
            uy.push_back(row.eps_uy);
        }
        for (const auto& e : runs.bl.results)
            if (e.hamiltonian) side.push_back(e.hamiltonian->abs_side_minus + e.hamiltonian->abs_side_plus);
        const bool ok = t.size() == 3 && runs.bl.thickness->thickness_over_eps_increasing &&
                        runs.bl.thickness->eps_uy_decreasing && *runs.bl.side_flux_decreasing;
        return Outcome{ok, fmt("t/eps %s  eps|u_y| %s  side flux %s", list(t).c_str(), list(uy).c_str(),
                               list(side).c_str())};
    });

    report("AC9", "disc r=1, z=0: sigma_+ and energy bounds, single well outside the eps^(1/3) collar", [&] {
        need(disc_error);
        const double sp = runs.disc.connections.at(0).action;
        const auto up = constants_of(runs.disc, "disc.upper_total");
        const auto lo = constants_of(runs.disc, "disc.lower_total_relative");
        const double d0 = delta0(*p);
        bool single = true;
        for (const auto& e : runs.disc.results) {
            const Field2D& f = *e.field;
            const Domain2D& d = *f.domain;
            const double collar = std::cbrt(e.eps);
            int well = 0;
            for (std::size_t k = 0; k < d.grid.size(); ++k) {
                if (d.kind[k] != NodeKind::Interior || -d.sd[k] < collar) continue;
                const int w = std::abs(f.values[k] - 1.0) < d0 ? 1 : std::abs(f.values[k] + 1.0) < d0 ? -1 : 0;
                if (w == 0 || (well != 0 && w != well)) single = false;
                well = w;
            }
        }
        std::vector<double> E;
        for (const auto& e : runs.disc.results) E.push_back(e.energy.total);
        const bool ok = std::abs(sp - 0.471405) < 1e-4 && std::abs(sp - kSigmaPlus) < 1e-4 && up.size() == 2 &&
                        lo.size() == 2 && constants_stable(up) && constants_stable(lo) && single;
        return Outcome{ok, fmt("sigma+ %.7f  E %s vs %.5f  c' %s  c %s  single well %s", sp, list(E).c_str(),
                               kSigmaPlus * 2.0 * M_PI, list(up).c_str(), list(lo).c_str(), single ? "yes" : "no")};
    });

    report("AC10", "Modica inequality at every interior node of the converged scalar minimizers", [&] {
        need(bl_error);
        need(il_error);
        need(disc_error);
        bool ok = true;
        std::string detail;
        for (const RunRecord* r : {&runs.bl, &runs.il, &runs.disc}) {
            for (const auto& e : r->results) {
                const ModicaReport m = modica_residual(*e.field, *p, 1e-3);
                const Domain2D& d = *e.field->domain;
                const int i = static_cast<int>(m.argmax % d.grid.nx), j = static_cast<int>(m.argmax / d.grid.nx);
                ok &= m.max <= 1e-3;
                detail += fmt("%s%s eps %g max %.3g at (%.3f, %.3f)", detail.empty() ? "" : "; ",
                              d.name.c_str(), e.eps, m.max, d.grid.x(i), d.grid.y(j));
            }
        }
        return Outcome{ok, detail};
    });

    report("AC11", "identical seeds give byte-identical summaries; snapshot round trip bit exact", [&] {
        const RunConfig a = config(kSmall, "det_a"), b = config(kSmall, "det_b");
        run(a);
        run(b);
        const bool same = read_file(a.out / "summary.json") == read_file(b.out / "summary.json");
        bool exact = !il_error.empty() ? false : true;
        if (exact) {
            const Field2D& f = *runs.il.results.back().field;
            const fs::path path = workdir("snapshot") / "f.acf";
            write_snapshot(path, f);
            const std::string bytes = read_file(path);
            const GridSnapshot s = decode_grid_snapshot(bytes);
            exact = encode_snapshot(s) == bytes && field_from_snapshot(s, f.domain).values == f.values;
        }
        return Outcome{same && exact, fmt("summary identical %s  round trip %s", same ? "yes" : "no",
                                          exact ? "exact" : "differs")};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
