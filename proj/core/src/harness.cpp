#include "aclab/harness.hpp"

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"
#include "aclab/snapshot.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace aclab {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kAnalyses{"classify", "bounds", "thickness", "decay", "hamiltonian", "modica", "partition"};

const std::map<std::string, std::set<std::string>> kKeys{
    {"potential", {"name"}},
    {"domain", {"shape", "l", "h", "r", "dx", "dx_per_eps"}},
    {"boundary", {"mode", "C0", "a_minus", "a_plus", "z"}},
    {"connection", {"L", "n"}},
    {"solver", {"method", "tolerance", "max_iterations", "tau", "memory", "inits", "seeds", "M", "perturbation",
                "collar_n", "C2"}},
    {"run", {"eps", "seed", "out", "analyses"}},
    {"sweep", {"lh", "workers"}},
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
        throw ConfigError("config: " + key + " = '" + v + "' is not a number");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size()) throw ConfigError("config: " + key + " = '" + v + "' is not an integer");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    if (v.empty() || v[0] == '-') throw ConfigError("config: " + key + " must be a non-negative integer");
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) throw ConfigError("config: " + key + " = '" + v + "' is not an integer");
    return x;
}

Point to_point(const std::string& key, const std::string& v) {
    Point p;
    for (const auto& t : split(v, ',')) p.push_back(to_double(key, t));
    if (p.empty()) throw ConfigError("config: " + key + " is empty");
    return p;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::string join_point(const Point& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + num(p[i]);
    return s;
}

double norm(const Point& p) {
    double s = 0.0;
    for (double x : p) s += x * x;
    return std::sqrt(s);
}

bool same_point(const Point& a, const Point& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
}

bool is_integer_multiple(double len, double dx) {
    const double q = len / dx;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

json point_json(const Point& p) {
    json a = json::array();
    for (double x : p) a.push_back(x);
    return a;
}

json start_json(const StartRecord& s) {
    return json{{"label", s.label},         {"initial_energy", s.initial_energy}, {"final_energy", s.final_energy},
                {"iterations", s.iterations}, {"residual", s.residual},            {"converged", s.converged},
                {"error", s.error}};
}

StartRecord start_from_json(const json& j) {
    StartRecord s;
    s.label = j.at("label").get<std::string>();
    s.initial_energy = j.at("initial_energy").get<double>();
    s.final_energy = j.at("final_energy").get<double>();
    s.iterations = j.at("iterations").get<int>();
    s.residual = j.at("residual").get<double>();
    s.converged = j.at("converged").get<bool>();
    s.error = j.at("error").get<std::string>();
    return s;
}

Point well_or(const Potential& p, const Point& given, std::size_t index) {
    if (!given.empty()) return given;
    if (p.wells().size() <= index) throw ConfigError("config: potential has too few wells");
    return p.wells()[index];
}

// The deepest interior node decides which well a disc minimizer sits in.
Point bulk_well(const Field2D& f, const Potential& p) {
    const Domain2D& d = *f.domain;
    std::size_t best = 0;
    for (std::size_t k = 0; k < d.grid.size(); ++k)
        if (d.kind[k] == NodeKind::Interior && d.sd[k] < d.sd[best]) best = k;
    const auto u = f.at(best);
    Point out;
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& a : p.wells()) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += (u[c] - a[c]) * (u[c] - a[c]);
        if (s < bd) {
            bd = s;
            out = a;
        }
    }
    return out;
}

std::vector<BoundCase> bound_cases(const RunConfig& c) {
    if (c.domain.shape == "disc") return {BoundCase::Disc};
    if (c.domain.l < c.domain.h) return {BoundCase::BoundaryLayer};
    if (c.domain.l > c.domain.h) return {BoundCase::InternalLayer};
    return {BoundCase::BoundaryLayer, BoundCase::InternalLayer};
}

std::string classify_error_kind(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const SolverError*>(&e)) return "solver";
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return "io";
    return "domain";
}

}  // namespace

double RunConfig::dx_at(double e) const { return domain.dx > 0.0 ? domain.dx : domain.dx_per_eps * e; }

bool RunConfig::wants(const std::string& a) const {
    return std::find(analyses.begin(), analyses.end(), a) != analyses.end();
}

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    for (const auto& [section, body] : tree) {
        const auto known = kKeys.find(section);
        if (known == kKeys.end()) throw ConfigError("config: unknown section [" + section + "]");
        if (body.empty() && !body.data().empty()) throw ConfigError("config: '" + section + "' must be a section");
        for (const auto& [key, value] : body)
            if (!known->second.count(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
        return std::nullopt;
    };
    if (auto v = get("potential.name")) c.potential = *v;
    if (auto v = get("domain.shape")) c.domain.shape = *v;
    if (auto v = get("domain.l")) c.domain.l = to_double("domain.l", *v);
    if (auto v = get("domain.h")) c.domain.h = to_double("domain.h", *v);
    if (auto v = get("domain.r")) c.domain.r = to_double("domain.r", *v);
    if (auto v = get("domain.dx")) c.domain.dx = to_double("domain.dx", *v);
    if (auto v = get("domain.dx_per_eps")) c.domain.dx_per_eps = to_double("domain.dx_per_eps", *v);
    if (auto v = get("boundary.mode")) {
        try {
            c.boundary.mode = boundary_mode_from_string(*v);
        } catch (const Error&) {
            throw ConfigError("config: unknown boundary mode '" + *v + "'");
        }
    }
    if (auto v = get("boundary.C0")) c.boundary.C0 = to_double("boundary.C0", *v);
    if (auto v = get("boundary.a_minus")) c.boundary.a_minus = to_point("boundary.a_minus", *v);
    if (auto v = get("boundary.a_plus")) c.boundary.a_plus = to_point("boundary.a_plus", *v);
    if (auto v = get("boundary.z")) c.boundary.z = to_point("boundary.z", *v);
    if (auto v = get("connection.L")) c.connection.L = to_double("connection.L", *v);
    if (auto v = get("connection.n")) c.connection.n = static_cast<int>(to_int("connection.n", *v));
    if (auto v = get("solver.method")) c.solver.method = method_from_string(*v);
    if (auto v = get("solver.tolerance")) c.solver.tolerance = to_double("solver.tolerance", *v);
    if (auto v = get("solver.max_iterations"))
        c.solver.max_iterations = static_cast<int>(to_int("solver.max_iterations", *v));
    if (auto v = get("solver.tau")) c.solver.tau = to_double("solver.tau", *v);
    if (auto v = get("solver.memory")) c.solver.lbfgs_memory = static_cast<int>(to_int("solver.memory", *v));
    if (auto v = get("solver.inits")) {
        c.solver.inits.clear();
        for (const auto& t : split(*v, ',')) c.solver.inits.push_back(init_kind_from_string(t));
    }
    if (auto v = get("solver.seeds")) {
        c.solver.seeds.clear();
        for (const auto& t : split(*v, ',')) c.solver.seeds.push_back(to_u64("solver.seeds", t));
        c.solver_seeds_given = true;
    }
    if (auto v = get("solver.M")) c.solver.M = to_double("solver.M", *v);
    if (auto v = get("solver.perturbation")) c.solver.perturbation = to_double("solver.perturbation", *v);
    if (auto v = get("solver.collar_n")) c.solver.comparison.collar_n = to_double("solver.collar_n", *v);
    if (auto v = get("solver.C2")) c.solver.comparison.C2 = to_double("solver.C2", *v);
    if (auto v = get("run.eps"))
        for (const auto& t : split(*v, ',')) c.eps.push_back(to_double("run.eps", t));
    if (auto v = get("run.seed")) c.seed = to_u64("run.seed", *v);
    if (auto v = get("run.out")) c.out = *v;
    if (auto v = get("run.analyses")) {
        c.analyses.clear();
        if (*v != "none")
            for (const auto& t : split(*v, ',')) c.analyses.push_back(t);
    }
    if (auto v = get("sweep.lh")) {
        for (const auto& t : split(*v, ',')) {
            const auto parts = split(t, ':');
            if (parts.size() != 2) throw ConfigError("config: sweep.lh entries are l:h, got '" + t + "'");
            c.sweep_lh.emplace_back(to_double("sweep.lh", parts[0]), to_double("sweep.lh", parts[1]));
        }
    }
    if (auto v = get("sweep.workers")) c.workers = static_cast<int>(to_int("sweep.workers", *v));
    if (!c.solver_seeds_given) c.solver.seeds = {c.seed};
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError&) {
        throw ConfigError("config: cannot read " + path.string());
    }
    return parse_config(text);
}

void validate_config(const RunConfig& c) {
    const PotentialPtr p = make_potential(c.potential);
    const int m = p->dimension();
    if (c.domain.shape != "stadium" && c.domain.shape != "disc")
        throw ConfigError("config: domain.shape must be stadium or disc");
    if (c.eps.empty()) throw ConfigError("config: run.eps is empty");
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
        if (!(c.eps[i] > 0.0 && c.eps[i] < 1.0)) throw ConfigError("config: eps values must lie in (0, 1)");
        if (i > 0 && !(c.eps[i] < c.eps[i - 1])) throw ConfigError("config: run.eps must be strictly decreasing");
    }
    if (c.domain.dx < 0.0) throw ConfigError("config: domain.dx must be positive");
    if (c.domain.dx == 0.0 && !(c.domain.dx_per_eps > 0.0)) throw ConfigError("config: domain.dx_per_eps must be positive");
    std::vector<std::pair<double, double>> shapes;
    if (c.domain.shape == "stadium") {
        if (c.sweep_lh.empty()) shapes.emplace_back(c.domain.l, c.domain.h);
        for (const auto& lh : c.sweep_lh) shapes.push_back(lh);
    }
    for (double e : c.eps) {
        const double dx = c.dx_at(e);
        if (dx > 0.25 * e * (1.0 + 1e-12))
            throw ResolutionError("config: dx = " + short_num(dx) + " exceeds eps/4 at eps = " + short_num(e));
        for (const auto& [l, h] : shapes) {
            if (!(l > 0.0 && h > 0.0)) throw ConfigError("config: stadium l and h must be positive");
            if (dx > std::min(l, h) / 32.0 * (1.0 + 1e-12))
                throw ResolutionError("config: dx = " + short_num(dx) + " too coarse for the stadium");
            if (!is_integer_multiple(l, dx) || !is_integer_multiple(h, dx))
                throw ResolutionError("config: l and h must be integer multiples of dx = " + short_num(dx));
        }
        if (c.domain.shape == "disc") {
            if (!(c.domain.r > 0.0)) throw ConfigError("config: disc radius must be positive");
            if (dx > c.domain.r / 32.0 * (1.0 + 1e-12))
                throw ResolutionError("config: dx = " + short_num(dx) + " too coarse for the disc");
        }
    }
    if (c.domain.shape == "disc" && c.boundary.mode != BoundaryMode::ConstZ)
        throw ConfigError("config: the disc takes constant boundary data (mode = const_z)");
    if (!(c.boundary.C0 > 0.0)) throw ConfigError("config: boundary.C0 must be positive");
    auto check_dim = [&](const Point& q, const char* name) {
        if (!q.empty() && static_cast<int>(q.size()) != m)
            throw ConfigError(std::string("config: ") + name + " has the wrong dimension");
    };
    check_dim(c.boundary.a_minus, "boundary.a_minus");
    check_dim(c.boundary.a_plus, "boundary.a_plus");
    check_dim(c.boundary.z, "boundary.z");
    if (c.boundary.mode == BoundaryMode::StepH3) {
        const Point am = well_or(*p, c.boundary.a_minus, 0), ap = well_or(*p, c.boundary.a_plus, 1);
        auto is_well = [&](const Point& q) {
            return std::any_of(p->wells().begin(), p->wells().end(), [&](const Point& a) { return same_point(a, q); });
        };
        if (!is_well(am) || !is_well(ap)) throw ConfigError("config: a_minus and a_plus must be wells of the potential");
        if (same_point(am, ap)) throw ConfigError("config: a_minus and a_plus coincide");
    } else if (c.boundary.z.empty()) {
        throw ConfigError("config: const_z boundary data needs boundary.z");
    }
    if (!(c.connection.L >= 10.0) || c.connection.n < 256) throw ConfigError("config: connection needs L >= 10, n >= 256");
    c.solver.validate();
    for (const auto& a : c.analyses)
        if (!kAnalyses.count(a)) throw ConfigError("config: unknown analysis '" + a + "'");
    if (c.workers < 1) throw ConfigError("config: sweep.workers must be >= 1");
    if (c.out.empty()) throw ConfigError("config: run.out is empty");
}

std::string config_echo(const RunConfig& c) {
    std::string s;
    auto line = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    line("potential.name", c.potential);
    line("domain.shape", c.domain.shape);
    line("domain.l", num(c.domain.l));
    line("domain.h", num(c.domain.h));
    line("domain.r", num(c.domain.r));
    line("domain.dx", num(c.domain.dx));
    line("domain.dx_per_eps", num(c.domain.dx_per_eps));
    line("boundary.mode", to_string(c.boundary.mode));
    line("boundary.C0", num(c.boundary.C0));
    line("boundary.a_minus", join_point(c.boundary.a_minus));
    line("boundary.a_plus", join_point(c.boundary.a_plus));
    line("boundary.z", join_point(c.boundary.z));
    line("connection.L", num(c.connection.L));
    line("connection.n", std::to_string(c.connection.n));
    line("solver.method", to_string(c.solver.method));
    line("solver.tolerance", num(c.solver.tolerance));
    line("solver.max_iterations", std::to_string(c.solver.max_iterations));
    line("solver.tau", num(c.solver.tau));
    line("solver.memory", std::to_string(c.solver.lbfgs_memory));
    std::string inits, seeds, eps, analyses, lh;
    for (auto k : c.solver.inits) inits += (inits.empty() ? "" : ",") + to_string(k);
    for (auto v : c.solver.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(v);
    for (auto e : c.eps) eps += (eps.empty() ? "" : ",") + num(e);
    for (const auto& a : c.analyses) analyses += (analyses.empty() ? "" : ",") + a;
    for (const auto& [l, h] : c.sweep_lh) lh += (lh.empty() ? "" : ",") + num(l) + ":" + num(h);
    line("solver.inits", inits);
    line("solver.seeds", seeds);
    line("solver.M", num(c.solver.M));
    line("solver.perturbation", num(c.solver.perturbation));
    line("solver.collar_n", num(c.solver.comparison.collar_n));
    line("solver.C2", num(c.solver.comparison.C2));
    line("run.eps", eps);
    line("run.seed", std::to_string(c.seed));
    line("run.analyses", analyses);
    line("sweep.lh", lh);
    return s;
}

DomainPtr build_domain(const RunConfig& c, double eps) {
    const double dx = c.dx_at(eps);
    if (c.domain.shape == "disc") return std::make_shared<const Domain2D>(build_disc(c.domain.r, dx));
    return std::make_shared<const Domain2D>(build_stadium(c.domain.l, c.domain.h, dx));
}

BoundaryData build_boundary(const RunConfig& c, const Potential& p, double eps) {
    BoundaryData b;
    b.mode = c.boundary.mode;
    b.C0 = c.boundary.C0;
    b.eps = eps;
    b.a_minus = well_or(p, c.boundary.a_minus, 0);
    b.a_plus = well_or(p, c.boundary.a_plus, 1);
    b.z = c.boundary.z.empty() ? b.a_minus : c.boundary.z;
    b.M = 1.0 + std::max({norm(b.a_minus), norm(b.a_plus), norm(b.z)});
    return b;
}

namespace {

json energy_json(const EnergyBreakdown& e) {
    return json{{"total", e.total}, {"kinetic_x", e.kinetic_x}, {"kinetic_y", e.kinetic_y},
                {"potential", e.potential_part}};
}

json eps_json(const EpsRecord& r) {
    json j;
    j["eps"] = r.eps;
    j["dx"] = r.dx;
    j["nodes"] = r.nodes;
    j["interior"] = r.interior;
    j["energy"] = energy_json(r.energy);
    j["energy_y_on_R"] = r.energy_y_on_R;
    j["energy_x_on_D"] = r.energy_x_on_D;
    j["comparison_energy"] = r.comparison_energy;
    j["winner"] = r.winner;
    json starts = json::array();
    for (const auto& s : r.starts) starts.push_back(start_json(s));
    j["starts"] = starts;
    if (r.layer) {
        j["layer"] = json{{"classification", to_string(r.layer->classification)},
                          {"delta0", r.layer->delta0},
                          {"band_deviation", r.layer->band_deviation},
                          {"plus_reach", r.layer->plus_reach},
                          {"block_deviation", r.layer->block_deviation},
                          {"outside_deviation", r.layer->outside_deviation}};
    }
    if (!r.bounds.empty()) {
        json rows = json::array();
        for (const auto& b : r.bounds)
            rows.push_back(json{{"name", b.name},   {"leading", b.leading},   {"measured", b.measured},
                                {"scale", b.scale}, {"constant", b.constant}, {"holds", b.holds}});
        j["bounds"] = rows;
    }
    if (r.decay)
        j["decay"] = json{{"k", r.decay->k},           {"K", r.decay->K}, {"offset", r.decay->offset},
                          {"r2", r.decay->r2}, {"samples", r.decay->samples}};
    if (!r.decay_error.empty()) j["decay_error"] = r.decay_error;
    if (r.hamiltonian) {
        const auto& h = *r.hamiltonian;
        j["hamiltonian"] = json{{"x0", h.x0},
                                {"x1", h.x1},
                                {"ytop", h.ytop},
                                {"top", h.top},
                                {"bottom", h.bottom},
                                {"side_minus", h.side_minus},
                                {"side_plus", h.side_plus},
                                {"abs_side_minus", h.abs_side_minus},
                                {"abs_side_plus", h.abs_side_plus},
                                {"residual", h.residual}};
    }
    if (r.modica_max)
        j["modica"] = json{{"max", *r.modica_max}, {"violation_area", *r.modica_area}, {"argmax", point_json(r.modica_argmax)}};
    if (r.l1_nearest) j["partition"] = json{{"l1_to_nearest", *r.l1_nearest}, {"l1_to_expected", *r.l1_expected}};
    j["gradient_bound"] = r.gradient_bound;
    j["snapshot"] = r.snapshot;
    return j;
}

void analyze_eps(EpsRecord& rec, const Field2D& f, const Potential& p, const RunConfig& c, const BoundaryData& b,
                 double sigma, std::string& decay_csv) {
    const Domain2D& d = *f.domain;
    const bool h2 = d.has_rectangle;
    rec.energy = total_energy(f, p);
    if (h2) {
        rec.energy_y_on_R = energy_directional(f, p, Axis::Y, make_subdomain(d, "R")).value;
        rec.energy_x_on_D = energy_directional(f, p, Axis::X, make_subdomain(d, "D_internal")).value;
    }
    rec.gradient_bound = scaled_gradient_bound(f);
    if (h2 && c.wants("classify"))
        rec.layer = classify_layer(f, p, b.a_minus, b.a_plus, c.solver.tolerance);
    if (c.wants("bounds")) {
        for (BoundCase bc : bound_cases(c)) {
            BoundInputs in;
            in.which = bc;
            in.eps = f.eps;
            in.sigma = sigma;
            in.l = d.l;
            in.h = d.h;
            in.perimeter = 2.0 * std::numbers::pi * c.domain.r;
            in.total = rec.energy.total;
            in.directional = bc == BoundCase::BoundaryLayer ? rec.energy_y_on_R : rec.energy_x_on_D;
            in.comparison = rec.comparison_energy;
            for (BoundRow row : bound_report(in)) {
                row.name = to_string(bc) + "." + row.name;
                rec.bounds.push_back(row);
            }
        }
    }
    if (c.wants("decay")) {
        Point well = b.a_minus;
        Target anchor = Target::Boundary;
        if (!h2) well = bulk_well(f, p);
        else anchor = d.l > d.h ? Target::R : Target::PlusBoundary;
        const auto dist = distance_field(d, anchor);
        const double d0 = delta0(p);
        try {
            rec.decay = decay_fit(f, well, dist, d0);
            for (std::size_t k = 0; k < d.grid.size(); ++k) {
                if (d.kind[k] != NodeKind::Interior || !(dist[k] > 0.0)) continue;
                double s = 0.0;
                for (int cc = 0; cc < f.m; ++cc) s += std::pow(f.values[k * f.m + cc] - well[cc], 2);
                const double e = std::sqrt(s);
                if (e > 1e-6 && e < d0) decay_csv += num(f.eps) + "," + num(dist[k] / f.eps) + "," + num(std::log(e)) + "\n";
            }
        } catch (const DomainError& e) {
            rec.decay_error = e.what();
        }
    }
    if (h2 && c.wants("hamiltonian")) rec.hamiltonian = standard_hamiltonian(f, p);
    if (f.m == 1 && c.wants("modica")) {
        const ModicaReport mr = modica_residual(f, p);
        rec.modica_max = mr.max;
        rec.modica_area = mr.violation_area;
        const Grid& g = d.grid;
        rec.modica_argmax = {g.x(static_cast<int>(mr.argmax % g.nx)), g.y(static_cast<int>(mr.argmax / g.nx))};
    }
    if (c.wants("partition")) {
        LayerClass expect = LayerClass::Ambiguous;
        if (h2) expect = d.l < d.h ? LayerClass::BoundaryLayer : d.l > d.h ? LayerClass::InternalLayer : LayerClass::Ambiguous;
        const LimitPartition lp = limit_partition(f, p, expect, b.a_minus, b.a_plus);
        rec.l1_nearest = lp.l1_to_nearest;
        rec.l1_expected = lp.l1_to_expected;
    }
}

void finish_trends(RunRecord& r, const std::vector<const Field2D*>& fields, const Potential& p, const BoundaryData& b) {
    const RunConfig& c = r.config;
    for (const auto& e : r.results)
        for (const auto& row : e.bounds) r.constants[row.name].push_back(row.constant);
    for (const auto& [name, cs] : r.constants) r.stable[name] = constants_stable(cs);
    if (c.domain.shape == "stadium" && c.wants("thickness") && fields.size() >= 3 &&
        fields.size() == r.results.size())
        r.thickness = thickness_scaling(fields, b.a_plus, c.domain.l / 2.0, delta0(p), 1.0);
    if (c.domain.shape == "stadium" && c.wants("hamiltonian") && r.results.size() >= 2) {
        bool dec = true;
        for (std::size_t i = 1; i < r.results.size(); ++i) {
            const auto& a = *r.results[i - 1].hamiltonian;
            const auto& z = *r.results[i].hamiltonian;
            dec = dec && z.abs_side_minus < a.abs_side_minus && z.abs_side_plus < a.abs_side_plus;
        }
        r.side_flux_decreasing = dec;
    }
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

void write_outputs(const RunRecord& r, const std::string& decay_csv) {
    const fs::path out = r.config.out;
    write_file(out / "summary.json", summary_json(r));
    json t;
    t["per_eps"] = json::array();
    for (const auto& e : r.results) t["per_eps"].push_back(json{{"eps", e.eps}, {"wall_seconds", e.wall_seconds}});
    write_file(out / "timings.json", t.dump(2) + "\n");

    std::string res =
        "eps,dx,nodes,total,kinetic_x,kinetic_y,potential,energy_y_on_R,energy_x_on_D,comparison_energy,"
        "classification,winner,gradient_bound,modica_max,l1_to_expected,decay_k,decay_r2,abs_side_minus,abs_side_plus\n";
    std::string bounds = "eps,name,leading,measured,scale,constant,holds\n";
    for (const auto& e : r.results) {
        res += num(e.eps) + "," + num(e.dx) + "," + std::to_string(e.nodes) + "," + num(e.energy.total) + "," +
               num(e.energy.kinetic_x) + "," + num(e.energy.kinetic_y) + "," + num(e.energy.potential_part) + "," +
               num(e.energy_y_on_R) + "," + num(e.energy_x_on_D) + "," + num(e.comparison_energy) + "," +
               (e.layer ? to_string(e.layer->classification) : "") + "," + e.winner + "," + num(e.gradient_bound) + "," +
               (e.modica_max ? num(*e.modica_max) : "") + "," + (e.l1_expected ? num(*e.l1_expected) : "") + "," +
               (e.decay ? num(e.decay->k) : "") + "," + (e.decay ? num(e.decay->r2) : "") + "," +
               (e.hamiltonian ? num(e.hamiltonian->abs_side_minus) : "") + "," +
               (e.hamiltonian ? num(e.hamiltonian->abs_side_plus) : "") + "\n";
        for (const auto& b : e.bounds)
            bounds += num(e.eps) + "," + b.name + "," + num(b.leading) + "," + num(b.measured) + "," + num(b.scale) +
                      "," + num(b.constant) + "," + csv_bool(b.holds) + "\n";
    }
    write_file(out / "results.csv", res);
    write_file(out / "bounds.csv", bounds);
    std::string th = "eps,thickness,thickness_over_eps,sup_near,eps_uy\n";
    if (r.thickness)
        for (const auto& row : r.thickness->rows)
            th += num(row.eps) + "," + num(row.thickness) + "," + num(row.thickness_over_eps) + "," + num(row.sup_near) +
                  "," + num(row.eps_uy) + "\n";
    write_file(out / "thickness.csv", th);
    write_file(out / "decay_samples.csv", "eps,d_over_eps,log_deviation\n" + decay_csv);
    write_file(out / "plot.gp",
               "set datafile separator ','\n"
               "set key autotitle columnhead\n"
               "set terminal pngcairo size 900,600\n"
               "set output 'energy.png'\n"
               "set xlabel 'eps'\nset ylabel 'energy'\n"
               "plot 'results.csv' using 1:4 with linespoints\n"
               "set output 'thickness.png'\n"
               "set ylabel 't / eps'\n"
               "plot 'thickness.csv' using 1:3 with linespoints\n"
               "set output 'decay.png'\n"
               "set xlabel 'd / eps'\nset ylabel 'log |u - a|'\n"
               "plot 'decay_samples.csv' using 2:3 with dots\n");
}

json checkpoint_entry(const EpsRecord& e) {
    json starts = json::array();
    for (const auto& s : e.starts) starts.push_back(start_json(s));
    return json{{"eps", e.eps}, {"snapshot", e.snapshot}, {"winner", e.winner},
                {"comparison_energy", e.comparison_energy}, {"starts", starts}};
}

}  // namespace

std::string summary_json(const RunRecord& r) {
    json j;
    json echo;
    std::istringstream is(config_echo(r.config));
    for (std::string line; std::getline(is, line);) {
        const auto eq = line.find(" = ");
        echo[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["config"] = echo;
    j["status"] = r.status;
    if (r.status != "ok") j["failure"] = json{{"stage", r.stage}, {"kind", r.error_kind}, {"error", r.error}};
    json conns = json::array();
    for (const auto& c : r.connections)
        conns.push_back(json{{"half_line", c.half_line},
                             {"action", c.action},
                             {"start", point_json(c.start)},
                             {"end", point_json(c.end)},
                             {"k", c.k},
                             {"equipartition_residual", c.equipartition}});
    j["connections"] = conns;
    json res = json::array();
    for (const auto& e : r.results) res.push_back(eps_json(e));
    j["results"] = res;
    json trends;
    json consts;
    for (const auto& [name, cs] : r.constants) consts[name] = json{{"values", cs}, {"stable", r.stable.at(name)}};
    trends["constants"] = consts;
    if (r.thickness) {
        json rows = json::array();
        for (const auto& row : r.thickness->rows)
            rows.push_back(json{{"eps", row.eps},
                                {"thickness", row.thickness},
                                {"thickness_over_eps", row.thickness_over_eps},
                                {"sup_near", row.sup_near},
                                {"eps_uy", row.eps_uy}});
        trends["thickness"] = json{{"x_hat", r.thickness->x_hat},
                                   {"K", r.thickness->K},
                                   {"rows", rows},
                                   {"thickness_over_eps_increasing", r.thickness->thickness_over_eps_increasing},
                                   {"eps_uy_decreasing", r.thickness->eps_uy_decreasing},
                                   {"sup_near_decreasing", r.thickness->sup_near_decreasing}};
    }
    if (r.side_flux_decreasing) trends["side_flux_decreasing"] = *r.side_flux_decreasing;
    j["trends"] = trends;
    return j.dump(2) + "\n";
}

RunRecord run(const RunConfig& config, const RunOptions& options) {
    validate_config(config);
    RunRecord r;
    r.config = config;
    const fs::path out = config.out;
    const PotentialPtr p = make_potential(config.potential);
    const std::string echo = config_echo(config);

    json checkpoint{{"echo", echo}, {"done", json::array()}};
    std::map<double, json> resumed;
    if (options.resume || options.analyze_only) {
        try {
            const json old = json::parse(read_file(out / "checkpoint.json"));
            if (old.at("echo").get<std::string>() == echo)
                for (const auto& e : old.at("done")) resumed[e.at("eps").get<double>()] = e;
        } catch (const IoError&) {
        } catch (const json::exception&) {
        }
        if (options.analyze_only && resumed.size() != config.eps.size())
            throw IoError("analyze: " + (out / "checkpoint.json").string() + " does not cover every eps of this config");
    }

    std::string stage = "connection";
    std::string decay_csv;
    std::vector<Field2D> kept;
    kept.reserve(config.eps.size());
    BoundaryData last_b;
    try {
        Connections conns;
        const BoundaryData b0 = build_boundary(config, *p, config.eps.front());
        double sigma = 0.0;
        if (config.boundary.mode == BoundaryMode::ConstZ) {
            conns.half = solve_halfline(*p, b0.z, config.connection.L, config.connection.n);
            sigma = conns.half->action;
        } else {
            conns.full = solve_connection(*p, b0.a_minus, config.connection.L, config.connection.n);
            sigma = conns.full->action;
        }
        for (const auto* c : {&conns.full, &conns.half}) {
            if (!*c) continue;
            const ConnectionProfile& cp = **c;
            r.connections.push_back({cp.action, cp.start, cp.end, cp.tail_fit.k, cp.equipartition_residual, cp.half_line});
            if (options.write_outputs) {
                write_snapshot(out / "connection.acf", cp.profile);
                write_profile_csv(out / "connection.csv", cp.profile);
            }
        }

        for (std::size_t i = 0; i < config.eps.size(); ++i) {
            const double eps = config.eps[i];
            stage = "minimize eps=" + short_num(eps);
            const auto t0 = std::chrono::steady_clock::now();
            const DomainPtr d = build_domain(config, eps);
            const BoundaryData b = build_boundary(config, *p, eps);
            last_b = b;
            EpsRecord rec;
            rec.eps = eps;
            rec.dx = d->grid.dx;
            rec.nodes = d->grid.size();
            rec.interior = d->interior_count();
            rec.snapshot = "eps_" + std::to_string(i) + ".acf";
            const auto hit = resumed.find(eps);
            if (hit != resumed.end() && fs::exists(out / rec.snapshot)) {
                kept.push_back(field_from_snapshot(read_grid_snapshot(out / rec.snapshot), d));
                for (const auto& s : hit->second.at("starts")) rec.starts.push_back(start_from_json(s));
                rec.winner = hit->second.at("winner").get<std::string>();
                rec.comparison_energy = hit->second.at("comparison_energy").get<double>();
            } else {
                if (options.analyze_only) throw IoError("analyze: missing snapshot " + (out / rec.snapshot).string());
                SolveSettings s = config.solver;
                MinimizeResult mr = minimize(d, *p, b, s, conns, kept.empty() ? nullptr : &kept.back());
                rec.starts = mr.starts;
                rec.winner = mr.starts[mr.winner].label;
                kept.push_back(std::move(mr.field));
                if (options.write_outputs) write_snapshot(out / rec.snapshot, kept.back());
            }
            for (const auto& s : rec.starts)
                if (s.label.rfind("comparison:", 0) == 0 && s.error.empty() &&
                    (rec.comparison_energy == 0.0 || s.initial_energy < rec.comparison_energy))
                    rec.comparison_energy = s.initial_energy;
            checkpoint["done"].push_back(checkpoint_entry(rec));
            if (options.write_outputs) write_file(out / "checkpoint.json", checkpoint.dump(2) + "\n");

            stage = "analyze eps=" + short_num(eps);
            analyze_eps(rec, kept.back(), *p, config, b, sigma, decay_csv);
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            r.results.push_back(std::move(rec));
        }
        stage = "trends";
        std::vector<const Field2D*> fields;
        for (const auto& f : kept) fields.push_back(&f);
        finish_trends(r, fields, *p, last_b);
    } catch (const Error& e) {
        r.status = "failed";
        r.stage = stage;
        r.error = e.what();
        r.error_kind = classify_error_kind(e);
    }
    if (options.keep_fields)
        for (std::size_t i = 0; i < r.results.size() && i < kept.size(); ++i) r.results[i].field = kept[i];
    if (options.write_outputs) {
        try {
            write_outputs(r, decay_csv);
        } catch (const IoError& e) {
            if (r.status == "ok") {
                r.status = "failed";
                r.stage = "outputs";
                r.error = e.what();
                r.error_kind = "io";
            }
        }
    }
    return r;
}

SweepRecord sweep(const RunConfig& config, const RunOptions& options) {
    validate_config(config);
    std::vector<RunConfig> jobs;
    SweepRecord out;
    if (config.sweep_lh.empty()) {
        RunConfig c = config;
        c.out = fs::path(config.out) / "job_0";
        jobs.push_back(c);
        out.job_ids.push_back("job_0");
    } else {
        for (const auto& [l, h] : config.sweep_lh) {
            RunConfig c = config;
            c.sweep_lh.clear();
            c.domain.l = l;
            c.domain.h = h;
            const std::string id = "l" + short_num(l) + "_h" + short_num(h);
            c.out = fs::path(config.out) / ("job_" + id);
            jobs.push_back(c);
            out.job_ids.push_back(id);
        }
    }
    if (jobs.size() * config.eps.size() < 2) throw ConfigError("sweep: needs at least two sweep points");

    out.jobs.resize(jobs.size());
    const unsigned saved_workers = kernel_workers();
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(config.workers, jobs.size()));
    set_kernel_workers(std::max(1u, saved_workers / std::max(1u, workers)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            RunRecord rec;
            try {
                if (options.resume && fs::exists(fs::path(jobs[i].out) / "summary.json")) {
                    const json s = json::parse(read_file(fs::path(jobs[i].out) / "summary.json"));
                    RunOptions ro = options;
                    ro.analyze_only = s.at("status").get<std::string>() == "ok";
                    rec = run(jobs[i], ro);
                } else {
                    rec = run(jobs[i], options);
                }
            } catch (const std::exception& e) {
                rec.config = jobs[i];
                rec.status = "failed";
                rec.stage = "job";
                rec.error = e.what();
                rec.error_kind = classify_error_kind(e);
            }
            out.jobs[i] = std::move(rec);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    set_kernel_workers(saved_workers);

    json agg;
    agg["jobs"] = json::array();
    std::string cls = "job,l,h,eps,classification,total\n";
    std::string bounds = "job,eps,name,leading,measured,scale,constant,holds\n";
    std::string thick = "job,eps,thickness,thickness_over_eps,sup_near,eps_uy\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const RunRecord& r = out.jobs[i];
        if (r.status != "ok") ++out.failed;
        json j{{"id", out.job_ids[i]}, {"l", jobs[i].domain.l}, {"h", jobs[i].domain.h}, {"status", r.status}};
        if (r.status != "ok") j["failure"] = json{{"stage", r.stage}, {"error", r.error}};
        json per = json::array();
        for (const auto& e : r.results) {
            const std::string c = e.layer ? to_string(e.layer->classification) : "";
            per.push_back(json{{"eps", e.eps}, {"total", e.energy.total}, {"classification", c}});
            cls += out.job_ids[i] + "," + num(jobs[i].domain.l) + "," + num(jobs[i].domain.h) + "," + num(e.eps) + "," +
                   c + "," + num(e.energy.total) + "\n";
            for (const auto& b : e.bounds)
                bounds += out.job_ids[i] + "," + num(e.eps) + "," + b.name + "," + num(b.leading) + "," +
                          num(b.measured) + "," + num(b.scale) + "," + num(b.constant) + "," + csv_bool(b.holds) + "\n";
        }
        if (r.thickness)
            for (const auto& row : r.thickness->rows)
                thick += out.job_ids[i] + "," + num(row.eps) + "," + num(row.thickness) + "," +
                         num(row.thickness_over_eps) + "," + num(row.sup_near) + "," + num(row.eps_uy) + "\n";
        j["results"] = per;
        agg["jobs"].push_back(j);
    }
    agg["failed"] = out.failed;
    if (options.write_outputs) {
        const fs::path o = config.out;
        write_file(o / "sweep_summary.json", agg.dump(2) + "\n");
        write_file(o / "classification.csv", cls);
        write_file(o / "bounds_all.csv", bounds);
        write_file(o / "thickness_all.csv", thick);
    }
    return out;
}

std::string inspect_snapshot(const fs::path& path) {
    std::ostringstream os;
    auto stats = [&](const std::vector<double>& v, int m, std::size_t count) {
        for (int c = 0; c < m; ++c) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double x = v[i * m + c];
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                sum += x;
            }
            os << "component " << c + 1 << ": min " << num(lo) << " max " << num(hi) << " mean "
               << num(count ? sum / static_cast<double>(count) : 0.0) << "\n";
        }
    };
    if (is_profile_snapshot(path)) {
        const ProfileSnapshot s = read_profile_snapshot(path);
        os << "profile n=" << s.n << " m=" << s.m << " s0=" << num(s.s0) << " ds=" << num(s.ds) << "\n";
        stats(s.values, s.m, static_cast<std::size_t>(s.n));
    } else {
        const GridSnapshot s = read_grid_snapshot(path);
        os << "field nx=" << s.nx << " ny=" << s.ny << " m=" << s.m << " eps=" << num(s.eps) << " l=" << num(s.l)
           << " h=" << num(s.h) << " dx=" << num(s.dx) << "\n";
        stats(s.values, s.m, static_cast<std::size_t>(s.nx) * s.ny);
    }
    return os.str();
}

}  // namespace aclab
