#pragma once

#include "aclab/analysis.hpp"
#include "aclab/minimize.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aclab {

struct DomainSpec {
    std::string shape = "stadium";  // stadium | disc
    double l = 1.0;
    double h = 2.0;
    double r = 1.0;
    double dx = 0.0;           // fixed spacing; 0 means dx_per_eps * eps
    double dx_per_eps = 0.25;
};

struct BoundarySpec {
    BoundaryMode mode = BoundaryMode::StepH3;
    double C0 = 2.0;
    Point a_minus;  // empty: first well of the potential
    Point a_plus;   // empty: second well
    Point z;
};

struct ConnectionSpec {
    double L = 20.0;
    int n = 2048;
};

/// Everything a run needs, read from an INI-style file:
///
///   [potential] name
///   [domain]    shape, l, h, r, dx | dx_per_eps
///   [boundary]  mode, C0, a_minus, a_plus, z   (points as comma lists)
///   [connection] L, n
///   [solver]    method, tolerance, max_iterations, tau, memory, inits,
///               seeds, M, perturbation, collar_n, C2
///   [run]       eps (comma list, strictly decreasing), seed, out, analyses
///   [sweep]     lh = l:h, l:h, ...   workers
struct RunConfig {
    std::string potential = "quartic";
    DomainSpec domain;
    BoundarySpec boundary;
    ConnectionSpec connection;
    SolveSettings solver;
    bool solver_seeds_given = false;
    std::vector<double> eps;
    std::uint64_t seed = 1;
    std::filesystem::path out = "aclab-out";
    std::vector<std::string> analyses{"classify", "bounds", "thickness", "decay",
                                      "hamiltonian", "modica", "partition"};
    std::vector<std::pair<double, double>> sweep_lh;
    int workers = 1;

    /// Grid spacing used at a given eps.
    double dx_at(double e) const;
    bool wants(const std::string& analysis) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Raises ConfigError (ResolutionError for dx > eps/4) before any compute.
void validate_config(const RunConfig& c);

/// Canonical key=value rendering of the configuration.
std::string config_echo(const RunConfig& c);

DomainPtr build_domain(const RunConfig& c, double eps);
BoundaryData build_boundary(const RunConfig& c, const Potential& p, double eps);

struct ConnectionSummary {
    double action = 0.0;
    Point start;
    Point end;
    double k = 0.0;
    double equipartition = 0.0;
    bool half_line = false;
};

struct EpsRecord {
    double eps = 0.0;
    double dx = 0.0;
    std::size_t nodes = 0;
    std::size_t interior = 0;
    EnergyBreakdown energy;
    double energy_y_on_R = 0.0;
    double energy_x_on_D = 0.0;
    std::vector<StartRecord> starts;
    std::string winner;
    double comparison_energy = 0.0;  // lowest energy among the constructed comparison fields
    std::optional<LayerReport> layer;
    std::vector<BoundRow> bounds;
    std::optional<DecayFit> decay;
    std::string decay_error;
    std::optional<HamiltonianFlux> hamiltonian;
    std::optional<double> modica_max;
    std::optional<double> modica_area;
    Point modica_argmax;
    std::optional<double> l1_nearest;
    std::optional<double> l1_expected;
    double gradient_bound = 0.0;
    std::string snapshot;
    double wall_seconds = 0.0;  // not part of the JSON summary
    std::optional<Field2D> field;
};

struct RunRecord {
    RunConfig config;
    std::string status = "ok";  // ok | failed
    std::string stage;          // failing stage
    std::string error;
    std::string error_kind;     // config | solver | io | domain
    std::vector<ConnectionSummary> connections;
    std::vector<EpsRecord> results;
    std::optional<ThicknessTrend> thickness;
    std::map<std::string, std::vector<double>> constants;  // per bound row, over eps
    std::map<std::string, bool> stable;
    std::optional<bool> side_flux_decreasing;
};

struct RunOptions {
    bool resume = false;
    bool keep_fields = false;    // keep the minimizers in the record
    bool analyze_only = false;   // load every eps from snapshots, no minimization
    bool write_outputs = true;
};

/// Connection solve, continuation over the eps list with multistart at every
/// eps, analyses, then outputs in config.out: summary.json (deterministic),
/// timings.json, results.csv, bounds.csv, thickness.csv, decay_samples.csv,
/// plot.gp, connection.acf, eps_<i>.acf and checkpoint.json. Stage failures
/// are recorded in the record; outputs written so far are kept.
RunRecord run(const RunConfig& config, const RunOptions& options = {});

/// Deterministic JSON summary (no wall times).
std::string summary_json(const RunRecord& r);

struct SweepRecord {
    std::vector<std::string> job_ids;
    std::vector<RunRecord> jobs;
    std::size_t failed = 0;
};

/// One job per (l, h) entry (or the single configured domain), each with its
/// own eps continuation, run in parallel up to config.workers in
/// out/job_<id>. Aggregates go to out/sweep_summary.json,
/// classification.csv, bounds_all.csv and thickness_all.csv. Jobs whose
/// summary already reports ok are loaded instead of rerun under `resume`.
SweepRecord sweep(const RunConfig& config, const RunOptions& options = {});

/// Header and per-component statistics of a snapshot file.
std::string inspect_snapshot(const std::filesystem::path& path);

}  // namespace aclab
