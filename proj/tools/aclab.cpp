// aclab command-line front end.

#include "aclab/error.hpp"
#include "aclab/harness.hpp"
#include "aclab/snapshot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

using namespace aclab;

namespace {

enum Exit { kOk = 0, kValidation = 2, kSolver = 3, kIo = 4 };

int exit_for_kind(const std::string& kind) {
    if (kind == "config") return kValidation;
    if (kind == "io") return kIo;
    return kSolver;
}

int exit_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kValidation;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) return kIo;
    return kSolver;
}

struct Common {
    std::string config;
    std::string out;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool resume = false;
};

RunConfig load(const Common& o) {
    RunConfig c = load_config(o.config);
    if (const char* env = std::getenv("ACLAB_OUT"); env && *env) c.out = env;
    if (!o.out.empty()) c.out = o.out;
    if (o.workers > 0) c.workers = o.workers;
    if (o.seed_given) {
        c.seed = o.seed;
        if (!c.solver_seeds_given) c.solver.seeds = {o.seed};
    }
    return c;
}

void print_run(const RunRecord& r) {
    for (const auto& e : r.results) {
        std::printf("eps %-8g E %.8f", e.eps, e.energy.total);
        if (e.layer) std::printf("  %s", to_string(e.layer->classification).c_str());
        std::printf("  winner %s\n", e.winner.c_str());
    }
    if (r.status != "ok") std::fprintf(stderr, "failed in %s: %s\n", r.stage.c_str(), r.error.c_str());
}

int cmd_connect(const Common& o) {
    const RunConfig c = load(o);
    validate_config(c);
    const PotentialPtr p = make_potential(c.potential);
    const BoundaryData b = build_boundary(c, *p, c.eps.front());
    const bool half = c.boundary.mode == BoundaryMode::ConstZ;
    const ConnectionProfile cp = half ? solve_halfline(*p, b.z, c.connection.L, c.connection.n)
                                      : solve_connection(*p, b.a_minus, c.connection.L, c.connection.n);
    const std::filesystem::path out = c.out;
    write_snapshot(out / "connection.acf", cp.profile);
    write_profile_csv(out / "connection.csv", cp.profile);
    nlohmann::ordered_json j{{"half_line", cp.half_line},
                             {"action", cp.action},
                             {"start", cp.start},
                             {"end", cp.end},
                             {"k", cp.tail_fit.k},
                             {"K", cp.tail_fit.K},
                             {"equipartition_residual", cp.equipartition_residual},
                             {"tail_correction", cp.tail_correction},
                             {"iterations", cp.iterations}};
    write_file(out / "connection.json", j.dump(2) + "\n");
    std::printf("%s action %.10f  equipartition %.3e  k %.4f\n", half ? "half-line" : "full-line", cp.action,
                cp.equipartition_residual, cp.tail_fit.k);
    return kOk;
}

int cmd_run(const Common& o, bool analyze) {
    const RunConfig c = load(o);
    RunOptions opt;
    opt.resume = o.resume;
    opt.analyze_only = analyze;
    const RunRecord r = run(c, opt);
    print_run(r);
    return r.status == "ok" ? kOk : exit_for_kind(r.error_kind);
}

int cmd_sweep(const Common& o) {
    const RunConfig c = load(o);
    RunOptions opt;
    opt.resume = o.resume;
    const SweepRecord s = sweep(c, opt);
    int code = kOk;
    for (std::size_t i = 0; i < s.jobs.size(); ++i) {
        std::printf("[%s] %s\n", s.job_ids[i].c_str(), s.jobs[i].status.c_str());
        print_run(s.jobs[i]);
        if (s.jobs[i].status != "ok" && code == kOk) code = exit_for_kind(s.jobs[i].error_kind);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Allen-Cahn layer experiments"};
    app.require_subcommand(1);
    Common o;
    std::string snapshot;

    auto add_common = [&](CLI::App* sub, bool with_resume) {
        sub->add_option("--config", o.config, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (overrides ACLAB_OUT and run.out)");
        sub->add_option("--workers", o.workers, "parallel sweep jobs")->check(CLI::PositiveNumber);
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { o.seed = s, o.seed_given = true; }, "random seed");
        if (with_resume) sub->add_flag("--resume", o.resume, "reuse finished work in the output directory");
    };
    CLI::App* connect = app.add_subcommand("connect", "solve the 1D connection problem");
    add_common(connect, false);
    CLI::App* minimize = app.add_subcommand("minimize", "continuation and multistart over the eps list, then analyses");
    add_common(minimize, true);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "one run per (l, h) entry, in parallel");
    add_common(sweep_cmd, true);
    CLI::App* analyze = app.add_subcommand("analyze", "rerun the analyses on saved snapshots");
    add_common(analyze, false);
    CLI::App* inspect = app.add_subcommand("inspect", "print a snapshot header and statistics");
    inspect->add_option("snapshot", snapshot, "snapshot file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*connect) return cmd_connect(o);
        if (*minimize) return cmd_run(o, false);
        if (*sweep_cmd) return cmd_sweep(o);
        if (*analyze) return cmd_run(o, true);
        if (*inspect) {
            std::cout << inspect_snapshot(snapshot);
            return kOk;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "aclab: %s\n", e.what());
        return exit_for(e);
    }
    return kOk;
}
