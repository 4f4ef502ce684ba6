#include "fixtures.hpp"

#include "aclab/error.hpp"
#include "aclab/harness.hpp"
#include "aclab/snapshot.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <random>

using namespace aclab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("aclab_test_" + name);
    fs::remove_all(p);
    return p;
}

// Two coarse eps values on a small stadium; runs in a few seconds.
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
C0 = 2
[connection]
L = 12
n = 512
[solver]
seeds = 3
[run]
eps = 0.2, 0.125
seed = 3
)";

RunConfig small(const fs::path& out) {
    RunConfig c = parse_config(kSmall);
    c.out = out;
    return c;
}

}  // namespace

TEST_CASE("grid snapshot round trip is bit exact") {
    auto d = fixture::stadium(1.0, 2.0, 1.0 / 32.0);
    Field2D f = make_field(d, 1, 0.08, {0.0});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (double& v : f.values) v = n(rng);
    const fs::path dir = scratch("roundtrip");
    write_snapshot(dir / "f.acf", f);
    const std::string bytes = read_file(dir / "f.acf");
    const GridSnapshot s = decode_grid_snapshot(bytes);
    CHECK(encode_snapshot(s) == bytes);
    const Field2D g = field_from_snapshot(s, d);
    CHECK(g.values == f.values);
    CHECK(g.eps == f.eps);

    Profile1D p;
    p.m = 1;
    p.s0 = -3.0;
    p.ds = 0.125;
    for (int i = 0; i < 49; ++i) p.values.push_back(std::tanh(p.s0 + i * p.ds));
    write_snapshot(dir / "p.acf", p);
    CHECK(is_profile_snapshot(dir / "p.acf"));
    CHECK_FALSE(is_profile_snapshot(dir / "f.acf"));
    CHECK(profile_from_snapshot(read_profile_snapshot(dir / "p.acf")).values == p.values);
}

TEST_CASE("truncated snapshot names the missing byte count") {
    GridSnapshot s;
    s.nx = 3;
    s.ny = 2;
    s.dx = 0.5;
    s.eps = 0.1;
    s.values.assign(6, 1.0);
    std::string bytes = encode_snapshot(s);
    bytes.resize(bytes.size() - 12);
    try {
        decode_grid_snapshot(bytes);
        FAIL("no error");
    } catch (const UnsupportedVersionError&) {
        FAIL("wrong error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("12 bytes missing") != std::string::npos);
    }
}

TEST_CASE("later format revision and bad magic") {
    GridSnapshot s;
    s.nx = 1;
    s.ny = 1;
    s.dx = 1.0;
    s.values = {0.0};
    std::string bytes = encode_snapshot(s);
    bytes[3] = '2';
    CHECK_THROWS_AS(decode_grid_snapshot(bytes), UnsupportedVersionError);
    bytes[0] = 'X';
    try {
        decode_grid_snapshot(bytes);
        FAIL("no error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
    }
    CHECK_THROWS_AS(decode_profile_snapshot("ACF1\nprofile 4 1 0 x\n"), FormatError);
}

TEST_CASE("config validation happens before compute") {
    RunConfig c = small(scratch("invalid"));
    SUBCASE("dx coarser than eps/4") {
        c.eps = {0.1};
        CHECK_THROWS_AS(validate_config(c), ResolutionError);
    }
    SUBCASE("eps not decreasing") {
        c.eps = {0.125, 0.2};
        CHECK_THROWS_AS(validate_config(c), ConfigError);
    }
    SUBCASE("empty sweep") {
        c.eps = {0.2};
        CHECK_THROWS_AS(sweep(c), ConfigError);
    }
    CHECK_FALSE(fs::exists(c.out));
    CHECK_THROWS_AS(parse_config("[domain]\nshape = stadium\nlength = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nonsense]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\neps = 0.1, x\n"), ConfigError);
}

TEST_CASE("pipeline writes every artifact and is deterministic") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunRecord ra = run(small(a));
    REQUIRE(ra.status == "ok");
    REQUIRE(ra.results.size() == 2);
    for (const char* name : {"summary.json", "timings.json", "results.csv", "bounds.csv", "thickness.csv",
                             "decay_samples.csv", "plot.gp", "connection.acf", "connection.csv", "eps_0.acf",
                             "eps_1.acf", "checkpoint.json"})
        CHECK_MESSAGE(fs::exists(a / name), name);
    for (const auto& e : ra.results) {
        REQUIRE(e.layer);
        CHECK(e.layer->classification == LayerClass::BoundaryLayer);
        CHECK(e.energy.total > 0.0);
    }
    run(small(b));
    CHECK(read_file(a / "summary.json") == read_file(b / "summary.json"));
    CHECK(read_file(a / "eps_1.acf") == read_file(b / "eps_1.acf"));

    const auto s = nlohmann::json::parse(read_file(a / "summary.json"));
    CHECK(s.at("status") == "ok");
    CHECK(s.at("results").size() == 2);

    SUBCASE("resume reuses finished eps") {
        RunOptions o;
        o.resume = true;
        const RunRecord r = run(small(a), o);
        CHECK(r.status == "ok");
        CHECK(read_file(a / "summary.json") == read_file(b / "summary.json"));
    }
    SUBCASE("analyze reproduces the summary from snapshots") {
        RunOptions o;
        o.analyze_only = true;
        const RunRecord r = run(small(a), o);
        CHECK(r.status == "ok");
        REQUIRE(r.results.size() == 2);
        CHECK(r.results[1].energy.total == ra.results[1].energy.total);
    }
}

TEST_CASE("one failed sweep job leaves the others intact") {
    const fs::path out = scratch("sweep");
    RunConfig c = small(out);
    c.sweep_lh = {{1.0, 1.0}, {2.0, 1.0}};
    c.workers = 2;
    fs::create_directories(out);
    write_file(out / "job_l2_h1", "not a directory");
    const SweepRecord s = sweep(c);
    REQUIRE(s.jobs.size() == 2);
    CHECK(s.failed == 1);
    CHECK(s.jobs[0].status == "ok");
    CHECK(s.jobs[1].status == "failed");
    CHECK(fs::exists(out / "job_l1_h1" / "summary.json"));
    CHECK(read_file(out / "job_l2_h1") == "not a directory");
    const auto agg = nlohmann::json::parse(read_file(out / "sweep_summary.json"));
    CHECK(agg.at("failed") == 1);
    CHECK(agg.at("jobs")[0].at("status") == "ok");

    const RunRecord solo = run(small(scratch("sweep_solo")));
    CHECK(s.jobs[0].results.back().energy.total == solo.results.back().energy.total);
}

TEST_CASE("inspect reports header and statistics") {
    auto d = fixture::stadium(1.0, 2.0, 1.0 / 32.0);
    Field2D f = make_field(d, 1, 0.5, {0.25});
    const fs::path dir = scratch("inspect");
    write_snapshot(dir / "f.acf", f);
    const std::string text = inspect_snapshot(dir / "f.acf");
    CHECK(text.find("field nx=") != std::string::npos);
    CHECK(text.find("0.25") != std::string::npos);
}
