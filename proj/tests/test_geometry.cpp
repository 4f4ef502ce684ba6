#include "doctest.h"

#include "aclab/error.hpp"
#include "aclab/geometry.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <numbers>

using namespace aclab;
using fixture::node_at;

TEST_CASE("stadium area and flat boundary length") {
    const Domain2D d = build_stadium(2.0, 1.0, 1.0 / 64.0);
    const double area = 2.0 + std::numbers::pi / 4.0;
    const double perimeter = 4.0 + std::numbers::pi;
    CHECK(std::abs(d.area() - area) < 2.0 * d.grid.dx * perimeter);
    CHECK(d.plus_boundary_length() == doctest::Approx(4.0));
    CHECK(std::abs(d.perimeter() - perimeter) < 2.0 * d.grid.dx * perimeter);
    CHECK(d.has_rectangle);
}

TEST_CASE("h2 check on a narrow stadium") {
    const Domain2D d = build_stadium(0.5, 1.0, 1.0 / 64.0);
    const H2Report rep = validate_h2(d);
    CHECK(rep.passed);
    CHECK(rep.failures.empty());
}

TEST_CASE("h2 check fails for a disc treated as a rectangle domain") {
    const Domain2D d =
        build_generic([](double x, double y) { return std::hypot(x - 0.5, y - 0.5) - 0.5; }, -0.1, 1.1, -0.1, 1.1,
                      1.0 / 64.0, 1.0, 1.0, "round");
    CHECK_FALSE(validate_h2(d).passed);
}

TEST_CASE("disc area and perimeter") {
    const Domain2D d = build_disc(1.0, 1.0 / 128.0);
    CHECK(std::abs(d.area() - std::numbers::pi) < 0.05);
    CHECK(std::abs(d.perimeter() - 2.0 * std::numbers::pi) < 0.05);
    CHECK(d.plus_boundary_length() == 0.0);
    CHECK_THROWS_AS(build_disc(0.0, 1.0 / 128.0), DomainError);
    CHECK_THROWS_AS(build_disc(1.0, 0.1), ResolutionError);
}

TEST_CASE("stadium parameters are checked") {
    CHECK_THROWS_AS(build_stadium(0.0, 1.0, 1.0 / 64.0), DomainError);
    CHECK_THROWS_AS(build_stadium(1.0, 1.0, 0.1), ResolutionError);
    CHECK_THROWS_AS(build_stadium(1.0, 1.0, 0.03), ResolutionError);
}

TEST_CASE("area and perimeter errors are first order in dx") {
    const double area = 2.0 + std::numbers::pi / 4.0;
    const double perimeter = 4.0 + std::numbers::pi;
    for (double dx : {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0}) {
        const Domain2D d = build_stadium(2.0, 1.0, dx);
        CHECK(std::abs(d.area() - area) < dx * perimeter);
        CHECK(std::abs(d.perimeter() - perimeter) < dx * perimeter);
    }
    for (double dx : {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0}) {
        const Domain2D d = build_disc(1.0, dx);
        CHECK(std::abs(d.area() - std::numbers::pi) < 2.0 * dx * 2.0 * std::numbers::pi);
        CHECK(std::abs(d.perimeter() - 2.0 * std::numbers::pi) < 2.0 * dx * 2.0 * std::numbers::pi);
    }
}

TEST_CASE("distance to the flat boundary parts") {
    const Domain2D d = build_stadium(2.0, 1.0, 1.0 / 64.0);
    const auto dist = distance_field(d, Target::PlusBoundary);
    CHECK(dist[node_at(d, 1.0, 0.5)] == doctest::Approx(0.5));
    CHECK(dist[node_at(d, 1.0, 0.0)] == doctest::Approx(0.0));
    CHECK(dist[node_at(d, 1.0, 0.25)] == doctest::Approx(0.25));
}

TEST_CASE("distance from the disc center to its boundary") {
    const Domain2D d = build_disc(1.0, 1.0 / 64.0);
    const auto dist = distance_field(d, Target::Boundary);
    CHECK(dist[node_at(d, 0.0, 0.0)] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(distance_field(d, Target::R), DomainError);
}

TEST_CASE("distance fields are 1-Lipschitz on the grid") {
    const Domain2D d = build_stadium(1.0, 2.0, 1.0 / 32.0);
    const Grid& g = d.grid;
    for (Target t : {Target::PlusBoundary, Target::Boundary, Target::R, Target::OmegaMinusR}) {
        const auto dist = distance_field(d, t);
        double worst = 0.0;
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                for (std::size_t n : {g.index(i + 1, j), g.index(i, j + 1)}) {
                    if (!std::isfinite(dist[k]) || !std::isfinite(dist[n])) continue;
                    worst = std::max(worst, std::abs(dist[k] - dist[n]) - g.dx);
                }
            }
        CHECK_MESSAGE(worst <= g.dx, to_string(t));
    }
}

TEST_CASE("boundary tags") {
    const Domain2D d = build_stadium(1.0, 2.0, 1.0 / 32.0);
    std::size_t plus = 0;
    for (std::size_t k = 0; k < d.grid.size(); ++k) {
        if (d.kind[k] == NodeKind::Frozen) {
            CHECK(d.tag[k] != BoundaryTag::None);
            CHECK(std::abs(d.sdf(d.proj_x[k], d.proj_y[k])) < 1e-9);
        } else {
            CHECK(d.tag[k] == BoundaryTag::None);
        }
        if (d.tag[k] == BoundaryTag::Plus) {
            ++plus;
            const bool on_flat = std::abs(d.proj_y[k]) < 1e-12 || std::abs(d.proj_y[k] - d.h) < 1e-12;
            CHECK(on_flat);
            CHECK(d.proj_x[k] > -d.grid.dx);
            CHECK(d.proj_x[k] < d.l + d.grid.dx);
        }
    }
    CHECK(plus > 0);
}

TEST_CASE("target names round trip") {
    for (Target t : {Target::PlusBoundary, Target::Boundary, Target::R, Target::OmegaMinusR})
        CHECK(target_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(target_from_string("nowhere"), DomainError);
}

TEST_CASE("squared distance transform") {
    std::vector<std::uint8_t> mask(5 * 4, 0);
    mask[1 * 5 + 2] = 1;
    const auto d2 = squared_edt(mask, 5, 4);
    CHECK(d2[1 * 5 + 2] == 0.0);
    CHECK(d2[1 * 5 + 4] == 4.0);
    CHECK(d2[3 * 5 + 0] == 8.0);
    const auto none = squared_edt(std::vector<std::uint8_t>(6, 0), 3, 2);
    CHECK(std::isinf(none[0]));
}

TEST_CASE("region weights inherit the box weights") {
    const Domain2D d = build_stadium(1.0, 2.0, 1.0 / 32.0);
    const RegionWeights all = region_weights(d, [](double, double) { return true; });
    double s = 0.0;
    for (double w : all.node) s += w;
    CHECK(s * d.grid.dx * d.grid.dx == doctest::Approx(d.area()).epsilon(1e-12));
    const RegionWeights rect = region_weights(d, [&](double x, double y) { return x > 0 && x < d.l && y > 0 && y < d.h; });
    s = 0.0;
    for (double w : rect.node) s += w;
    CHECK(s * d.grid.dx * d.grid.dx == doctest::Approx(d.l * d.h).epsilon(0.05));
}
