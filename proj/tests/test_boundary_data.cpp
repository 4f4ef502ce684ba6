#include "doctest.h"

#include "aclab/boundary_data.hpp"
#include "aclab/energy.hpp"
#include "aclab/error.hpp"
#include "fixtures.hpp"

#include <cmath>

using namespace aclab;

TEST_CASE("step data on the flat parts and the caps") {
    const Domain2D d = build_stadium(1.0, 2.0, 1.0 / 64.0);
    const BoundaryData b = fixture::step(0.02);
    CHECK(eval_boundary(b, d, 0.5, 0.0) == Point{1.0});
    CHECK(eval_boundary(b, d, 0.5, 2.0) == Point{1.0});
    CHECK(eval_boundary(b, d, -1.0, 1.0) == Point{-1.0});
    CHECK(eval_boundary(b, d, 2.0, 1.0) == Point{-1.0});
    const Point mid = eval_boundary(b, d, b.C0 * b.eps / 2.0, 0.0);
    CHECK(mid[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(eval_boundary(b, d, 0.5, 1.0), DomainError);
}

TEST_CASE("constant data") {
    const Domain2D d = build_disc(1.0, 1.0 / 64.0);
    const BoundaryData b = fixture::constant(0.04, {0.0});
    CHECK(eval_boundary(b, d, 1.0, 0.0) == Point{0.0});
    const auto rep = validate_boundary(b, 0.0, 1.0 / 64.0);
    CHECK(rep.all_passed());
}

TEST_CASE("ramp validation") {
    BoundaryData b = fixture::step(0.02);
    const auto ok = validate_boundary(b, 1.0, 0.005);
    CHECK(ok.all_passed());
    // slope of the constructed ramp is |a+ - a-| / (C0 eps)
    const double dx = 1e-4;
    const double s = (flat_value(b, 1.0, 0.01 + dx)[0] - flat_value(b, 1.0, 0.01)[0]) / dx;
    CHECK(s == doctest::Approx(2.0 / (2.0 * 0.02)).epsilon(1e-6));

    b.C0 = 0.0;
    const auto bad = validate_boundary(b, 1.0, 0.005);
    CHECK_FALSE(bad.find("continuity")->passed);
    CHECK_FALSE(bad.find("ramp_slope")->passed);

    BoundaryData big = fixture::step(0.02);
    big.M = 0.5;
    CHECK_FALSE(validate_boundary(big, 1.0, 0.005).find("bounded_by_M")->passed);
}

TEST_CASE("ramp total variation along y = 0 is independent of eps") {
    for (double eps : {0.08, 0.04, 0.02}) {
        const BoundaryData b = fixture::step(eps);
        double tv = 0.0;
        const int n = 20000;
        Point prev = flat_value(b, 1.0, -1e-9);
        for (int i = 0; i <= n; ++i) {
            const Point cur = flat_value(b, 1.0, 1.0 * i / n);
            tv += std::abs(cur[0] - prev[0]);
            prev = cur;
        }
        tv += std::abs(flat_value(b, 1.0, 1.0 + 1e-9)[0] - prev[0]);
        CHECK(tv == doctest::Approx(4.0).epsilon(1e-9));
    }
}

TEST_CASE("imposed data matches eval_boundary at every frozen node") {
    auto d = fixture::stadium(1.0, 2.0, 1.0 / 32.0);
    const BoundaryData b = fixture::step(0.08);
    Field2D f = make_field(d, 1, 0.08, {0.3});
    impose_boundary(f, b);
    for (std::size_t k = 0; k < d->grid.size(); ++k) {
        if (d->kind[k] == NodeKind::Frozen)
            CHECK(f.values[k] == eval_boundary(b, *d, d->proj_x[k], d->proj_y[k])[0]);
        else if (d->kind[k] == NodeKind::Interior)
            CHECK(f.values[k] == 0.3);
    }
}

TEST_CASE("mode names") {
    CHECK(boundary_mode_from_string(to_string(BoundaryMode::StepH3)) == BoundaryMode::StepH3);
    CHECK(boundary_mode_from_string("const_z") == BoundaryMode::ConstZ);
    CHECK_THROWS_AS(boundary_mode_from_string("periodic"), ConfigError);
}
