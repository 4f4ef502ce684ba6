#include "doctest.h"

#include "aclab/analysis.hpp"
#include "aclab/error.hpp"
#include "aclab/minimize.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace aclab;

namespace {

Field2D envelope(DomainPtr d, double eps, const std::vector<double>& dist, double k, double K, double a) {
    Field2D f = make_field(d, 1, eps, {a});
    for (std::size_t n = 0; n < d->grid.size(); ++n)
        if (std::isfinite(dist[n])) f.values[n] = a + K * std::exp(-k * dist[n] / eps);
    return f;
}

// Column profile 1 - 2(1 - e^{-y/w}) near y = 0 for every x; its delta0 = 1
// level sits at y = w ln 2 and eps u_y(0) = -2 eps / w.
Field2D column_field(DomainPtr d, double eps, double w) {
    Field2D f = make_field(d, 1, eps, {-1.0});
    const Grid& g = d->grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.values[g.index(i, j)] = 1.0 - 2.0 * (1.0 - std::exp(-std::max(g.y(j), 0.0) / w));
    return f;
}

}  // namespace

TEST_CASE("well separation") {
    CHECK(delta0(*make_potential("quartic")) == doctest::Approx(1.0));
    CHECK(delta0(*make_potential("two_well")) > 0.0);
}

TEST_CASE("synthetic exponential decay is recovered") {
    auto d = std::make_shared<const Domain2D>(build_disc(1.0, 1.0 / 64.0));
    const auto dist = distance_field(*d, Target::Boundary);
    const double eps = 0.05;
    const Field2D f = envelope(d, eps, dist, 1.2, 0.8, -1.0);
    const DecayFit fit = decay_fit(f, {-1.0}, dist, 1.0);
    CHECK(fit.k == doctest::Approx(1.2).epsilon(1e-3));
    CHECK(fit.K == doctest::Approx(0.8).epsilon(1e-3));
    CHECK(fit.r2 > 0.999999);
    CHECK(fit.samples >= 8);
    CHECK(fit.offset == 0.0);
}

TEST_CASE("decay fit depends on d / eps only") {
    auto d = std::make_shared<const Domain2D>(build_disc(1.0, 1.0 / 64.0));
    const auto dist = distance_field(*d, Target::Boundary);
    std::vector<double> doubled = dist;
    for (double& v : doubled) v *= 2.0;
    const Field2D f1 = envelope(d, 0.05, dist, 1.4, 0.5, 1.0);
    Field2D f2 = f1;
    f2.eps = 0.1;
    const DecayFit a = decay_fit(f1, {1.0}, dist, 1.0);
    const DecayFit b = decay_fit(f2, {1.0}, doubled, 1.0);
    CHECK(a.k == doctest::Approx(b.k).epsilon(1e-12));
    CHECK(a.K == doctest::Approx(b.K).epsilon(1e-12));
}

TEST_CASE("decay fit on a constant field is refused") {
    auto d = std::make_shared<const Domain2D>(build_disc(1.0, 1.0 / 32.0));
    const auto dist = distance_field(*d, Target::Boundary);
    const Field2D f = make_field(d, 1, 0.05, {-1.0});
    CHECK_THROWS_AS(decay_fit(f, {-1.0}, dist, 1.0), DomainError);
}

TEST_CASE("classification refuses an unconverged field") {
    auto p = make_potential("quartic");
    auto d = fixture::stadium(1.0, 2.0, 0.02);
    Field2D f = make_field(d, 1, 0.08, {0.0});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : f.values) v = u(rng);
    impose_boundary(f, fixture::step(0.08));
    CHECK_THROWS_AS(classify_layer(f, *p, {-1.0}, {1.0}), DomainError);
}

TEST_CASE("classification is stable under grid refinement") {
    auto p = make_potential("quartic");
    const double eps = 0.05;
    for (auto [l, h] : {std::pair{2.0, 1.0}, std::pair{0.5, 1.0}}) {
        LayerClass first{};
        bool have = false;
        for (double dx : {eps / 4.0, eps / 8.0}) {
            Connections conns;
            SolveSettings s;
            s.inits = {InitKind::ComparisonField};
            const MinimizeResult r = minimize(fixture::stadium(l, h, dx), *p, fixture::step(eps), s, conns);
            const LayerClass c = classify_layer(r.field, *p, {-1.0}, {1.0}).classification;
            CHECK(c != LayerClass::Ambiguous);
            if (have) CHECK(c == first);
            first = c;
            have = true;
        }
    }
}

TEST_CASE("step maps are at distance zero from themselves") {
    auto p = make_potential("quartic");
    auto d = fixture::stadium(2.0, 1.0, 1.0 / 32.0);
    const Field2D minus = make_field(d, 1, 0.08, {-1.0});
    const LimitPartition bl = limit_partition(minus, *p, LayerClass::BoundaryLayer, {-1.0}, {1.0});
    CHECK(bl.l1_to_expected == 0.0);
    CHECK(bl.l1_to_nearest == 0.0);

    Field2D in = minus;
    const Grid& g = d->grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.x(i) > 0.0 && g.x(i) < d->l && g.y(j) > 0.0 && g.y(j) < d->h) in.values[g.index(i, j)] = 1.0;
    const LimitPartition il = limit_partition(in, *p, LayerClass::InternalLayer, {-1.0}, {1.0});
    CHECK(il.l1_to_expected == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(il.l1_to_nearest == 0.0);
    const LimitPartition wrong = limit_partition(in, *p, LayerClass::BoundaryLayer, {-1.0}, {1.0});
    CHECK(wrong.l1_to_expected > 1.0);
}

TEST_CASE("column probe on a synthetic boundary layer") {
    const double eps = 0.04;
    auto d = fixture::stadium(1.0, 2.0, eps / 4.0);
    const double w = 0.1;
    const Field2D f = column_field(d, eps, w);
    const ColumnProbe c = probe_column(f, {1.0}, 0.5, 1.0);
    CHECK(c.thickness == doctest::Approx(w * std::log(2.0)).epsilon(0.01));
    CHECK(c.eps_uy == doctest::Approx(2.0 * eps / w).epsilon(0.01));
    CHECK(c.sup_near == doctest::Approx(2.0 * (1.0 - std::exp(-eps / w))).epsilon(0.01));
}

TEST_CASE("thickness trend on a square-root layer width") {
    std::vector<Field2D> fields;
    for (double eps : {0.08, 0.04, 0.02}) fields.push_back(column_field(fixture::stadium(1.0, 2.0, eps / 4.0), eps, std::sqrt(eps)));
    std::vector<const Field2D*> ptrs;
    for (const auto& f : fields) ptrs.push_back(&f);
    const ThicknessTrend t = thickness_scaling(ptrs, {1.0}, 0.5, 1.0);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.thickness_over_eps_increasing);
    CHECK(t.eps_uy_decreasing);
    CHECK(t.sup_near_decreasing);
    for (const auto& r : t.rows) CHECK(r.thickness_over_eps == doctest::Approx(std::log(2.0) / std::sqrt(r.eps)).epsilon(0.01));
    ptrs.pop_back();
    CHECK_THROWS_AS(thickness_scaling(ptrs, {1.0}, 0.5, 1.0), DomainError);
}

TEST_CASE("bound rows follow their definitions") {
    const double sigma = 2.0 * std::sqrt(2.0) / 3.0, eps = 0.04, le = std::log(25.0);
    BoundInputs in;
    in.eps = eps;
    in.sigma = sigma;
    in.l = 1.0;
    in.h = 2.0;
    in.total = 1.9;
    in.directional = 1.8;
    in.comparison = 2.2;
    in.which = BoundCase::BoundaryLayer;
    const auto bl = bound_report(in);
    REQUIRE(bl.size() == 4);
    CHECK(bl[0].name == "upper_total");
    CHECK(bl[0].constant == doctest::Approx((1.9 - 2 * sigma) / (eps * le * le * le)));
    CHECK(bl[0].holds);
    CHECK(bl[2].name == "lower_directional");
    CHECK(bl[2].constant == doctest::Approx((2 * sigma - 1.8) / std::sqrt(eps)));
    CHECK(bl[3].constant == doctest::Approx((2 * sigma - 1.8) / eps));

    in.which = BoundCase::InternalLayer;
    in.l = 2.0;
    in.h = 1.0;
    const auto il = bound_report(in);
    CHECK(il[0].leading == doctest::Approx(2 * sigma * 1.0));
    CHECK(il[1].constant == doctest::Approx((2 * sigma - 1.9) / std::sqrt(eps)));
    CHECK(il.back().name == "leading_2sigma_l");

    in.which = BoundCase::Disc;
    in.sigma = std::sqrt(2.0) / 3.0;
    in.perimeter = 2.0 * 3.141592653589793;
    const auto disc = bound_report(in);
    const double lead = in.sigma * in.perimeter;
    CHECK(disc[1].constant == doctest::Approx((lead - 1.9) / (lead * std::cbrt(eps))));
    in.perimeter = 0.0;
    CHECK_THROWS_AS(bound_report(in), DomainError);

    in.total = 2.5;
    in.which = BoundCase::BoundaryLayer;
    CHECK_FALSE(bound_report(in)[0].holds);
}

TEST_CASE("constant stability and spread") {
    CHECK(constants_stable({1.0, 2.0, 2.9}));
    CHECK_FALSE(constants_stable({1.0, 3.5}));
    CHECK(constants_stable({-1.0, -2.0, -0.5}));
    CHECK_FALSE(constants_stable({-1.0, 0.1}));
    CHECK(spread({1.0, 2.0, 4.0}) == 4.0);
    CHECK(std::isinf(spread({1.0, 0.0})));
}

TEST_CASE("scaled gradient bound of a linear field") {
    auto d = fixture::stadium(1.0, 2.0, 1.0 / 32.0);
    Field2D f = make_field(d, 1, 0.05, {0.0});
    const Grid& g = d->grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.values[g.index(i, j)] = 3.0 * g.x(i);
    CHECK(scaled_gradient_bound(f) == doctest::Approx(0.15));
}

TEST_CASE("layer and bound case names") {
    CHECK(to_string(LayerClass::BoundaryLayer) == "BoundaryLayer");
    CHECK(to_string(LayerClass::InternalLayer) == "InternalLayer");
    CHECK(to_string(BoundCase::Disc) == "disc");
}
