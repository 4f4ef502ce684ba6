#include "doctest.h"

#include "aclab/error.hpp"
#include "aclab/potential.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace aclab;

namespace {

// sin^2 has infinitely many zeros; only two are declared.
class SinSquared final : public Potential {
public:
    SinSquared() : wells_{{0.0}, {M_PI}} {}
    std::string name() const override { return "sin2"; }
    int dimension() const override { return 1; }
    const std::vector<Point>& wells() const override { return wells_; }
    double coercivity_radius() const override { return 2.0; }
    double value(std::span<const double> u) const override { return std::sin(u[0]) * std::sin(u[0]); }
    void gradient(std::span<const double> u, std::span<double> out) const override {
        out[0] = std::sin(2.0 * u[0]);
    }

private:
    std::vector<Point> wells_;
};

double fd_derivative(const Potential& p, Point u, int k, double h) {
    Point a = u, b = u;
    a[k] += h;
    b[k] -= h;
    return (eval_potential(p, a) - eval_potential(p, b)) / (2.0 * h);
}

}  // namespace

TEST_CASE("quartic values") {
    auto p = make_potential("quartic");
    CHECK(eval_potential(*p, Point{1.0}) == 0.0);
    CHECK(eval_potential(*p, Point{-1.0}) == 0.0);
    CHECK(eval_potential(*p, Point{0.0}) == doctest::Approx(0.25));
    CHECK(eval_gradient(*p, Point{1.0})[0] == 0.0);
    CHECK(eval_gradient(*p, Point{0.0})[0] == 0.0);
    const double fd = fd_derivative(*p, {0.5}, 0, 1e-5);
    CHECK(fd == doctest::Approx(-0.375).epsilon(1e-9));
    CHECK(eval_gradient(*p, Point{0.5})[0] == doctest::Approx(fd).epsilon(1e-9));
}

TEST_CASE("two-well value at the origin") {
    auto p = make_potential("two_well");
    CHECK(eval_potential(*p, Point{0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(eval_potential(*p, Point{1.0, 0.0}) == 0.0);
}

TEST_CASE("non-finite input is rejected") {
    auto p = make_potential("quartic");
    CHECK_THROWS_AS(eval_potential(*p, Point{std::nan("")}), DomainError);
    CHECK_THROWS_AS(eval_gradient(*p, Point{std::numeric_limits<double>::infinity()}), DomainError);
    CHECK_THROWS_AS(make_potential("nope"), ConfigError);
}

TEST_CASE("gradients match centered differences on the zoo") {
    std::mt19937_64 rng(3);
    for (const auto& name : PotentialRegistry::instance().names()) {
        auto p = make_potential(name);
        const double M = p->coercivity_radius() + 1.0;
        std::uniform_real_distribution<double> U(-M, M);
        int checked = 0;
        while (checked < 100) {
            Point u(static_cast<std::size_t>(p->dimension()));
            for (auto& x : u) x = U(rng);
            double r = 0.0;
            for (double x : u) r += x * x;
            if (std::sqrt(r) > M) continue;
            const Point g = eval_gradient(*p, u);
            double num = 0.0, den = 0.0;
            for (int k = 0; k < p->dimension(); ++k) {
                const double fd = fd_derivative(*p, u, k, 1e-5);
                num += (fd - g[k]) * (fd - g[k]);
                den += g[k] * g[k];
            }
            CHECK(std::sqrt(num) <= 1e-6 * std::max(1.0, std::sqrt(den)));
            ++checked;
        }
    }
}

TEST_CASE("quartic well constants at delta = 0.1") {
    auto p = make_potential("quartic");
    // 2W/delta^2 on {0.9, 1.1}: (2 -+ delta)^2 / 2.
    const auto wc = well_constants(*p, 0.1);
    CHECK(wc.delta_W == 0.1);
    CHECK(wc.c_W * wc.c_W == doctest::Approx(1.805).epsilon(1e-9));
    CHECK(wc.C_W * wc.C_W == doctest::Approx(2.205).epsilon(1e-9));
    const auto small = well_constants(*p, 1e-4);
    CHECK(small.c_W * small.c_W == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(small.C_W * small.C_W == doctest::Approx(2.0).epsilon(1e-3));
    CHECK_THROWS_AS(well_constants(*p, 0.0), DomainError);
    CHECK_THROWS_AS(well_constants(*p, 1.5), DomainError);
}

TEST_CASE("well constants bracket W on the sphere") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.0, 1.0);
    for (const auto& name : PotentialRegistry::instance().names()) {
        auto p = make_potential(name);
        const double delta = default_trapping_radius(*p);
        const auto wc = well_constants(*p, delta);
        CHECK(wc.c_W <= wc.C_W);
        for (const auto& a : p->wells()) {
            for (int s = 0; s < 10000 / static_cast<int>(p->wells().size()); ++s) {
                Point u = a;
                if (p->dimension() == 1) {
                    u[0] += (s % 2 ? 1.0 : -1.0) * delta;
                } else {
                    double x = N(rng), y = N(rng);
                    const double r = std::hypot(x, y);
                    u[0] += delta * x / r;
                    u[1] += delta * y / r;
                }
                const double w = eval_potential(*p, u);
                CHECK(w >= 0.5 * wc.c_W * wc.c_W * delta * delta * (1.0 - 1e-3));
                CHECK(w <= 0.5 * wc.C_W * wc.C_W * delta * delta * (1.0 + 1e-3));
            }
        }
    }
}

TEST_CASE("hypothesis validation") {
    auto q = make_potential("quartic");
    CHECK(validate_hypotheses(*q, 2.0, 5000).all_passed());
    auto t = make_potential("two_well");
    CHECK(validate_hypotheses(*t, 3.0, 5000).all_passed());
    auto tw = make_potential("triple_well");
    CHECK(validate_hypotheses(*tw, 3.0, 5000).all_passed());
    SinSquared s;
    const auto rep = validate_hypotheses(s, 2.0, 5000);
    CHECK_FALSE(rep.all_passed());
    REQUIRE(rep.find("finite_zero_set") != nullptr);
    CHECK_FALSE(rep.find("finite_zero_set")->passed);
    CHECK_FALSE(rep.find("finite_zero_set")->witnesses.empty());
}

TEST_CASE("quartic is nonnegative and vanishes only at its wells") {
    auto p = make_potential("quartic");
    for (int i = -4000; i <= 4000; ++i) {
        const double u = i * 1e-3;
        const double w = eval_potential(*p, Point{u});
        CHECK(w >= 0.0);
        if (w == 0.0) CHECK(std::abs(std::abs(u) - 1.0) < 1e-12);
    }
}

TEST_CASE("well Hessians are positive definite") {
    for (const auto& name : PotentialRegistry::instance().names()) {
        auto p = make_potential(name);
        for (std::size_t i = 0; i < p->wells().size(); ++i)
            for (double ev : well_hessian_eigenvalues(*p, i)) CHECK(ev > 0.0);
    }
    auto q = make_potential("quartic");
    CHECK(well_hessian_eigenvalues(*q, 0)[0] == doctest::Approx(2.0));
}
