#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace aclab {

using Point = std::vector<double>;

/// Multi-well potential W: R^m -> [0, inf).
///
/// Implementations provide the value and the gradient; the Hessian defaults
/// to a centered difference of the gradient. The `value`/`gradient` members
/// do not validate their input so they can sit in the inner loops of the
/// grid kernels. Use eval_potential / eval_gradient for checked access.
class Potential {
public:
    virtual ~Potential() = default;

    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    virtual const std::vector<Point>& wells() const = 0;

    /// Radius beyond which W_u(u).u > 0.
    virtual double coercivity_radius() const = 0;

    virtual double value(std::span<const double> u) const = 0;
    virtual void gradient(std::span<const double> u, std::span<double> out) const = 0;

    /// Row-major m x m Hessian.
    virtual std::vector<double> hessian(std::span<const double> u) const;

    /// Largest |W''| eigenvalue sampled on the ball |u| <= radius.
    double curvature_bound(double radius) const;

    double min_well_separation() const;
};

using PotentialPtr = std::shared_ptr<const Potential>;

/// W(u) = (1 - u^2)^2 / 4, wells {-1, 1}.
class QuarticDoubleWell final : public Potential {
public:
    QuarticDoubleWell();
    std::string name() const override { return "quartic"; }
    int dimension() const override { return 1; }
    const std::vector<Point>& wells() const override { return wells_; }
    double coercivity_radius() const override { return 1.0; }
    double value(std::span<const double> u) const override;
    void gradient(std::span<const double> u, std::span<double> out) const override;
    std::vector<double> hessian(std::span<const double> u) const override;

private:
    std::vector<Point> wells_;
};

/// W(u) = |u - a_-|^2 |u - a_+|^2 with a_+- = (+-1, 0).
class PlanarTwoWell final : public Potential {
public:
    PlanarTwoWell();
    std::string name() const override { return "two_well"; }
    int dimension() const override { return 2; }
    const std::vector<Point>& wells() const override { return wells_; }
    double coercivity_radius() const override { return 1.0; }
    double value(std::span<const double> u) const override;
    void gradient(std::span<const double> u, std::span<double> out) const override;

private:
    std::vector<Point> wells_;
};

/// W(u) = prod_i |u - a_i|^2 over the three cube roots of unity.
class TripleWell final : public Potential {
public:
    TripleWell();
    std::string name() const override { return "triple_well"; }
    int dimension() const override { return 2; }
    const std::vector<Point>& wells() const override { return wells_; }
    double coercivity_radius() const override { return 1.0; }
    double value(std::span<const double> u) const override;
    void gradient(std::span<const double> u, std::span<double> out) const override;

private:
    std::vector<Point> wells_;
};

/// Compiled registry of named potentials. The zoo entries are registered on
/// first use; applications add their own with `add`.
class PotentialRegistry {
public:
    using Factory = std::function<PotentialPtr()>;

    static PotentialRegistry& instance();

    void add(const std::string& name, Factory factory);
    PotentialPtr make(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    PotentialRegistry();
    std::map<std::string, Factory> factories_;
};

PotentialPtr make_potential(const std::string& name);

/// Checked evaluation: throws DomainError on non-finite input.
double eval_potential(const Potential& p, std::span<const double> u);
Point eval_gradient(const Potential& p, std::span<const double> u);

/// Quadratic trapping constants around the wells:
///   |u - a| = d <= delta_W  =>  c_W^2 d^2 / 2 <= W(u) <= C_W^2 d^2 / 2
/// and W(u) >= c_W^2 d^2 / 2 whenever every well is at distance >= d.
struct WellConstants {
    double delta_W = 0.0;
    double c_W = 0.0;
    double C_W = 0.0;
};

inline constexpr int kSphereDirections = 1024;

/// Estimates c_W, C_W by sampling spheres of radius delta (and shells inside
/// it) around every well, then re-checks the exterior bound by sampling.
/// Throws DomainError for delta outside (0, separation/2) and
/// ConstantsError when the sampled bounds fail.
WellConstants well_constants(const Potential& p, double delta, std::uint64_t seed = 7);

/// 0.2 x minimal well separation.
double default_trapping_radius(const Potential& p);

struct HypothesisCheck {
    std::string name;
    bool passed = true;
    std::vector<Point> witnesses;  // points where the check failed
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_passed() const;
    const HypothesisCheck* find(const std::string& name) const;
};

/// Randomized plus structured sampling of the structural hypotheses on W:
/// wells are zeros with vanishing gradient, W > 0 away from the declared
/// wells (finite zero set), positive liminf at infinity, W_u(u).u > 0 for
/// |u| > M, and positive definite Hessians at the wells.
ValidationReport validate_hypotheses(const Potential& p, double M, std::size_t sample_budget,
                                     std::uint64_t seed = 11);

/// Eigenvalues (ascending) of the Hessian at well i.
std::vector<double> well_hessian_eigenvalues(const Potential& p, std::size_t well);

}  // namespace aclab
