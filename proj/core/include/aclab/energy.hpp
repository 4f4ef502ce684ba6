#pragma once

#include "aclab/boundary_data.hpp"
#include "aclab/connection1d.hpp"
#include "aclab/geometry.hpp"
#include "aclab/potential.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace aclab {

using DomainPtr = std::shared_ptr<const Domain2D>;

/// Vector field u: grid -> R^m, node-major (values[k*m + c]). Frozen nodes
/// of the domain hold the Dirichlet data.
struct Field2D {
    DomainPtr domain;
    int m = 1;
    double eps = 0.0;
    std::vector<double> values;

    std::span<double> at(std::size_t k) { return {values.data() + k * m, static_cast<std::size_t>(m)}; }
    std::span<const double> at(std::size_t k) const {
        return {values.data() + k * m, static_cast<std::size_t>(m)};
    }
};

Field2D make_field(DomainPtr d, int m, double eps, const Point& fill);

/// Writes the boundary data into every frozen node (evaluated at the
/// node's nearest boundary point). Interior and outside nodes are untouched.
void impose_boundary(Field2D& f, const BoundaryData& b);

/// Box weights of a named part of the domain: "omega", "R",
/// "omega_minus_R", "D_boundary" ([0,l] x ([0,h/3] u [2h/3,h])),
/// "D_internal" (omega minus (l/4,3l/4) x (0,h)) or a rectangle
/// "rect:x0,x1,y0,y1" intersected with the domain.
struct Subdomain {
    std::string id;
    RegionWeights weights;
};

Subdomain make_subdomain(const Domain2D& d, const std::string& id);

struct EnergyBreakdown {
    double total = 0.0;
    double kinetic_x = 0.0;       // sum over x-edges of w |du|^2, i.e. int |u_x|^2
    double kinetic_y = 0.0;
    double potential_part = 0.0;  // int W(u)
    std::map<std::string, double> subdomains;  // total energy restricted to each part
};

/// J^eps = eps/2 (kinetic_x + kinetic_y) + potential_part / eps.
EnergyBreakdown total_energy(const Field2D& f, const Potential& p, const std::vector<Subdomain>& parts = {});

/// Energy and its derivative with respect to every nodal value (zero rows
/// at frozen and outside nodes). `grad` is resized to values.size().
double energy_and_gradient(const Field2D& f, const Potential& p, std::vector<double>& grad);

/// Derivative of the energy divided by the cell area dx^2.
std::vector<double> first_variation(const Field2D& f, const Potential& p);

enum class Axis { X, Y };

struct DirectionalEnergy {
    double value = 0.0;         // int_sub eps/2 |d_axis u|^2 + W(u)/eps
    double kinetic_raw = 0.0;   // int_sub |d_axis u|^2
    double potential_part = 0.0;
};

DirectionalEnergy energy_directional(const Field2D& f, const Potential& p, Axis axis, const Subdomain& sub);

enum class ComparisonMode { NormalTube, BoundaryLayerABCD, InternalLayer };

std::string to_string(ComparisonMode m);
ComparisonMode comparison_mode_from_string(const std::string& s);

struct ComparisonOptions {
    double collar_n = 2.0;  // lambda = n |ln eps| in the internal construction
    double C2 = 1.0;        // linear collar width (in eps) of the boundary-layer profile
};

/// Explicit competitors:
///  NormalTube: the half-line profile (from z) laid along the inward normal,
///    u = ubar_+(d(x, boundary)/eps); `conn` must be a half-line profile.
///  BoundaryLayerABCD: a_+ to a_- layers of half-width eta = eps|ln eps|/(2k)
///    along the flat parts, triangle interpolation at the four ramps, a_-
///    elsewhere; `conn` is the full-line heteroclinic.
///  InternalLayer: a_+ in (0,l) x (0,h), a_- outside, with vertical
///    heteroclinic bands at x = 0 and x = l blended into the boundary data
///    over an eps collar.
Field2D build_comparison_field(DomainPtr d, const Potential& p, const BoundaryData& b, const ConnectionProfile& conn,
                               ComparisonMode mode, const ComparisonOptions& opt = {});

/// Terms of the Hamiltonian identity on the rectangle (x0,x1) x (0,ytop),
/// in the blown-up variables (xi, eta) = (x, y)/eps:
///   top + bottom = side_plus - side_minus
/// with top = int [ (|U_xi|^2 - |U_eta|^2)/2 + W ] on eta = ytop/eps,
/// bottom = 1/2 int |U_eta|^2 on eta = 0, side = int U_xi . U_eta.
struct HamiltonianFlux {
    double top = 0.0;
    double bottom = 0.0;
    double side_minus = 0.0;
    double side_plus = 0.0;
    double abs_side_minus = 0.0;  // int |U_xi . U_eta|
    double abs_side_plus = 0.0;
    double residual = 0.0;        // top + bottom - (side_plus - side_minus)
    double x0 = 0.0, x1 = 0.0, ytop = 0.0;  // rectangle snapped to grid lines
};

HamiltonianFlux hamiltonian_flux(const Field2D& f, const Potential& p, double x0, double x1, double ytop);

struct ModicaReport {
    std::vector<double> residual;  // max(0, eps^2 |grad u|^2 / 2 - W(u)) at interior nodes
    double max = 0.0;
    double violation_area = 0.0;   // area of nodes with residual > tol
    std::size_t argmax = 0;
    double tol = 0.0;
};

/// Pointwise Modica residual with centered differences. Nodes whose
/// difference stencil reaches a node with `exclude[k]` set are skipped.
/// Vector fields are refused unless `allow_vector` is set.
ModicaReport modica_residual(const Field2D& f, const Potential& p, double tol = 1e-3,
                             const std::vector<std::uint8_t>* exclude = nullptr, bool allow_vector = false);

}  // namespace aclab
