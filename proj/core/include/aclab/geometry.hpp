#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aclab {

/// Uniform node grid x_i = x0 + i dx, y_j = y0 + j dx, stored row-major.
struct Grid {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double x(int i) const { return x0 + dx * i; }
    double y(int j) const { return y0 + dx * j; }
};

enum class NodeKind : std::uint8_t { Outside, Interior, Frozen };
enum class BoundaryTag : std::uint8_t { None, Plus, Minus };
enum class ShapeKind { Stadium, Disc, Generic };

/// Distance targets: the flat parts (0,l) x {0,h}, the whole boundary, the
/// rectangle R = (0,l) x (0,h), and the rest of the domain.
enum class Target { PlusBoundary, Boundary, R, OmegaMinusR };

std::string to_string(Target t);
Target target_from_string(const std::string& s);

/// Signed distance, negative inside.
using SignedDistance = std::function<double(double, double)>;

/// Gridded domain with an embedded boundary.
///
/// Nodes strictly inside are unknowns. Nodes within 1.5 dx of the domain but
/// not inside are frozen; they carry the boundary value at their nearest
/// boundary point (`proj_x`, `proj_y`). Quadrature weights are the inside
/// fraction of the dx x dx box around each node and each edge midpoint.
struct Domain2D {
    ShapeKind shape = ShapeKind::Generic;
    std::string name;
    double l = 0.0;  // flat part length (h2 domains)
    double h = 0.0;  // height (h2 domains)
    double r = 0.0;  // disc radius
    bool has_rectangle = false;
    Grid grid;
    SignedDistance sdf;

    std::vector<NodeKind> kind;
    std::vector<BoundaryTag> tag;
    std::vector<double> proj_x;
    std::vector<double> proj_y;
    std::vector<double> sd;             // signed distance at nodes
    std::vector<double> node_weight;    // inside fraction of the node box
    std::vector<double> xedge_weight;   // edge (i,j)-(i+1,j), indexed by (i,j)
    std::vector<double> yedge_weight;   // edge (i,j)-(i,j+1), indexed by (i,j)
    // Fraction of an interior-to-frozen edge that lies inside (1 elsewhere).
    // The edge weights above already carry the 1/cut^2 factor, so a plain
    // difference across a cut edge integrates the one-sided gradient
    // (g - u) / (cut dx) over the inside part.
    std::vector<double> xedge_cut;
    std::vector<double> yedge_cut;

    std::size_t interior_count() const;
    std::size_t frozen_count() const;

    /// Sum of node weights times dx^2.
    double area() const;
    /// Length of the zero level set of the nodal signed distance (marching squares).
    double perimeter() const;
    /// Length of the flat boundary part, 2l for h2 domains and 0 otherwise.
    double plus_boundary_length() const;
};

/// Rectangle with semicircular caps of radius h/2 on both ends. l/dx and
/// h/dx must be integers so that x = 0, l and y = 0, h lie on grid lines.
Domain2D build_stadium(double l, double h, double dx);

Domain2D build_disc(double r, double dx);

/// Domain from a signed-distance callback on the box [xmin,xmax] x [ymin,ymax].
/// With l, h > 0 the flat parts (0,l) x {0,h} are tagged and R is available.
Domain2D build_generic(const SignedDistance& sdf, double xmin, double xmax, double ymin, double ymax, double dx,
                       double l = 0.0, double h = 0.0, const std::string& name = "generic");

struct H2Report {
    bool passed = true;
    std::vector<std::string> failures;
};

/// Checks that every grid node of [0,l] x (0,h) is inside, the nodes of
/// [0,l] x {0,h} lie on the boundary and the flat parts carry the plus tag.
H2Report validate_h2(const Domain2D& d);

/// Per-node distance to a target. Exact for segments and rectangles; the
/// complement of R uses a Euclidean distance transform on the node mask.
std::vector<double> distance_field(const Domain2D& d, Target target);

/// Box weights restricted to a sub-region given by a point predicate.
struct RegionWeights {
    std::vector<double> node;
    std::vector<double> xedge;
    std::vector<double> yedge;
};

RegionWeights region_weights(const Domain2D& d, const std::function<bool(double, double)>& inside);

/// Squared Euclidean distance transform (lower envelope of parabolas) of a
/// binary mask, in units of grid steps squared. Empty mask gives +inf.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& mask, int nx, int ny);

}  // namespace aclab
