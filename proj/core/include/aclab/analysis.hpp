#pragma once

#include "aclab/energy.hpp"

#include <string>
#include <vector>

namespace aclab {

enum class LayerClass { BoundaryLayer, InternalLayer, Ambiguous };

std::string to_string(LayerClass c);

/// Half of the smallest distance between two wells.
double delta0(const Potential& p);

struct LayerReport {
    LayerClass classification = LayerClass::Ambiguous;
    double delta0 = 0.0;
    // Boundary-layer test: worst |u - a_-| on the band y in [h/3, 2h/3] and
    // the largest distance to the flat parts of a node within delta0 of a_+.
    double band_deviation = 0.0;
    double plus_reach = 0.0;
    // Internal-layer test: worst |u - a_+| on the central block of R and worst
    // |u - a_-| at distance >= h/4 outside R.
    double block_deviation = 0.0;
    double outside_deviation = 0.0;
};

/// Layer structure of a converged field on a stadium-type domain.
///
/// BoundaryLayer: |u - a_-| < delta0 on the band y in [h/3, 2h/3] and every
/// node within delta0 of a_+ lies within h/4 of the flat parts.
/// InternalLayer: |u - a_+| < delta0 on [h/4, l - h/4] x (0, h) and
/// |u - a_-| < delta0 at every node at distance >= h/4 from R.
/// Fields whose residual exceeds `residual_tol` are refused.
LayerReport classify_layer(const Field2D& f, const Potential& p, const Point& a_minus, const Point& a_plus,
                           double residual_tol = 1e-6);

struct DecayFit {
    double k = 0.0;       // decay rate in d / eps
    double K = 0.0;       // prefactor
    double offset = 0.0;  // distance where the fitted envelope enters the delta0 ball
    double r2 = 0.0;
    std::size_t samples = 0;
};

/// Least-squares fit log|u - a| = log K - k d / eps over interior nodes with
/// delta_floor < |u - a| < delta0, where d is the per-node distance to the
/// anchor. Nodes with d <= 0 or `exclude` set are skipped. Fewer than 8
/// nodes in the window is a DomainError.
DecayFit decay_fit(const Field2D& f, const Point& a, const std::vector<double>& distance, double delta0,
                   double delta_floor = 1e-6, const std::vector<std::uint8_t>* exclude = nullptr);

/// Column profile at abscissa x (linear in x between grid columns).
struct ColumnProbe {
    double thickness = 0.0;        // smallest y with |u - a_+| = delta0
    double sup_near = 0.0;         // sup_{0 <= y <= K eps} |u - a_+|
    double eps_uy = 0.0;           // eps |u_y(x, 0)|
};

ColumnProbe probe_column(const Field2D& f, const Point& a_plus, double x, double delta0, double K = 1.0);

struct ThicknessRow {
    double eps = 0.0;
    double thickness = 0.0;
    double thickness_over_eps = 0.0;
    double sup_near = 0.0;
    double eps_uy = 0.0;
};

struct ThicknessTrend {
    double x_hat = 0.0;
    double K = 1.0;
    std::vector<ThicknessRow> rows;        // in the order given (eps decreasing)
    bool thickness_over_eps_increasing = false;
    bool eps_uy_decreasing = false;
    bool sup_near_decreasing = false;
};

/// Needs at least three fields with decreasing eps and 0 < x_hat < l.
ThicknessTrend thickness_scaling(const std::vector<const Field2D*>& sweep, const Point& a_plus, double x_hat,
                                 double delta0, double K = 1.0);

struct LimitPartition {
    std::vector<int> nearest_well;   // per node, -1 outside the domain
    double l1_to_nearest = 0.0;      // int |u - nearest well|
    double l1_to_expected = 0.0;     // int |u - u0| for the predicted step map
};

/// Nearest-well projection and L1 distances. The predicted step map is a_-
/// everywhere for BoundaryLayer and a_+ on R, a_- elsewhere for
/// InternalLayer; Ambiguous compares with the nearest-well map.
LimitPartition limit_partition(const Field2D& f, const Potential& p, LayerClass expected, const Point& a_minus,
                               const Point& a_plus);

/// max over interior edges of |u_i - u_j| / dx, times eps.
double scaled_gradient_bound(const Field2D& f);

enum class BoundCase { BoundaryLayer, InternalLayer, Disc };

std::string to_string(BoundCase c);

struct BoundInputs {
    BoundCase which = BoundCase::BoundaryLayer;
    double eps = 0.0;
    double sigma = 0.0;        // heteroclinic action (or sigma_+ for the disc)
    double l = 0.0, h = 0.0;
    double perimeter = 0.0;    // disc case
    double total = 0.0;        // measured minimizer energy
    double directional = 0.0;  // y-only on R (boundary layer) or x-only on D (internal)
    double comparison = 0.0;   // energy of the best comparison field (0 = not available)
};

/// One bound: measured - leading = constant * scale (up to sign).
struct BoundRow {
    std::string name;
    double leading = 0.0;
    double measured = 0.0;
    double scale = 0.0;       // eps power of the correction
    double constant = 0.0;    // back-solved, positive means the correction is needed
    bool holds = true;        // only for rows with a hard inequality
};

std::vector<BoundRow> bound_report(const BoundInputs& in);

/// A back-solved constant is stable when no value at a finer eps exceeds
/// `factor` times the value at the coarsest eps. Nonpositive values mean the
/// one-sided bound already holds with a zero constant.
bool constants_stable(const std::vector<double>& constants, double factor = 3.0);

/// max / min of the values, all of which must be positive; infinity otherwise.
double spread(const std::vector<double>& values);

/// Hamiltonian rectangle used by the sweeps: (l/4, 3l/4) x (0, h/2).
HamiltonianFlux standard_hamiltonian(const Field2D& f, const Potential& p);

}  // namespace aclab
