#pragma once

#include "aclab/energy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aclab {

enum class InitKind { ComparisonField, WellConstant, RandomPerturbed };
enum class Method { LBFGS, Flow };

std::string to_string(InitKind k);
InitKind init_kind_from_string(const std::string& s);
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct SolveSettings {
    double tau = 0.25;            // flow time step in units of eps^2
    int max_iterations = 200000;
    double tolerance = 1e-8;      // on max |first_variation| over interior nodes
    std::vector<double> schedule; // continuation eps values, strictly decreasing
    std::vector<std::uint64_t> seeds{1};
    double M = 0.0;               // projection radius, 0 = 1 + max well norm
    Method method = Method::LBFGS;
    int lbfgs_memory = 12;
    double perturbation = 0.5;    // amplitude of the random start
    std::vector<InitKind> inits{InitKind::ComparisonField, InitKind::RandomPerturbed};
    ComparisonOptions comparison;

    /// Throws ConfigError on an invalid combination.
    void validate() const;
};

struct FlowStep {
    double energy_before = 0.0;
    double energy_after = 0.0;
    double tau = 0.0;   // physical step actually taken
    int halvings = 0;
};

/// One semi-implicit step (M/tau + eps K + S/eps M) du = -grad E with the
/// diffusion implicit, W_u explicit and a stabilizing shift S; solved by
/// Jacobi-preconditioned CG. tau is halved until the energy does not increase.
/// `tau_phys` overrides settings.tau * eps^2 when positive.
FlowStep gradient_flow_step(Field2D& f, const Potential& p, const SolveSettings& s, double tau_phys = 0.0);

/// Radial clamp of every node to the ball |u| <= M. Returns the number of
/// nodes moved. M below the largest well norm is a configuration error.
std::size_t project_bound(Field2D& f, const Potential& p, double M);

struct StartRecord {
    std::string label;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::string error;
};

struct RelaxResult {
    Field2D field;
    StartRecord record;
    std::vector<double> energy_history;
};

/// Descends from `init` with the configured method until the tolerance or
/// the iteration cap. Frozen nodes keep their exact bits.
RelaxResult relax(Field2D init, const Potential& p, const SolveSettings& s, const std::string& label = "start");

/// Profiles used to build comparison fields; missing ones are solved on demand.
struct Connections {
    std::optional<ConnectionProfile> full;  // heteroclinic a_- -> a_+
    std::optional<ConnectionProfile> half;  // half-line profile from z
};

struct MinimizeResult {
    Field2D field;                       // lowest-energy converged start
    std::vector<StartRecord> starts;
    std::vector<Field2D> relaxed;        // one per start, same order
    std::size_t winner = 0;
    std::vector<double> energy_history;  // of the winner
};

/// Multistart minimization. Starts: comparison fields of every applicable
/// type, the a_- constant, a seeded random perturbation of a_- (one per
/// seed) and `warm` when given. Throws SolverError when no start converges.
MinimizeResult minimize(DomainPtr d, const Potential& p, const BoundaryData& b, const SolveSettings& s,
                        Connections& conns, const Field2D* warm = nullptr);

/// Bilinear transfer of interior values onto another grid, boundary data
/// re-imposed. Used to warm-start the next eps of a continuation.
Field2D transfer_field(const Field2D& from, DomainPtr to, double eps, const BoundaryData& b);

/// max |first_variation| over interior nodes.
double residual_norm(const Field2D& f, const Potential& p);

}  // namespace aclab
