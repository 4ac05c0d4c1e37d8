#pragma once

#include "trussrob/geometry.hpp"
#include "trussrob/linear_program.hpp"
#include "trussrob/loads.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace trussrob {

/// Raised when no cross-section vector carries every load of the set.
class RobustInfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MaterialLimits {
    double sigma_minus = -1e8;  ///< Pa, compression limit (< 0)
    double sigma_plus = 1e8;    ///< Pa, tension limit (> 0)
    double density = 2.7e3;     ///< kg/m^3

    void validate() const;
};

/// Everything the plastic-design LP needs: structure, equilibrium matrix,
/// stress limits, optional section caps and the load set (one vertex for a
/// single load, several for a multiple load case or a robust vertex set).
struct TrussProblem {
    GroundStructure structure;
    GeometryMatrix geometry;
    Vec lengths;
    MaterialLimits material;
    std::optional<Vec> s_max;
    VertexLoadSet loads;

    int num_bars() const { return structure.num_bars(); }
    int num_free_dofs() const { return structure.num_free_dofs(); }
    int num_loads() const { return static_cast<int>(loads.size()); }
};

TrussProblem make_truss_problem(GroundStructure gs, MaterialLimits material, VertexLoadSet loads,
                                std::optional<Vec> s_max = std::nullopt);

/// Same problem with a different load set.
TrussProblem with_loads(const TrussProblem& p, VertexLoadSet loads);

struct TrussDesign {
    Vec s;               ///< cross-sections
    std::vector<Vec> w;  ///< member forces per vertex load, tension positive
    double volume = 0.0; ///< l^T s
    double mass = 0.0;   ///< density * volume
    std::vector<int> active_bars;
    std::size_t iterations = 0;
    int scenario_rounds = 0;  ///< 0 unless scenario generation was used
    std::vector<int> active_loads;  ///< vertices that were in the final LP
};

/// Variables [s (n), w_1 .. w_V (n each)]; rows C w_j = f_j and
/// w_j - sigma_plus s <= 0, -w_j + sigma_minus s <= 0; 0 <= s <= s_max.
lp::LinearProgram build_topology_lp(const TrussProblem& p);

inline constexpr double kDefaultTopologyThreshold = 1e-6;

struct SolveOptions {
    lp::SimplexConfig simplex;
    bool scenario_generation = false;
    double active_threshold = kDefaultTopologyThreshold;
};

/// Solves the topology LP. Throws RobustInfeasibleError when infeasible and
/// std::logic_error on an unbounded LP (impossible with positive lengths).
///
/// With scenario generation the LP starts from a subset of the vertex loads
/// and adds the most violated remaining vertex per load case until every
/// vertex is carried.
TrussDesign solve_topology(const TrussProblem& p, const SolveOptions& options = {});

/// Indices k with s_k >= threshold * max(s). Empty (with a warning) when s is all zero.
std::vector<int> extract_topology(const TrussDesign& design, double threshold = kDefaultTopologyThreshold);

/// Loads scaled by alpha, stress limits by beta, s_max by alpha / beta.
TrussProblem scale_problem(const TrussProblem& p, double alpha, double beta);

/// Max over vertex loads of ||C w_j - f_j||_inf for a design.
std::vector<double> equilibrium_residuals(const TrussProblem& p, const TrussDesign& design);

}  // namespace trussrob
