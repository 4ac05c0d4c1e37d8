#pragma once

#include "trussrob/loads.hpp"
#include "trussrob/truss_opt.hpp"

#include <cstdint>
#include <vector>

namespace trussrob {

struct LoadCheck {
    double violation = 0.0;
    Vec w;  ///< member forces attaining the minimum defect
};

/// Member forces within the stress limits of `s` that best balance `f`.
LoadCheck solve_member_forces(const Vec& s, const Vec& f, const TrussProblem& p,
                              const lp::SimplexConfig& config = {});

/// Minimum total equilibrium defect sum_i |C w - f|_i over member forces
/// restricted to sigma_minus s <= w <= sigma_plus s. Zero (up to rounding)
/// exactly when the sections s can carry f.
double check_feasibility_for_load(const Vec& s, const Vec& f, const TrussProblem& p,
                                  const lp::SimplexConfig& config = {});

/// Loads inside the box. The first half draws each interval coordinate
/// uniformly and independently, the second half random convex combinations
/// of the box corners. Deterministic for a fixed seed.
std::vector<Vec> sample_box_loads(const GroundStructure& gs, const PerturbationBox& box, const LoadCase& lc,
                                  int count, std::uint64_t seed);

/// Random convex-combination weights of length k (uniform on the simplex).
std::vector<double> sample_simplex_weights(std::size_t k, std::uint64_t seed);

/// Member forces for a convex combination of vertex loads, built from the
/// vertex member forces with the same weights.
Vec reconstruct_member_forces(const std::vector<Vec>& vertex_forces, const std::vector<double>& alpha);

struct SampleFailure {
    Vec load;
    double violation = 0.0;
};

struct FeasibilityReport {
    int samples_tested = 0;
    std::vector<SampleFailure> failures;  ///< sorted by decreasing violation
    double max_violation = 0.0;           ///< N
    double max_relative_violation = 0.0;  ///< violation / max(1, |f|)
    bool pass = true;
};

/// One load case with its box. `scale` multiplies every load of the box
/// (the factor applied when vertices were rescaled to the nominal maximum).
struct UncertainLoad {
    LoadCase load_case;
    PerturbationBox box;
    double scale = 1.0;
};

inline constexpr int kDefaultSamplesPerBox = 200;
inline constexpr double kDefaultVerifyRelTol = 1e-7;

/// Samples every box and checks each load against the fixed design.
/// A sample fails when its defect exceeds rel_tol * max(1, |f|).
FeasibilityReport verify_robust_design(const TrussDesign& design, const std::vector<UncertainLoad>& boxes,
                                       const TrussProblem& p, int samples_per_box = kDefaultSamplesPerBox,
                                       std::uint64_t seed = 0, double rel_tol = kDefaultVerifyRelTol);

}  // namespace trussrob
