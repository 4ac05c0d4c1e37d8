#include "trussrob/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace trussrob {

LoadCheck solve_member_forces(const Vec& s, const Vec& f, const TrussProblem& p, const lp::SimplexConfig& config) {
    const int n = p.num_bars();
    const int m = p.num_free_dofs();
    if (s.size() != n || f.size() != m) {
        throw std::invalid_argument("solve_member_forces: dimension mismatch");
    }

    lp::LinearProgram lp;
    for (int k = 0; k < n; ++k) {
        const double sk = std::max(s[k], 0.0);
        lp.add_variable(0.0, p.material.sigma_minus * sk, p.material.sigma_plus * sk);
    }
    const int plus0 = lp.num_vars();
    for (int r = 0; r < m; ++r) lp.add_variable(1.0);
    const int minus0 = lp.num_vars();
    for (int r = 0; r < m; ++r) lp.add_variable(1.0);

    std::vector<std::vector<lp::Term>> rows(static_cast<std::size_t>(m));
    for (int k = 0; k < n; ++k) {
        for (SparseMatrix::InnerIterator it(p.geometry.matrix, k); it; ++it) {
            rows[static_cast<std::size_t>(it.row())].push_back({k, it.value()});
        }
    }
    for (int r = 0; r < m; ++r) {
        auto terms = std::move(rows[static_cast<std::size_t>(r)]);
        terms.push_back({plus0 + r, 1.0});
        terms.push_back({minus0 + r, -1.0});
        lp.add_equality(std::move(terms), f[r]);
    }

    const lp::LpSolution sol = lp::solve_simplex(lp, config);
    if (sol.status != lp::LpStatus::Optimal) {
        throw std::logic_error("internal error: feasibility LP is always feasible and bounded");
    }
    LoadCheck out;
    out.violation = std::max(sol.objective_value, 0.0);
    out.w = Eigen::Map<const Vec>(sol.x.data(), n);
    return out;
}

double check_feasibility_for_load(const Vec& s, const Vec& f, const TrussProblem& p, const lp::SimplexConfig& config) {
    return solve_member_forces(s, f, p, config).violation;
}

std::vector<double> sample_simplex_weights(std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> w(k);
    double sum = 0.0;
    for (double& x : w) {
        x = expo(rng);
        sum += x;
    }
    for (double& x : w) x /= sum;
    return w;
}

std::vector<Vec> sample_box_loads(const GroundStructure& gs, const PerturbationBox& box, const LoadCase& lc, int count,
                                  std::uint64_t seed) {
    if (count < 1) {
        throw std::invalid_argument("sample count must be >= 1");
    }
    validate_box(gs, box, lc);
    const VertexLoadSet corners = enumerate_vertices(gs, box, lc);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    const int uniform_count = (count + 1) / 2;
    for (int t = 0; t < uniform_count; ++t) {
        Vec f = lc.reduced;
        for (const auto& [key, iv] : box.deltas) {
            const int row = gs.dof(key.first, key.second);
            const double u = unit(rng);
            f[row] += iv.lo + u * (iv.hi - iv.lo);
        }
        out.push_back(std::move(f));
    }
    std::vector<double> alpha(corners.size());
    for (int t = uniform_count; t < count; ++t) {
        double sum = 0.0;
        for (double& a : alpha) {
            a = expo(rng);
            sum += a;
        }
        for (double& a : alpha) a /= sum;
        Vec f = Vec::Zero(lc.reduced.size());
        for (std::size_t j = 0; j < corners.size(); ++j) f += alpha[j] * corners.vertices[j];
        // keep rounding from stepping outside the box
        for (const auto& [key, iv] : box.deltas) {
            const int row = gs.dof(key.first, key.second);
            f[row] = std::clamp(f[row], lc.reduced[row] + iv.lo, lc.reduced[row] + iv.hi);
        }
        out.push_back(std::move(f));
    }
    return out;
}

Vec reconstruct_member_forces(const std::vector<Vec>& vertex_forces, const std::vector<double>& alpha) {
    return convex_combination(vertex_forces, alpha);
}

FeasibilityReport verify_robust_design(const TrussDesign& design, const std::vector<UncertainLoad>& boxes,
                                       const TrussProblem& p, int samples_per_box, std::uint64_t seed,
                                       double rel_tol) {
    FeasibilityReport report;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        const UncertainLoad& u = boxes[b];
        const auto loads = sample_box_loads(p.structure, u.box, u.load_case, samples_per_box, seed + b);
        for (const Vec& raw : loads) {
            const Vec f = raw * u.scale;
            const double viol = check_feasibility_for_load(design.s, f, p);
            const double rel = viol / std::max(1.0, f.norm());
            ++report.samples_tested;
            report.max_violation = std::max(report.max_violation, viol);
            report.max_relative_violation = std::max(report.max_relative_violation, rel);
            if (rel > rel_tol) {
                report.failures.push_back({f, viol});
            }
        }
    }
    std::stable_sort(report.failures.begin(), report.failures.end(),
                     [](const SampleFailure& a, const SampleFailure& b) { return a.violation > b.violation; });
    report.pass = report.failures.empty();
    return report;
}

}  // namespace trussrob
