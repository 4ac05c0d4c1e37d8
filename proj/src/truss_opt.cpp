#include "trussrob/truss_opt.hpp"

#include "trussrob/verify.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace trussrob {

void MaterialLimits::validate() const {
    if (!(sigma_minus < 0.0 && sigma_plus > 0.0)) {
        throw std::invalid_argument("stress limits must satisfy sigma_minus < 0 < sigma_plus");
    }
    if (!(density > 0.0)) {
        throw std::invalid_argument("density must be positive");
    }
}

TrussProblem make_truss_problem(GroundStructure gs, MaterialLimits material, VertexLoadSet loads,
                                std::optional<Vec> s_max) {
    material.validate();
    GeometryMatrix c = assemble_geometry_matrix(gs);
    Vec l = gs.lengths();
    if (s_max) {
        if (s_max->size() != gs.num_bars()) {
            throw std::invalid_argument("s_max must have one entry per bar");
        }
        if ((s_max->array() <= 0.0).any()) {
            throw std::invalid_argument("s_max entries must be positive");
        }
    }
    for (const Vec& f : loads.vertices) {
        if (f.size() != gs.num_free_dofs()) {
            throw std::invalid_argument("load vector length does not match the free DOF count");
        }
    }
    return TrussProblem{std::move(gs), std::move(c), std::move(l), material, std::move(s_max), std::move(loads)};
}

TrussProblem with_loads(const TrussProblem& p, VertexLoadSet loads) {
    TrussProblem out = p;
    out.loads = std::move(loads);
    return out;
}

lp::LinearProgram build_topology_lp(const TrussProblem& p) {
    const int n = p.num_bars();
    const int m = p.num_free_dofs();
    const int nv = p.num_loads();
    if (nv == 0) throw std::invalid_argument("topology LP needs at least one load");
    if (n == 0 || m == 0) throw std::invalid_argument("topology LP needs bars and free DOFs");

    lp::LinearProgram lp;
    for (int k = 0; k < n; ++k) {
        const double cap = p.s_max ? (*p.s_max)[k] : lp::kInf;
        lp.add_variable(p.lengths[k], 0.0, cap, "s" + std::to_string(k));
    }
    for (int j = 0; j < nv; ++j) {
        for (int k = 0; k < n; ++k) {
            lp.add_variable(0.0, -lp::kInf, lp::kInf, "w" + std::to_string(j) + "_" + std::to_string(k));
        }
    }

    // C is column-major; gather rows once
    std::vector<std::vector<lp::Term>> c_rows(static_cast<std::size_t>(m));
    for (int k = 0; k < n; ++k) {
        for (SparseMatrix::InnerIterator it(p.geometry.matrix, k); it; ++it) {
            c_rows[static_cast<std::size_t>(it.row())].push_back({k, it.value()});
        }
    }

    const double sp = p.material.sigma_plus;
    const double sm = p.material.sigma_minus;

    // Start from generous sections so that the first phase only has to
    // balance the loads.
    double fmax = 0.0;
    for (const Vec& f : p.loads.vertices) fmax = std::max(fmax, f.lpNorm<1>());
    const double generous = 10.0 * fmax / std::min(sp, -sm);
    if (generous > 0.0) {
        for (int k = 0; k < n; ++k) {
            const double cap = p.s_max ? (*p.s_max)[k] : lp::kInf;
            lp.set_start(k, std::min(generous, cap));
        }
    }
    for (int j = 0; j < nv; ++j) {
        const int w0 = n * (1 + j);
        const Vec& f = p.loads.vertices[static_cast<std::size_t>(j)];
        for (int r = 0; r < m; ++r) {
            std::vector<lp::Term> terms = c_rows[static_cast<std::size_t>(r)];
            for (auto& t : terms) t.var += w0;
            lp.add_equality(std::move(terms), f[r], "eq" + std::to_string(j) + "_" + std::to_string(r));
        }
    }
    for (int j = 0; j < nv; ++j) {
        const int w0 = n * (1 + j);
        for (int k = 0; k < n; ++k) {
            lp.add_inequality({{w0 + k, 1.0}, {k, -sp}}, 0.0, "ten" + std::to_string(j) + "_" + std::to_string(k));
            lp.add_inequality({{w0 + k, -1.0}, {k, sm}}, 0.0, "com" + std::to_string(j) + "_" + std::to_string(k));
        }
    }
    return lp;
}

namespace {

TrussDesign design_from_solution(const TrussProblem& p, const lp::LpSolution& sol, double threshold) {
    const int n = p.num_bars();
    TrussDesign d;
    d.s = Eigen::Map<const Vec>(sol.x.data(), n);
    for (int j = 0; j < p.num_loads(); ++j) {
        d.w.push_back(Eigen::Map<const Vec>(sol.x.data() + static_cast<std::ptrdiff_t>(n) * (1 + j), n));
    }
    d.volume = p.lengths.dot(d.s);
    d.mass = p.material.density * d.volume;
    d.iterations = sol.iterations;
    d.active_bars = extract_topology(d, threshold);
    return d;
}

TrussDesign solve_direct(const TrussProblem& p, const SolveOptions& options) {
    const lp::LinearProgram lp = build_topology_lp(p);
    spdlog::debug("topology LP: {} variables, {} equalities, {} inequalities", lp.num_vars(), lp.num_equalities(),
                  lp.num_inequalities());
    const lp::LpSolution sol = lp::solve_simplex(lp, options.simplex);
    switch (sol.status) {
        case lp::LpStatus::Infeasible:
            throw RobustInfeasibleError("robust infeasible: no cross sections carry every load of the set");
        case lp::LpStatus::Unbounded:
            throw std::logic_error("internal error: topology LP reported unbounded");
        case lp::LpStatus::Optimal:
            break;
    }
    spdlog::debug("simplex finished after {} iterations ({} in phase 1)", sol.iterations, sol.phase1_iterations);
    TrussDesign d = design_from_solution(p, sol, options.active_threshold);
    d.active_loads.resize(static_cast<std::size_t>(p.num_loads()));
    for (int j = 0; j < p.num_loads(); ++j) d.active_loads[static_cast<std::size_t>(j)] = j;
    return d;
}

TrussDesign solve_by_scenarios(const TrussProblem& p, const SolveOptions& options) {
    const auto& verts = p.loads.vertices;
    const auto& prov = p.loads.provenance;

    // seed with the largest vertex of every load case
    std::map<int, int> seed;
    for (std::size_t j = 0; j < verts.size(); ++j) {
        const int lc = prov[j].load_case;
        auto it = seed.find(lc);
        if (it == seed.end() || verts[j].norm() > verts[static_cast<std::size_t>(it->second)].norm()) {
            seed[lc] = static_cast<int>(j);
        }
    }
    std::vector<int> active;
    for (const auto& [lc, j] : seed) active.push_back(j);
    std::sort(active.begin(), active.end());

    std::size_t total_iterations = 0;
    for (int round = 1;; ++round) {
        VertexLoadSet subset;
        for (int j : active) {
            subset.vertices.push_back(verts[static_cast<std::size_t>(j)]);
            subset.provenance.push_back(prov[static_cast<std::size_t>(j)]);
        }
        const TrussProblem sub = with_loads(p, std::move(subset));
        TrussDesign d = solve_direct(sub, options);
        total_iterations += d.iterations;

        // worst violated vertex per load case
        std::map<int, std::pair<double, int>> worst;
        std::vector<Vec> forces(verts.size());
        for (std::size_t j = 0; j < verts.size(); ++j) {
            if (std::binary_search(active.begin(), active.end(), static_cast<int>(j))) continue;
            LoadCheck check = solve_member_forces(d.s, verts[j], p, options.simplex);
            const double viol = check.violation;
            forces[j] = std::move(check.w);
            const double tol = kDefaultVerifyRelTol * std::max(1.0, verts[j].norm());
            if (viol > tol) {
                auto& slot = worst[prov[j].load_case];
                if (viol > slot.first) slot = {viol, static_cast<int>(j)};
            }
        }
        spdlog::debug("scenario round {}: {} active vertices, volume {:.9g}, {} load cases violated", round,
                      active.size(), d.volume, worst.size());
        if (worst.empty()) {
            // inactive vertices take the member forces found by their feasibility check
            TrussDesign full = d;
            full.w = std::move(forces);
            for (std::size_t t = 0; t < active.size(); ++t) {
                full.w[static_cast<std::size_t>(active[t])] = d.w[t];
            }
            full.iterations = total_iterations;
            full.scenario_rounds = round;
            full.active_loads = active;
            return full;
        }
        for (const auto& [lc, entry] : worst) active.push_back(entry.second);
        std::sort(active.begin(), active.end());
    }
}

}  // namespace

TrussDesign solve_topology(const TrussProblem& p, const SolveOptions& options) {
    if (options.scenario_generation && p.num_loads() > 1) {
        return solve_by_scenarios(p, options);
    }
    return solve_direct(p, options);
}

std::vector<int> extract_topology(const TrussDesign& design, double threshold) {
    std::vector<int> out;
    const double smax = design.s.size() > 0 ? design.s.maxCoeff() : 0.0;
    if (!(smax > 0.0)) {
        spdlog::warn("design has no positive cross sections; topology is empty");
        return out;
    }
    for (int k = 0; k < design.s.size(); ++k) {
        if (design.s[k] >= threshold * smax) out.push_back(k);
    }
    return out;
}

TrussProblem scale_problem(const TrussProblem& p, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("scale factors must be positive");
    }
    TrussProblem out = p;
    for (Vec& f : out.loads.vertices) f *= alpha;
    out.material.sigma_minus *= beta;
    out.material.sigma_plus *= beta;
    if (out.s_max) *out.s_max *= alpha / beta;
    return out;
}

std::vector<double> equilibrium_residuals(const TrussProblem& p, const TrussDesign& design) {
    std::vector<double> out;
    for (std::size_t j = 0; j < design.w.size() && j < p.loads.size(); ++j) {
        const Vec r = p.geometry.matrix * design.w[j] - p.loads.vertices[j];
        out.push_back(r.lpNorm<Eigen::Infinity>());
    }
    return out;
}

}  // namespace trussrob
