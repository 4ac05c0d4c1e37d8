#include "trussrob/report.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace trussrob {

using Json = nlohmann::ordered_json;

const char* to_string(RunMode mode) {
    return mode == RunMode::Robust ? "robust" : "nominal";
}

RunSetup prepare_run(const MaterializedProblem& mp, RunMode mode, std::optional<double> fraction,
                     std::optional<bool> rescale, std::optional<BoxBase> base) {
    if (!fraction && mp.uncertainty) fraction = mp.uncertainty->relative_fraction;
    if (!rescale) rescale = mp.uncertainty ? mp.uncertainty->rescale_to_nominal_max : false;
    if (!base) base = mp.uncertainty ? mp.uncertainty->perturbation_base : BoxBase::LoadCase;
    if (mode == RunMode::Robust && !fraction) {
        throw std::invalid_argument("robust mode needs a relative fraction (--fraction or uncertainty section)");
    }
    if (fraction && !(*fraction >= 0.0)) {
        throw std::invalid_argument("relative fraction must be >= 0");
    }
    const bool do_rescale = *rescale;
    std::vector<UncertainLoad> boxes;

    const GroundStructure& gs = mp.structure;
    std::vector<VertexLoadSet> sets;
    for (const LoadCase& lc : mp.load_cases) {
        if (fraction) {
            UncertainLoad u{lc, build_relative_box(gs, lc, *fraction, *base), 1.0};
            if (mode == RunMode::Robust) {
                VertexLoadSet corners = enumerate_vertices(gs, u.box, lc);
                if (do_rescale) {
                    u.scale = nominal_max_scale(gs, corners, lc);
                    corners = rescale_to_nominal_max(gs, corners, lc);
                }
                sets.push_back(std::move(corners));
            }
            boxes.push_back(std::move(u));
        }
        if (mode == RunMode::Nominal) sets.push_back(nominal_vertex_set(lc));
    }
    return RunSetup{make_truss_problem(mp.structure, mp.material, union_vertex_sets(sets), mp.s_max),
                    std::move(boxes), fraction.value_or(0.0), do_rescale, *base};
}

FeasibilityReport verify_sections(const RunSetup& setup, const Vec& s, int samples, std::uint64_t seed) {
    TrussDesign d;
    d.s = s;
    return verify_robust_design(d, setup.boxes, setup.problem, samples, seed);
}

RunResult run_problem(const MaterializedProblem& mp, const RunOptions& options) {
    RunResult r(mp.name, options.mode, prepare_run(mp, options.mode, options.fraction, options.rescale, options.box_base));
    r.options = mp.options;
    if (options.feas_tol) r.options.simplex.feas_tol = *options.feas_tol;
    if (options.opt_tol) r.options.simplex.opt_tol = *options.opt_tol;
    if (options.threshold) r.options.active_threshold = *options.threshold;

    const TrussProblem& p = r.setup.problem;
    spdlog::info("{}: {} bars, {} free DOFs, {} load vertices ({})", r.name, p.num_bars(), p.num_free_dofs(),
                 p.num_loads(), to_string(r.mode));
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.design = solve_topology(p, r.options);
        r.status = "optimal";
    } catch (const RobustInfeasibleError& e) {
        spdlog::warn("{}", e.what());
        r.status = "robust infeasible";
    }
    if (r.design && options.verify_samples > 0) {
        if (r.setup.boxes.empty()) {
            throw std::invalid_argument("verification needs a relative fraction");
        }
        r.verification = verify_robust_design(*r.design, r.setup.boxes, p, options.verify_samples, options.seed);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

namespace {

Json verification_json(const FeasibilityReport& v, std::size_t max_failures) {
    Json j;
    j["verdict"] = v.pass ? "pass" : "fail";
    j["samples_tested"] = v.samples_tested;
    j["failures"] = v.failures.size();
    j["max_violation"] = v.max_violation;
    j["max_relative_violation"] = v.max_relative_violation;
    Json witnesses = Json::array();
    for (std::size_t i = 0; i < std::min(max_failures, v.failures.size()); ++i) {
        const SampleFailure& f = v.failures[i];
        witnesses.push_back(Json{{"violation", f.violation}, {"load", std::vector<double>(f.load.begin(), f.load.end())}});
    }
    j["witnesses"] = witnesses;
    return j;
}

}  // namespace

std::string report_json(const RunResult& r, const ReportOptions& options) {
    const TrussProblem& p = r.setup.problem;
    const GroundStructure& gs = p.structure;

    Json j;
    j["name"] = r.name;
    j["mode"] = to_string(r.mode);
    j["status"] = r.status;
    j["problem"] = Json{{"dimension", gs.dimension()},
                        {"nodes", gs.num_nodes()},
                        {"bars", p.num_bars()},
                        {"free_dofs", p.num_free_dofs()},
                        {"load_vertices", p.num_loads()}};
    if (!r.setup.boxes.empty()) {
        Json boxes = Json::array();
        for (const UncertainLoad& u : r.setup.boxes) {
            boxes.push_back(Json{{"load_case", u.load_case.id}, {"intervals", u.box.deltas.size()}, {"scale", u.scale}});
        }
        j["uncertainty"] = Json{{"relative_fraction", r.setup.fraction},
                                {"rescale_to_nominal_max", r.setup.rescale},
                                {"perturbation_base", to_string(r.setup.base)},
                                {"boxes", boxes}};
    }

    if (r.design) {
        const TrussDesign& d = *r.design;
        const double volume = p.lengths.dot(d.s);
        j["volume"] = volume;
        j["mass"] = p.material.density * volume;
        j["iterations"] = d.iterations;
        j["scenario_rounds"] = d.scenario_rounds;

        const double threshold = r.options.active_threshold;
        std::vector<int> active = extract_topology(d, threshold);
        std::stable_sort(active.begin(), active.end(), [&](int a, int b) { return d.s[a] > d.s[b]; });
        Json bars = Json::array();
        for (int k : active) {
            const Bar& bar = gs.bars()[static_cast<std::size_t>(k)];
            bars.push_back(Json{{"bar", bar.id}, {"nodes", {bar.a, bar.b}}, {"length", bar.length}, {"s", d.s[k]}});
        }
        j["threshold"] = threshold;
        j["active_bars"] = bars;
        j["s"] = std::vector<double>(d.s.begin(), d.s.end());
        j["equilibrium_residuals"] = equilibrium_residuals(p, d);
    }
    if (r.verification) j["verification"] = verification_json(*r.verification, options.max_failures);
    if (options.include_timing) j["timing_seconds"] = r.seconds;
    return j.dump(2) + "\n";
}

Vec sections_from_report(const std::string& text) {
    const Json j = Json::parse(text);
    if (!j.is_object() || !j.contains("s") || !j["s"].is_array()) {
        throw std::runtime_error("report has no cross-section array \"s\"");
    }
    const auto s = j["s"].get<std::vector<double>>();
    return Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
}

}  // namespace trussrob
