#pragma once

// Run orchestration (nominal or robust solve, optional sampling verification)
// and the JSON run report.

#include "trussrob/problem_file.hpp"
#include "trussrob/truss_opt.hpp"
#include "trussrob/verify.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace trussrob {

enum class RunMode { Nominal, Robust };

const char* to_string(RunMode mode);

struct RunOptions {
    RunMode mode = RunMode::Nominal;
    std::optional<double> fraction;  ///< overrides the problem's relative_fraction
    std::optional<bool> rescale;     ///< overrides rescale_to_nominal_max
    std::optional<BoxBase> box_base; ///< overrides perturbation_base
    int verify_samples = 0;          ///< per box; 0 skips verification
    std::uint64_t seed = 0;
    std::optional<double> feas_tol;
    std::optional<double> opt_tol;
    std::optional<double> threshold;
};

/// Load set and boxes for one run.
struct RunSetup {
    TrussProblem problem;
    std::vector<UncertainLoad> boxes;  ///< empty without uncertainty data
    double fraction = 0.0;
    bool rescale = false;
    BoxBase base = BoxBase::LoadCase;
};

/// Nominal mode loads every load case's nominal vector. Robust mode loads the
/// corners of each case's relative box, optionally rescaled so the largest
/// nodal force matches the nominal one. Boxes are built in both modes when a
/// fraction is known, so nominal designs can be checked against them.
/// Throws std::invalid_argument in robust mode without a fraction.
RunSetup prepare_run(const MaterializedProblem& mp, RunMode mode, std::optional<double> fraction,
                     std::optional<bool> rescale, std::optional<BoxBase> base = std::nullopt);

struct RunResult {
    RunResult(std::string name_, RunMode mode_, RunSetup setup_)
        : name(std::move(name_)), mode(mode_), setup(std::move(setup_)) {}

    std::string name;
    RunMode mode = RunMode::Nominal;
    std::string status;  ///< "optimal" or "robust infeasible"
    RunSetup setup;
    SolveOptions options;
    std::optional<TrussDesign> design;
    std::optional<FeasibilityReport> verification;
    double seconds = 0.0;
};

RunResult run_problem(const MaterializedProblem& mp, const RunOptions& options);

/// Verifies a given cross-section vector against the run's boxes.
FeasibilityReport verify_sections(const RunSetup& setup, const Vec& s, int samples, std::uint64_t seed);

struct ReportOptions {
    bool include_timing = false;  ///< off by default so reports are reproducible byte for byte
    std::size_t max_failures = 10;
};

/// Report JSON text (two-space indent, trailing newline).
std::string report_json(const RunResult& result, const ReportOptions& options = {});

/// Cross-sections stored in a report. Throws std::runtime_error when absent.
Vec sections_from_report(const std::string& text);

}  // namespace trussrob
