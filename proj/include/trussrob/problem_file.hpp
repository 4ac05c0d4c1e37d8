#pragma once

// Problem files: a strict JSON schema describing a ground structure (explicit
// nodes and bars, or a grid generator), material, load cases, optional
// uncertainty and solver overrides. Unknown fields are errors.

#include "trussrob/geometry.hpp"
#include "trussrob/loads.hpp"
#include "trussrob/truss_opt.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trussrob {

struct NodeSpec {
    int id = 0;
    std::vector<double> position;
    std::vector<bool> fixed;  ///< one flag per axis
};

/// Nodes whose coordinates match `pattern` (null entries match anything)
/// get the `fixed` flags.
struct SupportPattern {
    std::vector<std::optional<double>> pattern;
    std::vector<bool> fixed;
};

struct GeneratorSpec {
    std::vector<std::vector<double>> axes;
    std::vector<SupportPattern> supports;
    std::optional<double> max_bar_length;
    bool exclude_collinear = true;
    bool exclude_fixed_fixed = true;
};

/// A point force, located by node id or by position.
struct LoadSpec {
    std::optional<int> node;
    std::optional<std::vector<double>> position;
    std::vector<double> force;
};

struct LoadCaseSpec {
    int id = 0;
    std::vector<LoadSpec> loads;
};

struct MaterialSpec {
    double sigma_plus = 1e8;
    double sigma_minus = -1e8;
    double density = 2.7e3;
    double safety_factor = 1.0;  ///< multiplies both stress limits

    MaterialLimits limits() const;
};

struct UncertaintySpec {
    double relative_fraction = 0.0;
    bool rescale_to_nominal_max = false;
    BoxBase perturbation_base = BoxBase::LoadCase;
};

struct SolverSpec {
    std::optional<double> feas_tol;
    std::optional<double> opt_tol;
    std::optional<std::size_t> max_iterations;
    std::optional<bool> scenario_generation;
    std::optional<double> active_threshold;

    SolveOptions apply(SolveOptions base = {}) const;
};

struct ProblemFile {
    std::string name;
    int dimension = 2;
    std::vector<NodeSpec> nodes;  ///< explicit mode
    std::vector<std::pair<int, int>> bars;
    std::optional<GeneratorSpec> generator;  ///< generator mode
    MaterialSpec material;
    std::vector<LoadCaseSpec> load_cases;
    std::optional<UncertaintySpec> uncertainty;
    std::optional<std::vector<double>> s_max;  ///< a single entry applies to every bar
    SolverSpec solver;
};

struct SchemaError {
    std::string path;  ///< JSON pointer
    int line = 0;      ///< 1-based, 0 when unknown
    std::string message;

    std::string to_string() const;
};

class ProblemParseError : public std::runtime_error {
public:
    explicit ProblemParseError(std::vector<SchemaError> errors);
    const std::vector<SchemaError>& errors() const { return errors_; }

private:
    std::vector<SchemaError> errors_;
};

/// Parses and validates a problem file. Throws ProblemParseError listing
/// every schema error found.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem_file(const std::string& path);

/// Canonical JSON text (two-space indent, trailing newline).
std::string serialize_problem(const ProblemFile& problem);

/// A problem file turned into solver inputs.
struct MaterializedProblem {
    std::string name;
    GroundStructure structure;
    MaterialLimits material;
    std::vector<LoadCase> load_cases;
    std::optional<Vec> s_max;
    std::optional<UncertaintySpec> uncertainty;
    SolveOptions options;
};

/// Builds the ground structure and load cases. Throws GeometryError or
/// LoadError for inconsistent data and std::invalid_argument for
/// unresolvable load references.
MaterializedProblem materialize(const ProblemFile& problem);

/// example1, example3, example4, example5, cantilever2d.
ProblemFile builtin_example(const std::string& name);
std::vector<std::string> builtin_example_names();

/// 2D cantilever on an (nx+1) x (ny+1) grid with unit spacing, clamped at
/// x = 0 and loaded downward at the two free corners. Stands in for a
/// figure-only example; its volumes are not reference values.
ProblemFile cantilever2d(int nx = 4, int ny = 2, double force = 1e4);

}  // namespace trussrob
