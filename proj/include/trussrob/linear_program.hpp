#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace trussrob::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class LpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Row {
    std::vector<Term> terms;
    double rhs = 0.0;
    std::string name;
};

/// min c^T x  s.t.  A_eq x = b,  A_le x <= u,  lo <= x <= hi.
class LinearProgram {
public:
    int add_variable(double cost, double lo = 0.0, double hi = kInf, std::string name = {});
    int add_equality(std::vector<Term> terms, double rhs, std::string name = {});
    int add_inequality(std::vector<Term> terms, double rhs, std::string name = {});

    int num_vars() const { return static_cast<int>(cost_.size()); }
    int num_equalities() const { return static_cast<int>(eq_.size()); }
    int num_inequalities() const { return static_cast<int>(le_.size()); }
    std::size_t num_nonzeros() const;

    const std::vector<double>& cost() const { return cost_; }
    const std::vector<double>& lower() const { return lo_; }
    const std::vector<double>& upper() const { return hi_; }
    const std::vector<Row>& equalities() const { return eq_; }
    const std::vector<Row>& inequalities() const { return le_; }
    const std::string& var_name(int j) const { return names_[static_cast<std::size_t>(j)]; }

    void set_cost(int var, double c) { cost_.at(static_cast<std::size_t>(var)) = c; }
    void set_bounds(int var, double lo, double hi);

    /// Starting value hint. A value strictly inside the bounds starts the
    /// variable off-bound (superbasic) instead of at its lower bound.
    void set_start(int var, double value) { start_.at(static_cast<std::size_t>(var)) = value; }
    /// NaN when no hint was given.
    const std::vector<double>& start() const { return start_; }

    /// Throws LpError on out-of-range indices, NaNs or lo > hi.
    void validate() const;

private:
    std::vector<double> cost_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<double> start_;
    std::vector<std::string> names_;
    std::vector<Row> eq_;
    std::vector<Row> le_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
    std::vector<int> basis;            ///< basic column per row; >= num_vars are slack/artificial columns
    std::vector<double> duals;         ///< equality rows first, then inequality rows
    std::vector<double> reduced_costs; ///< per structural variable
    std::size_t iterations = 0;
    std::size_t phase1_iterations = 0;
};

struct SimplexConfig {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    std::size_t max_iters = 1'000'000;
    bool anti_cycling = true;
    int degenerate_switch = 50;     ///< consecutive degenerate pivots before Bland's rule
    int refactor_interval = 100;
};

/// Two-phase bounded-variable primal simplex.
///
/// Throws LpError("iteration limit") when max_iters is exceeded and
/// LpError("degenerate basis") when a basis cannot be factorized even after
/// falling back to the last good basis.
LpSolution solve_simplex(const LinearProgram& lp, const SimplexConfig& config = {});

struct FeasibilityViolation {
    double equality = 0.0;    ///< max |A_eq x - b|
    double inequality = 0.0;  ///< max (A_le x - u)_+
    double bounds = 0.0;      ///< max bound violation

    double max() const;
};

FeasibilityViolation check_primal_feasibility(const LinearProgram& lp, const std::vector<double>& x);

/// Dual objective y^T rhs + sum over nonbasic variables of d_j x_j.
double dual_objective(const LinearProgram& lp, const LpSolution& sol);

/// Plain-text dump, one item per line:
///   var <index> <name> cost <c> lo <lo> hi <hi>
///   eq|le <index> <name> rhs <b> : <var>:<coef> ...
void write_lp_text(const LinearProgram& lp, std::ostream& os);

}  // namespace trussrob::lp
