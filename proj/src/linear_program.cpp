#include "trussrob/linear_program.hpp"

#include <limits>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace trussrob::lp {

int LinearProgram::add_variable(double cost, double lo, double hi, std::string name) {
    cost_.push_back(cost);
    lo_.push_back(lo);
    hi_.push_back(hi);
    start_.push_back(std::numeric_limits<double>::quiet_NaN());
    names_.push_back(std::move(name));
    return num_vars() - 1;
}

int LinearProgram::add_equality(std::vector<Term> terms, double rhs, std::string name) {
    eq_.push_back(Row{std::move(terms), rhs, std::move(name)});
    return num_equalities() - 1;
}

int LinearProgram::add_inequality(std::vector<Term> terms, double rhs, std::string name) {
    le_.push_back(Row{std::move(terms), rhs, std::move(name)});
    return num_inequalities() - 1;
}

void LinearProgram::set_bounds(int var, double lo, double hi) {
    lo_.at(static_cast<std::size_t>(var)) = lo;
    hi_.at(static_cast<std::size_t>(var)) = hi;
}

std::size_t LinearProgram::num_nonzeros() const {
    std::size_t nnz = 0;
    for (const auto& r : eq_) nnz += r.terms.size();
    for (const auto& r : le_) nnz += r.terms.size();
    return nnz;
}

void LinearProgram::validate() const {
    const int n = num_vars();
    for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (std::isnan(cost_[k]) || std::isnan(lo_[k]) || std::isnan(hi_[k])) {
            throw LpError("NaN in variable " + std::to_string(j));
        }
        if (lo_[k] > hi_[k]) {
            throw LpError("variable " + std::to_string(j) + " has lo > hi");
        }
        if (lo_[k] == kInf || hi_[k] == -kInf) {
            throw LpError("variable " + std::to_string(j) + " has an empty infinite bound");
        }
    }
    auto check_rows = [n](const std::vector<Row>& rows, const char* kind) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!std::isfinite(rows[i].rhs)) {
                throw LpError(std::string(kind) + " row " + std::to_string(i) + " has a non-finite rhs");
            }
            for (const Term& t : rows[i].terms) {
                if (t.var < 0 || t.var >= n) {
                    throw LpError(std::string(kind) + " row " + std::to_string(i) + " references variable " +
                                  std::to_string(t.var));
                }
                if (!std::isfinite(t.coef)) {
                    throw LpError(std::string(kind) + " row " + std::to_string(i) + " has a non-finite coefficient");
                }
            }
        }
    };
    check_rows(eq_, "equality");
    check_rows(le_, "inequality");
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

double FeasibilityViolation::max() const { return std::max({equality, inequality, bounds}); }

FeasibilityViolation check_primal_feasibility(const LinearProgram& lp, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != lp.num_vars()) {
        throw LpError("check_primal_feasibility: x has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(lp.num_vars()));
    }
    auto activity = [&x](const Row& r) {
        double a = 0.0;
        for (const Term& t : r.terms) a += t.coef * x[static_cast<std::size_t>(t.var)];
        return a;
    };
    FeasibilityViolation v;
    for (const Row& r : lp.equalities()) {
        v.equality = std::max(v.equality, std::abs(activity(r) - r.rhs));
    }
    for (const Row& r : lp.inequalities()) {
        v.inequality = std::max(v.inequality, activity(r) - r.rhs);
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        v.bounds = std::max({v.bounds, lp.lower()[j] - x[j], x[j] - lp.upper()[j]});
    }
    return v;
}

double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
    double obj = 0.0;
    const auto neq = static_cast<std::size_t>(lp.num_equalities());
    for (std::size_t i = 0; i < neq; ++i) obj += sol.duals[i] * lp.equalities()[i].rhs;
    for (std::size_t i = 0; i < lp.inequalities().size(); ++i) obj += sol.duals[neq + i] * lp.inequalities()[i].rhs;

    std::vector<bool> basic(static_cast<std::size_t>(lp.num_vars()), false);
    for (int b : sol.basis) {
        if (b >= 0 && b < lp.num_vars()) basic[static_cast<std::size_t>(b)] = true;
    }
    for (std::size_t j = 0; j < basic.size(); ++j) {
        if (!basic[j]) obj += sol.reduced_costs[j] * sol.x[j];
    }
    return obj;
}

void write_lp_text(const LinearProgram& lp, std::ostream& os) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    os << "# vars " << lp.num_vars() << " eq " << lp.num_equalities() << " le " << lp.num_inequalities() << '\n';
    auto label = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        os << "var " << j << ' ' << label(lp.var_name(j)) << " cost " << lp.cost()[k] << " lo " << lp.lower()[k]
           << " hi " << lp.upper()[k] << '\n';
    }
    auto rows = [&](const std::vector<Row>& rs, const char* kind) {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            os << kind << ' ' << i << ' ' << label(rs[i].name) << " rhs " << rs[i].rhs << " :";
            for (const Term& t : rs[i].terms) os << ' ' << t.var << ':' << t.coef;
            os << '\n';
        }
    };
    rows(lp.equalities(), "eq");
    rows(lp.inequalities(), "le");
    os.flags(flags);
    os.precision(prec);
}

}  // namespace trussrob::lp
