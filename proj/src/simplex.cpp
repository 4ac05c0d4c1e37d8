// Bounded-variable revised primal simplex.
//
// Every row i owns a logical column e_i: a slack with bounds [0, inf) for
// inequality rows and a fixed [0, 0] logical for equality rows, so the
// starting basis is the identity. Phase 1 minimizes the sum of bound
// infeasibilities of the basic variables, phase 2 the scaled objective.
//
// Primal degeneracy is broken by loosening every finite bound by a small
// random amount before solving. Once the perturbed problem is optimal the
// true bounds are restored and the solve continues from that basis. Pricing
// uses devex reference weights and switches to Bland's rule after a run of
// degenerate pivots.
//
// The basis is held as a sparse LU factorization (KLU: block triangular
// form, then a fill-reducing order on the remaining blocks) plus a
// product-form eta file, and is refactorized every `refactor_interval`
// pivots.

#include "trussrob/linear_program.hpp"

#include <Eigen/SparseCore>
#include <klu.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace trussrob::lp {
namespace {

using Vector = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Superbasic: nonbasic strictly between its bounds (from a start hint).
enum class VarState : unsigned char { Basic, AtLower, AtUpper, Free, Superbasic, Fixed };

struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
};

constexpr double kPivotTol = 1e-7;
constexpr double kDropTol = 1e-14;
constexpr double kPerturbation = 1e-6;
constexpr std::uint64_t kPerturbationSeed = 0x5eed;
constexpr std::size_t kWatchWindow = 200;  // iterations between objective checks
constexpr double kStallTol = 1e-12;       // relative objective decrease that counts as progress
constexpr int kStallWindows = 5;          // consecutive flat windows before forcing Bland's rule

class KluFactor {
public:
    KluFactor() { klu_defaults(&common_); }
    ~KluFactor() { release(); }
    KluFactor(const KluFactor&) = delete;
    KluFactor& operator=(const KluFactor&) = delete;

    bool factorize(SpMat b) {
        release();
        b.makeCompressed();
        n_ = static_cast<int>(b.rows());
        symbolic_ = klu_analyze(n_, b.outerIndexPtr(), b.innerIndexPtr(), &common_);
        if (symbolic_ == nullptr) return false;
        numeric_ = klu_factor(b.outerIndexPtr(), b.innerIndexPtr(), b.valuePtr(), symbolic_, &common_);
        return numeric_ != nullptr && common_.status == KLU_OK;
    }

    // B x = rhs, in place
    void solve(Vector& x) const { klu_solve(symbolic_, numeric_, n_, 1, x.data(), &common_); }
    // B^T x = rhs, in place
    void solve_transposed(Vector& x) const { klu_tsolve(symbolic_, numeric_, n_, 1, x.data(), &common_); }

    double fill() const { return numeric_ != nullptr ? static_cast<double>(numeric_->lnz + numeric_->unz) : 0.0; }

private:
    void release() {
        if (numeric_ != nullptr) klu_free_numeric(&numeric_, &common_);
        if (symbolic_ != nullptr) klu_free_symbolic(&symbolic_, &common_);
    }

    mutable klu_common common_;
    klu_symbolic* symbolic_ = nullptr;
    klu_numeric* numeric_ = nullptr;
    int n_ = 0;
};

class RevisedSimplex {
public:
    RevisedSimplex(const LinearProgram& lp, const SimplexConfig& cfg) : lp_(lp), cfg_(cfg) {
        build_scaled_matrix();
        initialize_basis();
    }

    LpSolution run() {
        LpSolution sol;
        perturb_bounds();
        refactor();

        PhaseResult result = PhaseResult::Optimal;
        while (true) {
            result = solve_phases();
            if (perturbed_ && result != PhaseResult::Infeasible) {
                restore_bounds();
                continue;
            }
            break;
        }
        sol.iterations = iterations_;
        sol.phase1_iterations = phase1_iterations_;
        fill_primal(sol);
        switch (result) {
            case PhaseResult::Infeasible:
                sol.status = LpStatus::Infeasible;
                break;
            case PhaseResult::Unbounded:
                sol.status = LpStatus::Unbounded;
                break;
            case PhaseResult::Optimal:
                sol.status = LpStatus::Optimal;
                fill_duals(sol);
                break;
        }
        return sol;
    }

private:
    enum class PhaseResult { Optimal, Unbounded, Infeasible };

    // ---- setup -------------------------------------------------------------

    void build_scaled_matrix() {
        n_ = lp_.num_vars();
        neq_ = lp_.num_equalities();
        nle_ = lp_.num_inequalities();
        rows_ = neq_ + nle_;
        cols_ = n_ + rows_;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(lp_.num_nonzeros());
        rhs_.assign(static_cast<std::size_t>(rows_), 0.0);
        for (int i = 0; i < neq_; ++i) {
            const Row& r = lp_.equalities()[static_cast<std::size_t>(i)];
            for (const Term& t : r.terms) trip.emplace_back(i, t.var, t.coef);
            rhs_[static_cast<std::size_t>(i)] = r.rhs;
        }
        for (int i = 0; i < nle_; ++i) {
            const Row& r = lp_.inequalities()[static_cast<std::size_t>(i)];
            for (const Term& t : r.terms) trip.emplace_back(neq_ + i, t.var, t.coef);
            rhs_[static_cast<std::size_t>(neq_ + i)] = r.rhs;
        }
        SpMat a(rows_, n_);
        a.setFromTriplets(trip.begin(), trip.end());
        a.prune(0.0);
        a.makeCompressed();

        // geometric-mean passes, then rows equilibrated to unit max |a_ij|
        row_scale_.assign(static_cast<std::size_t>(rows_), 1.0);
        col_scale_.assign(static_cast<std::size_t>(n_), 1.0);
        auto scaled = [&](Eigen::Index i, int j, double v) {
            return std::abs(v) * row_scale_[static_cast<std::size_t>(i)] * col_scale_[static_cast<std::size_t>(j)];
        };
        for (int pass = 0; pass < 6; ++pass) {
            std::vector<double> rmin(static_cast<std::size_t>(rows_), kInf);
            std::vector<double> rmax(static_cast<std::size_t>(rows_), 0.0);
            for (int j = 0; j < n_; ++j) {
                for (SpMat::InnerIterator it(a, j); it; ++it) {
                    const double v = scaled(it.row(), j, it.value());
                    const auto r = static_cast<std::size_t>(it.row());
                    rmin[r] = std::min(rmin[r], v);
                    rmax[r] = std::max(rmax[r], v);
                }
            }
            for (std::size_t i = 0; i < rmax.size(); ++i) {
                if (rmax[i] > 0.0) row_scale_[i] /= std::sqrt(rmin[i] * rmax[i]);
            }
            for (int j = 0; j < n_; ++j) {
                double lo = kInf, hi = 0.0;
                for (SpMat::InnerIterator it(a, j); it; ++it) {
                    const double v = scaled(it.row(), j, it.value());
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (hi > 0.0) col_scale_[static_cast<std::size_t>(j)] /= std::sqrt(lo * hi);
            }
        }
        {
            std::vector<double> rmax(static_cast<std::size_t>(rows_), 0.0);
            for (int j = 0; j < n_; ++j) {
                for (SpMat::InnerIterator it(a, j); it; ++it) {
                    auto& hi = rmax[static_cast<std::size_t>(it.row())];
                    hi = std::max(hi, scaled(it.row(), j, it.value()));
                }
            }
            for (std::size_t i = 0; i < rmax.size(); ++i) {
                if (rmax[i] > 0.0) row_scale_[i] /= rmax[i];
            }
        }
        for (int j = 0; j < n_; ++j) {
            for (SpMat::InnerIterator it(a, j); it; ++it) {
                it.valueRef() *= row_scale_[static_cast<std::size_t>(it.row())] * col_scale_[static_cast<std::size_t>(j)];
            }
        }
        a_ = std::move(a);
        for (int i = 0; i < rows_; ++i) rhs_[static_cast<std::size_t>(i)] *= row_scale_[static_cast<std::size_t>(i)];

        lo_.assign(static_cast<std::size_t>(cols_), 0.0);
        hi_.assign(static_cast<std::size_t>(cols_), kInf);
        cost_.assign(static_cast<std::size_t>(cols_), 0.0);
        for (int j = 0; j < n_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            lo_[k] = lp_.lower()[k] / col_scale_[k];
            hi_[k] = lp_.upper()[k] / col_scale_[k];
            cost_[k] = lp_.cost()[k] * col_scale_[k];
        }
        for (int i = 0; i < neq_; ++i) hi_[static_cast<std::size_t>(n_ + i)] = 0.0;

        double cmax = 0.0;
        for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(cost_[static_cast<std::size_t>(j)]));
        cost_scale_ = cmax > 0.0 ? 1.0 / cmax : 1.0;
        for (int j = 0; j < n_; ++j) cost_[static_cast<std::size_t>(j)] *= cost_scale_;
        phase_cost_.assign(static_cast<std::size_t>(cols_), 0.0);
        weight_.assign(static_cast<std::size_t>(cols_), 1.0);
        d_.assign(static_cast<std::size_t>(cols_), 0.0);
    }

    void initialize_basis() {
        x_.assign(static_cast<std::size_t>(cols_), 0.0);
        state_.assign(static_cast<std::size_t>(cols_), VarState::Fixed);
        head_.resize(static_cast<std::size_t>(rows_));
        for (int j = 0; j < n_; ++j) {
            place_at_bound(j);
            const auto k = static_cast<std::size_t>(j);
            const double v = lp_.start()[k] / col_scale_[k];
            if (std::isfinite(v) && v > lo_[k] && v < hi_[k]) {
                state_[k] = VarState::Superbasic;
                x_[k] = v;
            } else if (std::isfinite(v) && v == hi_[k] && v > lo_[k]) {
                state_[k] = VarState::AtUpper;
                x_[k] = v;
            }
        }
        for (int i = 0; i < rows_; ++i) {
            head_[static_cast<std::size_t>(i)] = n_ + i;
            state_[static_cast<std::size_t>(n_ + i)] = VarState::Basic;
        }
        save_good_basis();
    }

    // lower if finite, else upper, else free at zero
    void place_at_bound(int j) {
        const auto k = static_cast<std::size_t>(j);
        if (lo_[k] == hi_[k]) {
            state_[k] = VarState::Fixed;
            x_[k] = lo_[k];
        } else if (std::isfinite(lo_[k])) {
            state_[k] = VarState::AtLower;
            x_[k] = lo_[k];
        } else if (std::isfinite(hi_[k])) {
            state_[k] = VarState::AtUpper;
            x_[k] = hi_[k];
        } else {
            state_[k] = VarState::Free;
            x_[k] = 0.0;
        }
    }

    void snap_nonbasic() {
        for (int j = 0; j < cols_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (state_[k] == VarState::AtLower || state_[k] == VarState::Fixed) x_[k] = lo_[k];
            if (state_[k] == VarState::AtUpper) x_[k] = hi_[k];
        }
    }

    void perturb_bounds() {
        true_lo_ = lo_;
        true_hi_ = hi_;
        std::mt19937_64 rng(kPerturbationSeed);
        std::uniform_real_distribution<double> unit(0.5, 1.0);
        for (int j = 0; j < cols_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (lo_[k] == hi_[k]) continue;
            if (std::isfinite(lo_[k])) lo_[k] -= kPerturbation * (1.0 + std::abs(lo_[k])) * unit(rng);
            if (std::isfinite(hi_[k])) hi_[k] += kPerturbation * (1.0 + std::abs(hi_[k])) * unit(rng);
        }
        snap_nonbasic();
        perturbed_ = true;
    }

    void restore_bounds() {
        lo_ = true_lo_;
        hi_ = true_hi_;
        snap_nonbasic();
        perturbed_ = false;
        bland_ = false;
        stalled_ = false;
        flat_windows_ = 0;
        watch_phase_ = 0;
        degenerate_run_ = 0;
        refactor();
    }

    // ---- column access -----------------------------------------------------

    template <typename F>
    void for_column(int j, F&& f) const {
        if (j < n_) {
            for (SpMat::InnerIterator it(a_, j); it; ++it) f(static_cast<int>(it.row()), it.value());
        } else {
            f(j - n_, 1.0);
        }
    }

    double column_dot(int j, const Vector& y) const {
        if (j >= n_) return y[j - n_];
        double s = 0.0;
        for (SpMat::InnerIterator it(a_, j); it; ++it) s += it.value() * y[it.row()];
        return s;
    }

    // ---- factorization -----------------------------------------------------

    bool factorize_head() {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(rows_) * 3);
        for (int r = 0; r < rows_; ++r) {
            for_column(head_[static_cast<std::size_t>(r)], [&](int i, double v) { trip.emplace_back(i, r, v); });
        }
        SpMat b(rows_, rows_);
        b.setFromTriplets(trip.begin(), trip.end());
        etas_.clear();
        return lu_.factorize(std::move(b));
    }

    void save_good_basis() {
        good_head_ = head_;
        good_state_ = state_;
    }

    void refactor() {
        if (!factorize_head()) {
            // fall back to the last basis that factorized cleanly
            head_ = good_head_;
            state_ = good_state_;
            snap_nonbasic();
            for (int j = 0; j < cols_; ++j) {
                const auto k = static_cast<std::size_t>(j);
                if (state_[k] == VarState::Free) x_[k] = 0.0;
                if (state_[k] == VarState::Superbasic) x_[k] = std::clamp(x_[k], lo_[k], hi_[k]);
            }
            bland_ = true;
            if (!factorize_head()) {
                throw LpError("degenerate basis: basis matrix is numerically singular after refactorization retry");
            }
        }
        recompute_basic_values();
        save_good_basis();
        since_refactor_ = 0;
        d_valid_ = false;
    }

    void recompute_basic_values() {
        Vector r = Eigen::Map<const Vector>(rhs_.data(), rows_);
        for (int j = 0; j < cols_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (state_[k] != VarState::Basic && x_[k] != 0.0) {
                const double xv = x_[k];
                for_column(j, [&](int i, double v) { r[i] -= v * xv; });
            }
        }
        const Vector xb = ftran(r);
        for (int i = 0; i < rows_; ++i) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = xb[i];
    }

    Vector ftran(const Vector& b) const {
        Vector z = b;
        lu_.solve(z);
        for (const Eta& e : etas_) {
            const double zr = z[e.row] / e.pivot;
            z[e.row] = zr;
            if (zr != 0.0) {
                for (std::size_t t = 0; t < e.idx.size(); ++t) z[e.idx[t]] -= e.val[t] * zr;
            }
        }
        return z;
    }

    Vector btran(Vector c) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = c[it->row];
            for (std::size_t t = 0; t < it->idx.size(); ++t) s -= it->val[t] * c[it->idx[t]];
            c[it->row] = s / it->pivot;
        }
        lu_.solve_transposed(c);
        return c;
    }

    // ---- phases ------------------------------------------------------------

    // Phase-1 costs: -1 below the lower bound, +1 above the upper bound.
    // Returns the total infeasibility.
    double set_phase1_costs() {
        std::fill(phase_cost_.begin(), phase_cost_.end(), 0.0);
        double total = 0.0;
        for (int i = 0; i < rows_; ++i) {
            const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
            if (x_[k] < lo_[k] - cfg_.feas_tol) {
                phase_cost_[k] = -1.0;
                total += lo_[k] - x_[k];
            } else if (x_[k] > hi_[k] + cfg_.feas_tol) {
                phase_cost_[k] = 1.0;
                total += x_[k] - hi_[k];
            }
        }
        return total;
    }

    PhaseResult solve_phases() {
        while (true) {
            if (set_phase1_costs() > 0.0) {
                if (phase_ != 1) reset_devex_weights();
                phase_ = 1;
                d_valid_ = false;
                if (iterate() == PhaseResult::Infeasible) {
                    refactor();
                    if (set_phase1_costs() > 0.0 && no_phase1_candidate()) return PhaseResult::Infeasible;
                }
                continue;
            }
            if (phase_ != 2) reset_devex_weights();
            phase_ = 2;
            d_valid_ = false;
            const PhaseResult r = iterate();
            if (r == PhaseResult::Infeasible) continue;  // drifted out of feasibility
            refactor();
            if (set_phase1_costs() > 0.0) continue;
            if (r == PhaseResult::Optimal && !optimal_after_refactor()) continue;
            return r;
        }
    }

    bool no_phase1_candidate() {
        compute_reduced_costs(phase_cost_);
        return price().col < 0;
    }

    bool optimal_after_refactor() {
        compute_reduced_costs(cost_);
        return price().col < 0;
    }

    Vector duals_for(const std::vector<double>& c) const {
        Vector cb(rows_);
        for (int i = 0; i < rows_; ++i) cb[i] = c[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
        return btran(cb);
    }

    double entering_direction(int j, double d) const {
        switch (state_[static_cast<std::size_t>(j)]) {
            case VarState::AtLower: return d < -cfg_.opt_tol ? 1.0 : 0.0;
            case VarState::AtUpper: return d > cfg_.opt_tol ? -1.0 : 0.0;
            case VarState::Free:
            case VarState::Superbasic: return std::abs(d) > cfg_.opt_tol ? (d < 0.0 ? 1.0 : -1.0) : 0.0;
            default: return 0.0;
        }
    }

    struct Entering {
        int col = -1;
        double dir = 0.0;
        double d = 0.0;
    };

    Entering price() const {
        Entering best;
        double best_score = 0.0;
        for (int j = 0; j < cols_; ++j) {
            const VarState st = state_[static_cast<std::size_t>(j)];
            if (st == VarState::Basic || st == VarState::Fixed) continue;
            const double d = d_[static_cast<std::size_t>(j)];
            const double dir = entering_direction(j, d);
            if (dir == 0.0) continue;
            if (bland_) return Entering{j, dir, d};
            const double score = d * d / weight_[static_cast<std::size_t>(j)];
            if (score > best_score) {
                best_score = score;
                best = Entering{j, dir, d};
            }
        }
        return best;
    }

    struct Leaving {
        int row = -1;  // -1: no basic variable blocks
        double theta = kInf;
        bool to_upper = false;
    };

    // Step limit for basic variable k moving at rate delta. In phase 1 an
    // infeasible variable blocks only when it reaches the violated bound.
    // `slack` widens the bound for the first Harris pass.
    bool step_limit(std::size_t k, double delta, double slack, double& ratio, bool& upper) const {
        const double x = x_[k];
        if (phase_ == 1 && x < lo_[k] - cfg_.feas_tol) {
            if (delta <= 0.0) return false;
            ratio = (lo_[k] - x + slack) / delta;
            upper = false;
            return true;
        }
        if (phase_ == 1 && x > hi_[k] + cfg_.feas_tol) {
            if (delta >= 0.0) return false;
            ratio = (x - hi_[k] + slack) / -delta;
            upper = true;
            return true;
        }
        if (delta < 0.0 && std::isfinite(lo_[k])) {
            ratio = (x - lo_[k] + slack) / -delta;
            upper = false;
            return true;
        }
        if (delta > 0.0 && std::isfinite(hi_[k])) {
            ratio = (hi_[k] - x + slack) / delta;
            upper = true;
            return true;
        }
        return false;
    }

    Leaving ratio_test(const Vector& alpha, const Entering& in) const {
        double theta_max = kInf;
        double ratio = 0.0;
        bool upper = false;
        for (int i = 0; i < rows_; ++i) {
            if (std::abs(alpha[i]) <= kPivotTol) continue;
            const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
            if (step_limit(k, -in.dir * alpha[i], cfg_.feas_tol, ratio, upper)) theta_max = std::min(theta_max, ratio);
        }
        Leaving out;
        if (theta_max == kInf) return out;

        double min_ratio = kInf;
        if (bland_) {
            for (int i = 0; i < rows_; ++i) {
                if (std::abs(alpha[i]) <= kPivotTol) continue;
                const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
                if (step_limit(k, -in.dir * alpha[i], 0.0, ratio, upper)) min_ratio = std::min(min_ratio, ratio);
            }
        }
        double best_abs = 0.0;
        int best_var = -1;
        for (int i = 0; i < rows_; ++i) {
            const double a = alpha[i];
            if (std::abs(a) <= kPivotTol) continue;
            const int var = head_[static_cast<std::size_t>(i)];
            if (!step_limit(static_cast<std::size_t>(var), -in.dir * a, 0.0, ratio, upper)) continue;
            if (ratio > theta_max) continue;
            if (bland_) {
                if (ratio > min_ratio + 1e-12 * (1.0 + std::abs(min_ratio))) continue;
                if (best_var < 0 || var < best_var) {
                    best_var = var;
                    out = Leaving{i, std::max(ratio, 0.0), upper};
                }
            } else if (std::abs(a) > best_abs) {
                best_abs = std::abs(a);
                out = Leaving{i, std::max(ratio, 0.0), upper};
            }
        }
        return out;
    }

    PhaseResult iterate() {
        bool retried_ray = false;
        while (true) {
            if (iterations_ >= cfg_.max_iters) {
                throw LpError("iteration limit: simplex exceeded " + std::to_string(cfg_.max_iters) + " iterations");
            }
            if (since_refactor_ >= cfg_.refactor_interval) {
                refactor();
                const double infeas = set_phase1_costs();
                if (phase_ == 1 && infeas == 0.0) return PhaseResult::Optimal;
                if (phase_ == 2 && infeas > 0.0) return PhaseResult::Infeasible;
            }

            const std::vector<double>& c = phase_ == 1 ? phase_cost_ : cost_;
            if (!d_valid_) compute_reduced_costs(c);
            const Entering in = price();
            if (in.col < 0) {
                if (phase_ == 1) return set_phase1_costs() > 0.0 ? PhaseResult::Infeasible : PhaseResult::Optimal;
                return PhaseResult::Optimal;
            }
            if (iterations_ % 1000 == 0) {
                spdlog::trace("simplex phase {} iter {} objective {:.12g} bland {} degenerate run {}", phase_,
                              iterations_, current_objective(c), bland_, degenerate_run_);
            }

            Vector col = Vector::Zero(rows_);
            for_column(in.col, [&](int i, double v) { col[i] = v; });
            const Vector alpha = ftran(col);

            const auto q = static_cast<std::size_t>(in.col);
            // the updated reduced cost may have drifted; recompute it from the column
            double dq = c[q];
            for (int i = 0; i < rows_; ++i) {
                if (alpha[i] != 0.0) dq -= c[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] * alpha[i];
            }
            d_[q] = dq;
            if (entering_direction(in.col, dq) != in.dir) continue;

            const double range = in.dir > 0.0 ? hi_[q] - x_[q] : x_[q] - lo_[q];
            const Leaving out = ratio_test(alpha, in);
            const bool flip = std::isfinite(range) && range <= out.theta;
            if (!flip && out.row < 0) {
                if (!retried_ray && !etas_.empty()) {
                    // rule out eta-file drift before trusting the ray
                    retried_ray = true;
                    refactor();
                    if (phase_ == 1) set_phase1_costs();
                    continue;
                }
                if (phase_ == 2) {
                    spdlog::debug("simplex: unbounded ray on column {} (d = {:.3g})", in.col, in.d);
                    return PhaseResult::Unbounded;
                }
                throw LpError("degenerate basis: unbounded ray in phase 1");
            }
            retried_ray = false;
            ++iterations_;
            if (phase_ == 1) ++phase1_iterations_;
            const double theta = flip ? range : out.theta;

            // steps far below the tolerances can cycle just like degenerate ones,
            // so the true objective is watched as well
            if (iterations_ - watch_iter_ >= kWatchWindow) {
                const double obj = current_objective(c);
                const bool flat =
                    watch_phase_ == phase_ && watch_objective_ - obj <= kStallTol * std::max(1.0, std::abs(obj));
                flat_windows_ = flat ? flat_windows_ + 1 : 0;
                stalled_ = flat_windows_ >= kStallWindows;
                watch_objective_ = obj;
                watch_iter_ = iterations_;
                watch_phase_ = phase_;
            }
            if (theta <= 1e-12) {
                ++degenerate_run_;
                if (cfg_.anti_cycling && degenerate_run_ >= cfg_.degenerate_switch) bland_ = true;
            } else {
                degenerate_run_ = 0;
                bland_ = false;
            }
            if (cfg_.anti_cycling && stalled_) bland_ = true;

            if (theta != 0.0) {
                for (int i = 0; i < rows_; ++i) {
                    if (alpha[i] != 0.0) {
                        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= in.dir * alpha[i] * theta;
                    }
                }
                x_[q] += in.dir * theta;
            }

            if (flip) {
                state_[q] = in.dir > 0.0 ? VarState::AtUpper : VarState::AtLower;
                x_[q] = in.dir > 0.0 ? hi_[q] : lo_[q];
                if (phase_ == 1 && update_phase1_costs() == 0.0) return PhaseResult::Optimal;
                continue;
            }

            const int r = out.row;
            const auto leave = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
            update_pivot_row(r, alpha[r], in.col, static_cast<int>(leave));
            x_[leave] = out.to_upper ? hi_[leave] : lo_[leave];
            if (lo_[leave] == hi_[leave]) {
                state_[leave] = VarState::Fixed;
            } else {
                state_[leave] = out.to_upper ? VarState::AtUpper : VarState::AtLower;
            }
            state_[q] = VarState::Basic;
            head_[static_cast<std::size_t>(r)] = in.col;

            Eta e;
            e.row = r;
            e.pivot = alpha[r];
            for (int i = 0; i < rows_; ++i) {
                if (i != r && std::abs(alpha[i]) > kDropTol) {
                    e.idx.push_back(i);
                    e.val.push_back(alpha[i]);
                }
            }
            etas_.push_back(std::move(e));
            ++since_refactor_;

            if (phase_ == 1 && update_phase1_costs() == 0.0) return PhaseResult::Optimal;
        }
    }

    // Reduced-cost and devex updates from the pivot row of the outgoing basis.
    void update_pivot_row(int r, double pivot, int entering, int leaving) {
        Vector e = Vector::Zero(rows_);
        e[r] = 1.0;
        const Vector rho = btran(e);
        const auto q = static_cast<std::size_t>(entering);
        const double theta_d = d_[q] / pivot;
        const double wq = weight_[q];
        for (int j = 0; j < cols_; ++j) {
            const VarState st = state_[static_cast<std::size_t>(j)];
            if (st == VarState::Basic || st == VarState::Fixed || j == entering) continue;
            const double arj = column_dot(j, rho);
            if (arj == 0.0) continue;
            d_[static_cast<std::size_t>(j)] -= theta_d * arj;
            const double ratio = arj / pivot;
            double& w = weight_[static_cast<std::size_t>(j)];
            w = std::max(w, ratio * ratio * wq);
        }
        d_[static_cast<std::size_t>(leaving)] = -theta_d;
        d_[q] = 0.0;
        weight_[static_cast<std::size_t>(leaving)] = std::max(wq / (pivot * pivot), 1.0);
    }

    void compute_reduced_costs(const std::vector<double>& c) {
        const Vector y = duals_for(c);
        for (int j = 0; j < cols_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            d_[k] = state_[k] == VarState::Basic ? 0.0 : c[k] - column_dot(j, y);
        }
        d_valid_ = true;
    }

    // Refreshes the phase-1 costs; reduced costs are recomputed only when
    // the cost vector changed.
    double update_phase1_costs() {
        previous_cost_ = phase_cost_;
        const double total = set_phase1_costs();
        if (previous_cost_ != phase_cost_) d_valid_ = false;
        return total;
    }

    void reset_devex_weights() { std::fill(weight_.begin(), weight_.end(), 1.0); }

    double current_objective(const std::vector<double>& c) const {
        double obj = 0.0;
        for (int j = 0; j < cols_; ++j) obj += c[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
        return obj;
    }

    // ---- results -----------------------------------------------------------

    void fill_primal(LpSolution& sol) const {
        sol.x.assign(static_cast<std::size_t>(n_), 0.0);
        double obj = 0.0;
        for (int j = 0; j < n_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            double v = x_[k] * col_scale_[k];
            // nonbasic values sit exactly on their original bounds
            if (state_[k] == VarState::AtLower || state_[k] == VarState::Fixed) v = lp_.lower()[k];
            if (state_[k] == VarState::AtUpper) v = lp_.upper()[k];
            sol.x[k] = v;
            obj += lp_.cost()[k] * v;
        }
        sol.objective_value = obj;
        sol.basis = head_;
    }

    void fill_duals(LpSolution& sol) const {
        const Vector y = duals_for(cost_);
        sol.duals.assign(static_cast<std::size_t>(rows_), 0.0);
        for (int i = 0; i < rows_; ++i) {
            sol.duals[static_cast<std::size_t>(i)] = y[i] * row_scale_[static_cast<std::size_t>(i)] / cost_scale_;
        }
        sol.reduced_costs.assign(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < n_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (state_[k] == VarState::Basic) continue;
            sol.reduced_costs[k] = (cost_[k] - column_dot(j, y)) / (col_scale_[k] * cost_scale_);
        }
    }

    const LinearProgram& lp_;
    SimplexConfig cfg_;

    int n_ = 0, neq_ = 0, nle_ = 0, rows_ = 0, cols_ = 0;
    SpMat a_;
    std::vector<double> rhs_, row_scale_, col_scale_;
    double cost_scale_ = 1.0;
    std::vector<double> lo_, hi_, true_lo_, true_hi_, cost_, phase_cost_;
    std::vector<double> x_;
    std::vector<double> weight_;
    std::vector<double> d_;  ///< reduced costs for the current phase
    std::vector<double> previous_cost_;
    bool d_valid_ = false;
    std::vector<VarState> state_;
    std::vector<int> head_;
    bool perturbed_ = false;

    std::vector<int> good_head_;
    std::vector<VarState> good_state_;

    KluFactor lu_;
    std::vector<Eta> etas_;

    int phase_ = 1;
    std::size_t iterations_ = 0;
    std::size_t phase1_iterations_ = 0;
    int since_refactor_ = 0;
    int degenerate_run_ = 0;
    bool bland_ = false;
    double watch_objective_ = std::numeric_limits<double>::infinity();
    std::size_t watch_iter_ = 0;
    int watch_phase_ = 0;
    bool stalled_ = false;
    int flat_windows_ = 0;
};

}  // namespace

LpSolution solve_simplex(const LinearProgram& lp, const SimplexConfig& config) {
    lp.validate();
    if (lp.num_equalities() + lp.num_inequalities() == 0) {
        // no rows: every variable sits at its cheaper bound
        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.x.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
        sol.reduced_costs = lp.cost();
        for (int j = 0; j < lp.num_vars(); ++j) {
            const auto k = static_cast<std::size_t>(j);
            const double c = lp.cost()[k];
            const double lo = lp.lower()[k], hi = lp.upper()[k];
            double v = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
            if (c > 0.0) v = lo;
            if (c < 0.0) v = hi;
            if (!std::isfinite(v)) {
                sol.status = LpStatus::Unbounded;
                v = 0.0;
            }
            sol.x[k] = v;
            sol.objective_value += c * v;
        }
        return sol;
    }
    RevisedSimplex solver(lp, config);
    return solver.run();
}

}  // namespace trussrob::lp
