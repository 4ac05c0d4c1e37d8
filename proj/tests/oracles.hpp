#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's solver; they rely on closed forms or brute force.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

/// min c^T x s.t. A x <= b (bounds folded into A), A_eq x = b_eq, by trying
/// every choice of active rows that completes a square system. Only for
/// tiny, bounded LPs.
struct DenseLp {
    Eigen::VectorXd c;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
};

inline std::optional<double> vertex_enumeration(const DenseLp& lp, double tol = 1e-9) {
    const int n = static_cast<int>(lp.c.size());
    const int m_eq = static_cast<int>(lp.a_eq.rows());
    const int m = static_cast<int>(lp.a.rows());
    const int need = n - m_eq;
    if (need < 0 || need > m) return std::nullopt;

    std::optional<double> best;
    std::vector<int> pick(static_cast<std::size_t>(need));
    for (int i = 0; i < need; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
        Eigen::MatrixXd sys(n, n);
        Eigen::VectorXd rhs(n);
        if (m_eq > 0) {
            sys.topRows(m_eq) = lp.a_eq;
            rhs.head(m_eq) = lp.b_eq;
        }
        for (int i = 0; i < need; ++i) {
            sys.row(m_eq + i) = lp.a.row(pick[static_cast<std::size_t>(i)]);
            rhs[m_eq + i] = lp.b[pick[static_cast<std::size_t>(i)]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
        if (lu.isInvertible()) {
            const Eigen::VectorXd x = lu.solve(rhs);
            bool ok = ((lp.a * x - lp.b).array() <= tol * (1.0 + lp.b.cwiseAbs().array())).all();
            if (m_eq > 0) ok = ok && (lp.a_eq * x - lp.b_eq).cwiseAbs().maxCoeff() <= tol * (1.0 + lp.b_eq.cwiseAbs().maxCoeff());
            if (ok) {
                const double v = lp.c.dot(x);
                if (!best || v < *best) best = v;
            }
        }
        int i = need - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - need + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < need; ++k) pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
    }
    return best;
}

/// Three-bar structure with supports (0,1), (0,2), (0,3) and free node (1,2)
/// under the box [fx - h, fx + h] x [-h, h]. The diagonals must carry the
/// vertical load h in a tension/compression pair, the horizontal bar the
/// largest horizontal load.
struct ThreeBarRobust {
    double s_diagonal;
    double s_horizontal;
    double volume;
};

inline ThreeBarRobust three_bar_robust(double fx, double h, double sigma) {
    ThreeBarRobust r{};
    // vertical balance: 2 * t / sqrt(2) = h with equal and opposite diagonal forces t
    r.s_diagonal = h / std::sqrt(2.0) / sigma;
    r.s_horizontal = (fx + h) / sigma;
    r.volume = r.s_horizontal * 1.0 + 2.0 * r.s_diagonal * std::sqrt(2.0);
    return r;
}

/// Ground-structure bar count by brute force over all node pairs of a
/// tensor grid, with the fixed-fixed and open-segment rules.
template <class IsFixed>
int grid_bar_count(const std::vector<std::vector<double>>& axes, IsFixed fixed,
                   double max_length = std::numeric_limits<double>::infinity()) {
    std::vector<Eigen::VectorXd> pts;
    const int d = static_cast<int>(axes.size());
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        Eigen::VectorXd p(d);
        for (int k = 0; k < d; ++k) p[k] = axes[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        pts.push_back(p);
        int k = d - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == axes[static_cast<std::size_t>(k)].size()) {
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    int count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (fixed(pts[i]) && fixed(pts[j])) continue;
            const Eigen::VectorXd seg = pts[j] - pts[i];
            if (seg.norm() > max_length + 1e-12) continue;
            bool blocked = false;
            for (std::size_t k = 0; k < pts.size() && !blocked; ++k) {
                if (k == i || k == j) continue;
                const Eigen::VectorXd rel = pts[k] - pts[i];
                const double t = rel.dot(seg) / seg.squaredNorm();
                if (t <= 0.0 || t >= 1.0) continue;
                blocked = (rel - t * seg).norm() < 1e-9;
            }
            if (!blocked) ++count;
        }
    }
    return count;
}

}  // namespace oracle
