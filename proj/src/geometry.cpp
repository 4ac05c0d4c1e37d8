#include "trussrob/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace trussrob {

bool Node::fully_fixed() const {
    return std::all_of(fixed.begin(), fixed.end(), [](bool f) { return f; });
}

bool Node::fully_free() const {
    return std::none_of(fixed.begin(), fixed.end(), [](bool f) { return f; });
}

double bar_length(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw GeometryError("bar_length: dimension mismatch");
    }
    const double len = (b - a).norm();
    if (!(len > 0.0)) {
        throw GeometryError("bar_length: coincident nodes");
    }
    return len;
}

GroundStructure::GroundStructure(int dimension, std::vector<Node> nodes,
                                 const std::vector<std::pair<int, int>>& bar_endpoints)
    : dimension_(dimension), nodes_(std::move(nodes)) {
    if (dimension_ != 2 && dimension_ != 3) {
        throw GeometryError("dimension must be 2 or 3, got " + std::to_string(dimension_));
    }
    if (nodes_.empty()) {
        throw GeometryError("structure has no nodes");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.id != static_cast<int>(i)) {
            throw GeometryError("node ids must be dense 0..N-1; node at index " + std::to_string(i) +
                                " has id " + std::to_string(n.id));
        }
        if (n.position.size() != dimension_ || static_cast<int>(n.fixed.size()) != dimension_) {
            throw GeometryError("node " + std::to_string(n.id) + " does not match dimension " +
                                std::to_string(dimension_));
        }
    }

    dof_map_.assign(nodes_.size() * static_cast<std::size_t>(dimension_), -1);
    for (const Node& n : nodes_) {
        for (int k = 0; k < dimension_; ++k) {
            if (!n.fixed[static_cast<std::size_t>(k)]) {
                dof_map_[static_cast<std::size_t>(n.id * dimension_ + k)] = num_free_dofs_++;
            }
        }
    }
    if (num_free_dofs_ == 0) {
        throw GeometryError("fully constrained: structure has no free degrees of freedom");
    }

    std::set<std::pair<int, int>> seen;
    bars_.reserve(bar_endpoints.size());
    for (const auto& [a, b] : bar_endpoints) {
        if (a < 0 || b < 0 || a >= num_nodes() || b >= num_nodes()) {
            throw GeometryError("bar references missing node (" + std::to_string(a) + ", " +
                                std::to_string(b) + ")");
        }
        if (a == b) {
            throw GeometryError("bar endpoints must differ (node " + std::to_string(a) + ")");
        }
        if (!seen.insert(std::minmax(a, b)).second) {
            throw GeometryError("duplicate bar (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        Bar bar;
        bar.id = static_cast<int>(bars_.size());
        bar.a = a;
        bar.b = b;
        const Vec& pa = nodes_[static_cast<std::size_t>(a)].position;
        const Vec& pb = nodes_[static_cast<std::size_t>(b)].position;
        bar.length = bar_length(pa, pb);
        bar.direction = (pb - pa) / bar.length;
        bars_.push_back(std::move(bar));
    }
    if (bars_.empty()) {
        throw GeometryError("no bars: ground structure is empty");
    }
}

Vec GroundStructure::lengths() const {
    Vec l(num_bars());
    for (const Bar& b : bars_) {
        l[b.id] = b.length;
    }
    return l;
}

std::optional<int> GroundStructure::find_node(const Vec& position, double tol) const {
    if (position.size() != dimension_) {
        return std::nullopt;
    }
    for (const Node& n : nodes_) {
        if ((n.position - position).lpNorm<Eigen::Infinity>() <= tol) {
            return n.id;
        }
    }
    return std::nullopt;
}

bool on_open_segment(const Vec& a, const Vec& b, const Vec& p, double tol) {
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return false;
    }
    const double t = (p - a).dot(ab) / len2;
    const double len = std::sqrt(len2);
    // strictly inside: away from both endpoints by more than tol
    if (t * len <= tol || (1.0 - t) * len <= tol) {
        return false;
    }
    const Vec foot = a + t * ab;
    return (p - foot).norm() <= tol;
}

GroundStructure generate_grid_ground_structure(const GridSpec& spec) {
    const int d = static_cast<int>(spec.axes.size());
    if (d != 2 && d != 3) {
        throw GeometryError("grid must have 2 or 3 axes");
    }
    for (const auto& axis : spec.axes) {
        if (axis.empty()) {
            throw GeometryError("grid axis without coordinates");
        }
    }
    if (!spec.supports) {
        throw GeometryError("grid requires a support rule");
    }

    std::vector<Node> nodes;
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    // x slowest, last axis fastest
    while (true) {
        Node n;
        n.id = static_cast<int>(nodes.size());
        n.position.resize(d);
        for (int k = 0; k < d; ++k) {
            n.position[k] = spec.axes[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
        }
        n.fixed = spec.supports(n.position);
        if (static_cast<int>(n.fixed.size()) != d) {
            throw GeometryError("support rule returned wrong number of flags");
        }
        nodes.push_back(std::move(n));

        int k = d - 1;
        while (k >= 0) {
            auto& i = idx[static_cast<std::size_t>(k)];
            if (++i < spec.axes[static_cast<std::size_t>(k)].size()) {
                break;
            }
            i = 0;
            --k;
        }
        if (k < 0) {
            break;
        }
    }

    const bool any_support = std::any_of(nodes.begin(), nodes.end(), [](const Node& n) {
        return std::any_of(n.fixed.begin(), n.fixed.end(), [](bool f) { return f; });
    });
    if (!any_support) {
        throw GeometryError("grid has no support degree of freedom");
    }
    const bool any_free = std::any_of(nodes.begin(), nodes.end(), [](const Node& n) { return !n.fully_fixed(); });
    if (!any_free) {
        throw GeometryError("fully constrained: every grid node is fixed");
    }

    constexpr double tol = 1e-9;
    std::vector<std::pair<int, int>> pairs;
    const int count = static_cast<int>(nodes.size());
    for (int i = 0; i < count; ++i) {
        for (int j = i + 1; j < count; ++j) {
            const Node& a = nodes[static_cast<std::size_t>(i)];
            const Node& b = nodes[static_cast<std::size_t>(j)];
            if (spec.exclude_fixed_fixed && a.fully_fixed() && b.fully_fixed()) {
                continue;
            }
            if (spec.max_bar_length && (b.position - a.position).norm() > *spec.max_bar_length + tol) {
                continue;
            }
            if (spec.exclude_collinear) {
                bool blocked = false;
                for (int k = 0; k < count && !blocked; ++k) {
                    if (k != i && k != j) {
                        blocked = on_open_segment(a.position, b.position, nodes[static_cast<std::size_t>(k)].position, tol);
                    }
                }
                if (blocked) {
                    continue;
                }
            }
            pairs.emplace_back(i, j);
        }
    }
    if (pairs.empty()) {
        throw GeometryError("no bars: every candidate pair was excluded");
    }
    return GroundStructure(d, std::move(nodes), pairs);
}

SparseMatrix assemble_full_equilibrium_matrix(const GroundStructure& gs) {
    const int d = gs.dimension();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(gs.num_bars()) * 2 * static_cast<std::size_t>(d));
    for (const Bar& bar : gs.bars()) {
        for (int k = 0; k < d; ++k) {
            const double u = bar.direction[k];
            if (u == 0.0) {
                continue;
            }
            triplets.emplace_back(bar.b * d + k, bar.id, u);
            triplets.emplace_back(bar.a * d + k, bar.id, -u);
        }
    }
    SparseMatrix full(gs.num_nodes() * d, gs.num_bars());
    full.setFromTriplets(triplets.begin(), triplets.end());
    return full;
}

GeometryMatrix assemble_geometry_matrix(const GroundStructure& gs) {
    const int d = gs.dimension();
    std::vector<Eigen::Triplet<double>> triplets;
    for (const Bar& bar : gs.bars()) {
        for (int k = 0; k < d; ++k) {
            const double u = bar.direction[k];
            if (u == 0.0) {
                continue;
            }
            if (const int rb = gs.dof(bar.b, k); rb >= 0) {
                triplets.emplace_back(rb, bar.id, u);
            }
            if (const int ra = gs.dof(bar.a, k); ra >= 0) {
                triplets.emplace_back(ra, bar.id, -u);
            }
        }
    }
    GeometryMatrix c;
    c.matrix.resize(gs.num_free_dofs(), gs.num_bars());
    c.matrix.setFromTriplets(triplets.begin(), triplets.end());
    c.matrix.makeCompressed();
    return c;
}

}  // namespace trussrob
