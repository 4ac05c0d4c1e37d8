#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trussrob {

using Vec = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Raised for malformed structures (bad node references, empty bar sets, ...).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Node {
    int id = 0;
    Vec position;
    std::vector<bool> fixed;  ///< one flag per axis, true = support in that axis

    bool fully_fixed() const;
    bool fully_free() const;
};

struct Bar {
    int id = 0;
    int a = 0;
    int b = 0;
    double length = 0.0;
    Vec direction;  ///< unit vector from node a to node b
};

/// Nodes, bars and the free-DOF numbering of a d-dimensional truss.
///
/// Free DOFs are numbered by iterating nodes in id order and axes in x, y(, z)
/// order, skipping fixed axes. All data is immutable after construction.
class GroundStructure {
public:
    /// Validates the node set and builds bars from unordered endpoint pairs.
    /// Throws GeometryError on duplicate bars, dangling references, a != b
    /// violations, dimension mismatches or a structure without free DOFs.
    GroundStructure(int dimension, std::vector<Node> nodes,
                    const std::vector<std::pair<int, int>>& bar_endpoints);

    int dimension() const { return dimension_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Bar>& bars() const { return bars_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_bars() const { return static_cast<int>(bars_.size()); }
    int num_free_dofs() const { return num_free_dofs_; }

    /// Row index of (node, axis) in the reduced system, or -1 when fixed.
    int dof(int node, int axis) const { return dof_map_[static_cast<std::size_t>(node * dimension_ + axis)]; }

    Vec lengths() const;

    /// Node id whose position matches `position` within `tol`, if any.
    std::optional<int> find_node(const Vec& position, double tol = 1e-9) const;

private:
    int dimension_;
    std::vector<Node> nodes_;
    std::vector<Bar> bars_;
    std::vector<int> dof_map_;
    int num_free_dofs_ = 0;
};

/// Euclidean distance between two distinct points. Throws on coincident points.
double bar_length(const Vec& a, const Vec& b);

/// Support assignment for a grid node: returns per-axis fixed flags.
using SupportRule = std::function<std::vector<bool>(const Vec& position)>;

struct GridSpec {
    std::vector<std::vector<double>> axes;  ///< coordinate list per axis
    SupportRule supports;
    std::optional<double> max_bar_length;
    bool exclude_collinear = true;
    bool exclude_fixed_fixed = true;
};

/// Full ground structure over a tensor grid.
///
/// Candidate bars are all unordered node pairs, filtered by (in order) the
/// fixed-fixed rule, the length cap and the collinearity rule: a pair is
/// dropped when some other grid node lies on the open segment between its
/// endpoints within 1e-9 m.
///
/// With the rules above the 3x3x3 grid of the transmission tower top with
/// four supports gives 298 bars; 294 appears in the literature for the same
/// description.
GroundStructure generate_grid_ground_structure(const GridSpec& spec);

/// True when `p` lies strictly between `a` and `b` on their segment, within `tol`.
bool on_open_segment(const Vec& a, const Vec& b, const Vec& p, double tol = 1e-9);

/// Reduced geometry (equilibrium) matrix C, free DOFs x bars.
///
/// Column k holds +u at the free rows of endpoint b and -u at the free rows of
/// endpoint a, u being the bar's unit direction, so that C w = f with tension
/// positive member forces w and external loads f.
struct GeometryMatrix {
    SparseMatrix matrix;

    int rows() const { return static_cast<int>(matrix.rows()); }
    int cols() const { return static_cast<int>(matrix.cols()); }
};

GeometryMatrix assemble_geometry_matrix(const GroundStructure& gs);

/// Unreduced equilibrium matrix over all node axes (N*d x n), before support
/// rows are deleted. Row index is node * d + axis.
SparseMatrix assemble_full_equilibrium_matrix(const GroundStructure& gs);

}  // namespace trussrob
