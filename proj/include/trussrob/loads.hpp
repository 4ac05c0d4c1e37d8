#pragma once

#include "trussrob/geometry.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trussrob {

class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nominal nodal forces of one load case plus their reduced (free-DOF) vector.
struct LoadCase {
    int id = 0;
    std::map<int, Vec> forces;  ///< node id -> force, N
    Vec reduced;                ///< length m; zero on unloaded free DOFs

    /// Force acting on `node` read back from a reduced vector (zero on fixed axes).
    static Vec node_part(const GroundStructure& gs, const Vec& reduced, int node);
};

/// Builds a load case, checking that every loaded node exists, is not fully
/// fixed, and has no load component on a fixed axis.
LoadCase make_load_case(const GroundStructure& gs, int id, std::map<int, Vec> forces);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool degenerate() const { return lo == hi; }
};

/// Key of one perturbed DOF: (node id, axis).
using NodeAxis = std::pair<int, int>;

/// Axis-aligned interval perturbations of one load case's loaded nodes.
struct PerturbationBox {
    int load_case = 0;
    std::map<NodeAxis, Interval> deltas;
};

/// What the relative half-width p is measured against.
enum class BoxBase {
    LoadCase,  ///< |f| of the whole reduced load vector, the same at every loaded node
    Force,     ///< |f_i| of each node's own force
};

const char* to_string(BoxBase base);
BoxBase box_base_from_string(const std::string& name);  ///< "load_case" or "force"

/// Symmetric box [-p*|f|, +p*|f|] on every free axis of every loaded node.
PerturbationBox build_relative_box(const GroundStructure& gs, const LoadCase& lc, double fraction,
                                   BoxBase base = BoxBase::LoadCase);

/// Checks interval ordering and that deltas only touch loaded, free DOFs.
void validate_box(const GroundStructure& gs, const PerturbationBox& box, const LoadCase& lc);

struct VertexProvenance {
    int load_case = 0;
    std::uint64_t corner = 0;  ///< bit t set = upper end of the t-th non-degenerate interval (MSB first)
};

/// Extreme loads: the corners of one or more perturbation boxes.
struct VertexLoadSet {
    std::vector<Vec> vertices;
    std::vector<VertexProvenance> provenance;

    std::size_t size() const { return vertices.size(); }
    bool empty() const { return vertices.empty(); }
};

inline constexpr std::size_t kDefaultVertexCap = 4096;

/// Single vertex set holding the nominal reduced load of `lc`.
VertexLoadSet nominal_vertex_set(const LoadCase& lc);

/// All corners of `box` added to the nominal load. Zero-width intervals do
/// not double the count. Order: the first interval (lowest node, axis) is the
/// most significant selector, low end first.
VertexLoadSet enumerate_vertices(const GroundStructure& gs, const PerturbationBox& box, const LoadCase& lc,
                                 std::size_t cap = kDefaultVertexCap);

/// Multiplies every vertex by max_node |nominal force| / max_{vertex,node} |vertex force|.
VertexLoadSet rescale_to_nominal_max(const GroundStructure& gs, const VertexLoadSet& vls, const LoadCase& lc);

/// The scale factor applied by rescale_to_nominal_max.
double nominal_max_scale(const GroundStructure& gs, const VertexLoadSet& vls, const LoadCase& lc);

/// Concatenation with exact-duplicate removal; first occurrence wins.
VertexLoadSet union_vertex_sets(const std::vector<VertexLoadSet>& sets);

/// sum_j alpha_j * vertex_j. Coefficients must be nonnegative and sum to 1.
Vec convex_combination(const std::vector<Vec>& vertices, const std::vector<double>& alpha);

}  // namespace trussrob
