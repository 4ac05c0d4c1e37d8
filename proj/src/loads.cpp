#include "trussrob/loads.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace trussrob {

Vec LoadCase::node_part(const GroundStructure& gs, const Vec& reduced, int node) {
    const int d = gs.dimension();
    Vec out = Vec::Zero(d);
    for (int k = 0; k < d; ++k) {
        if (const int r = gs.dof(node, k); r >= 0) {
            out[k] = reduced[r];
        }
    }
    return out;
}

LoadCase make_load_case(const GroundStructure& gs, int id, std::map<int, Vec> forces) {
    LoadCase lc;
    lc.id = id;
    lc.reduced = Vec::Zero(gs.num_free_dofs());
    const int d = gs.dimension();
    for (const auto& [node, force] : forces) {
        if (node < 0 || node >= gs.num_nodes()) {
            throw LoadError("load case " + std::to_string(id) + ": node " + std::to_string(node) + " does not exist");
        }
        if (force.size() != d) {
            throw LoadError("load case " + std::to_string(id) + ": force at node " + std::to_string(node) +
                            " has wrong dimension");
        }
        if (gs.nodes()[static_cast<std::size_t>(node)].fully_fixed()) {
            throw LoadError("load case " + std::to_string(id) + ": node " + std::to_string(node) +
                            " is fully fixed");
        }
        for (int k = 0; k < d; ++k) {
            const int r = gs.dof(node, k);
            if (r < 0) {
                if (force[k] != 0.0) {
                    throw LoadError("load case " + std::to_string(id) + ": force on fixed axis " +
                                    std::to_string(k) + " of node " + std::to_string(node));
                }
                continue;
            }
            lc.reduced[r] += force[k];
        }
    }
    lc.forces = std::move(forces);
    return lc;
}

const char* to_string(BoxBase base) { return base == BoxBase::Force ? "force" : "load_case"; }

BoxBase box_base_from_string(const std::string& name) {
    if (name == "load_case") return BoxBase::LoadCase;
    if (name == "force") return BoxBase::Force;
    throw LoadError("unknown perturbation base '" + name + "' (expected load_case or force)");
}

PerturbationBox build_relative_box(const GroundStructure& gs, const LoadCase& lc, double fraction, BoxBase base) {
    if (!(fraction >= 0.0)) {
        throw LoadError("relative perturbation fraction must be >= 0");
    }
    if (lc.forces.empty()) {
        throw LoadError("load case " + std::to_string(lc.id) + " has no loaded nodes");
    }
    const double case_delta = fraction * lc.reduced.norm();
    PerturbationBox box;
    box.load_case = lc.id;
    for (const auto& [node, force] : lc.forces) {
        const double delta =
            base == BoxBase::Force ? fraction * LoadCase::node_part(gs, lc.reduced, node).norm() : case_delta;
        for (int k = 0; k < gs.dimension(); ++k) {
            if (gs.dof(node, k) >= 0) {
                box.deltas[{node, k}] = Interval{-delta, delta};
            }
        }
    }
    return box;
}

void validate_box(const GroundStructure& gs, const PerturbationBox& box, const LoadCase& lc) {
    if (box.load_case != lc.id) {
        throw LoadError("perturbation box belongs to load case " + std::to_string(box.load_case) +
                        ", not " + std::to_string(lc.id));
    }
    for (const auto& [key, iv] : box.deltas) {
        const auto [node, axis] = key;
        if (!(iv.lo <= iv.hi)) {
            throw LoadError("perturbation interval with lo > hi at node " + std::to_string(node));
        }
        if (!lc.forces.contains(node)) {
            throw LoadError("perturbation at unloaded node " + std::to_string(node));
        }
        if (axis < 0 || axis >= gs.dimension() || gs.dof(node, axis) < 0) {
            throw LoadError("perturbation on fixed or invalid axis at node " + std::to_string(node));
        }
    }
}

VertexLoadSet nominal_vertex_set(const LoadCase& lc) {
    VertexLoadSet out;
    out.vertices.push_back(lc.reduced);
    out.provenance.push_back({lc.id, 0});
    return out;
}

VertexLoadSet enumerate_vertices(const GroundStructure& gs, const PerturbationBox& box, const LoadCase& lc,
                                 std::size_t cap) {
    validate_box(gs, box, lc);

    struct Active {
        int row;
        Interval iv;
    };
    std::vector<Active> active;
    Vec base = lc.reduced;
    for (const auto& [key, iv] : box.deltas) {
        const int row = gs.dof(key.first, key.second);
        if (iv.degenerate()) {
            base[row] += iv.lo;
        } else {
            active.push_back({row, iv});
        }
    }
    if (active.size() >= 63 || (std::uint64_t{1} << active.size()) > cap) {
        throw LoadError("uncertainty set too large: 2^" + std::to_string(active.size()) +
                        " vertices exceed the cap of " + std::to_string(cap));
    }

    const std::size_t k = active.size();
    const std::uint64_t count = std::uint64_t{1} << k;
    VertexLoadSet out;
    out.vertices.reserve(count);
    out.provenance.reserve(count);
    for (std::uint64_t corner = 0; corner < count; ++corner) {
        Vec v = base;
        for (std::size_t t = 0; t < k; ++t) {
            const bool upper = (corner >> (k - 1 - t)) & 1U;
            v[active[t].row] += upper ? active[t].iv.hi : active[t].iv.lo;
        }
        out.vertices.push_back(std::move(v));
        out.provenance.push_back({lc.id, corner});
    }
    return out;
}

double nominal_max_scale(const GroundStructure& gs, const VertexLoadSet& vls, const LoadCase& lc) {
    if (vls.empty()) {
        throw LoadError("cannot rescale an empty vertex set");
    }
    double nominal_max = 0.0;
    for (const auto& [node, force] : lc.forces) {
        nominal_max = std::max(nominal_max, LoadCase::node_part(gs, lc.reduced, node).norm());
    }
    double vertex_max = 0.0;
    for (const Vec& v : vls.vertices) {
        for (const auto& [node, force] : lc.forces) {
            vertex_max = std::max(vertex_max, LoadCase::node_part(gs, v, node).norm());
        }
    }
    if (vertex_max == 0.0) {
        throw LoadError("cannot rescale: all vertex loads are zero");
    }
    return nominal_max / vertex_max;
}

VertexLoadSet rescale_to_nominal_max(const GroundStructure& gs, const VertexLoadSet& vls, const LoadCase& lc) {
    const double gamma = nominal_max_scale(gs, vls, lc);
    VertexLoadSet out = vls;
    if (gamma == 1.0) {
        return out;
    }
    for (Vec& v : out.vertices) {
        v *= gamma;
    }
    return out;
}

VertexLoadSet union_vertex_sets(const std::vector<VertexLoadSet>& sets) {
    VertexLoadSet out;
    if (sets.empty()) {
        return out;
    }
    std::optional<Eigen::Index> dim;
    std::set<std::vector<double>> seen;
    for (const auto& s : sets) {
        for (std::size_t i = 0; i < s.vertices.size(); ++i) {
            const Vec& v = s.vertices[i];
            if (dim && *dim != v.size()) {
                throw LoadError("union of vertex sets with mixed dimensions");
            }
            dim = v.size();
            std::vector<double> key(v.data(), v.data() + v.size());
            if (!seen.insert(std::move(key)).second) {
                continue;
            }
            out.vertices.push_back(v);
            out.provenance.push_back(s.provenance[i]);
        }
    }
    return out;
}

Vec convex_combination(const std::vector<Vec>& vertices, const std::vector<double>& alpha) {
    if (vertices.empty() || vertices.size() != alpha.size()) {
        throw LoadError("convex combination: coefficient count does not match vertex count");
    }
    double sum = 0.0;
    for (double a : alpha) {
        if (a < 0.0) {
            throw LoadError("convex combination: negative coefficient");
        }
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw LoadError("convex combination: coefficients do not sum to 1");
    }
    Vec out = Vec::Zero(vertices.front().size());
    for (std::size_t j = 0; j < vertices.size(); ++j) {
        if (alpha[j] != 0.0) {
            out += alpha[j] * vertices[j];
        }
    }
    return out;
}

}  // namespace trussrob
