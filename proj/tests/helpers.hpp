#pragma once

#include "trussrob/geometry.hpp"
#include "trussrob/loads.hpp"
#include "trussrob/truss_opt.hpp"

#include <initializer_list>
#include <vector>

namespace testing_support {

inline trussrob::Vec vec(std::initializer_list<double> x) {
    trussrob::Vec v(static_cast<Eigen::Index>(x.size()));
    Eigen::Index i = 0;
    for (double e : x) v[i++] = e;
    return v;
}

inline std::vector<bool> flags(bool f, int d) { return std::vector<bool>(static_cast<std::size_t>(d), f); }

/// Supports (0,1), (0,2), (0,3); free node (1,2); bars ordered bottom to top.
inline trussrob::GroundStructure three_bar() {
    using trussrob::Node;
    std::vector<Node> nodes = {
        {0, vec({0, 1}), flags(true, 2)},
        {1, vec({0, 2}), flags(true, 2)},
        {2, vec({0, 3}), flags(true, 2)},
        {3, vec({1, 2}), flags(false, 2)},
    };
    return trussrob::GroundStructure(2, nodes, {{0, 3}, {1, 3}, {2, 3}});
}

inline trussrob::LoadCase three_bar_load(const trussrob::GroundStructure& gs, double fx, double fy, int id = 0) {
    return trussrob::make_load_case(gs, id, {{3, vec({fx, fy})}});
}

}  // namespace testing_support
