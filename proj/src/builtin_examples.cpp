#include "trussrob/problem_file.hpp"

#include <cmath>
#include <stdexcept>

namespace trussrob {

namespace {

using Pattern = std::vector<std::optional<double>>;

LoadCaseSpec point_load_case(int id, std::vector<std::pair<std::vector<double>, std::vector<double>>> loads) {
    LoadCaseSpec lc;
    lc.id = id;
    for (auto& [pos, force] : loads) {
        LoadSpec l;
        l.position = std::move(pos);
        l.force = std::move(force);
        lc.loads.push_back(std::move(l));
    }
    return lc;
}

ProblemFile example1() {
    ProblemFile p;
    p.name = "example1";
    p.dimension = 2;
    p.nodes = {
        {0, {0.0, 1.0}, {true, true}},
        {1, {0.0, 2.0}, {true, true}},
        {2, {0.0, 3.0}, {true, true}},
        {3, {1.0, 2.0}, {false, false}},
    };
    p.bars = {{0, 3}, {1, 3}, {2, 3}};
    LoadCaseSpec lc;
    lc.loads.push_back({3, std::nullopt, {1e4, 0.0}});
    p.load_cases.push_back(lc);
    p.uncertainty = UncertaintySpec{0.1, false};
    return p;
}

ProblemFile example3() {
    ProblemFile p;
    p.name = "example3";
    p.dimension = 3;
    GeneratorSpec g;
    g.axes = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    g.supports.push_back({Pattern{1.0, std::nullopt, std::nullopt}, {true, true, true}});
    p.generator = g;
    p.load_cases.push_back(point_load_case(0, {{{3, 2, 1}, {0, 0, -4e4}}}));
    p.uncertainty = UncertaintySpec{0.1, true};
    return p;
}

ProblemFile example4() {
    ProblemFile p;
    p.name = "example4";
    p.dimension = 3;
    GeneratorSpec g;
    const std::vector<double> base = {0.0, 1.0 / 7.0, 2.0 / 7.0};
    std::vector<double> height;
    for (int i = 0; i <= 7; ++i) height.push_back(i / 7.0);
    g.axes = {base, base, height};
    for (double x : {base[0], base[2]}) {
        for (double y : {base[0], base[2]}) {
            g.supports.push_back({Pattern{x, y, 0.0}, {true, true, true}});
        }
    }
    g.max_bar_length = std::sqrt(3.0) / 7.0;
    p.generator = g;
    p.load_cases.push_back(point_load_case(0, {{{1.0 / 7.0, 1.0 / 7.0, 1.0}, {0, 0, -4e4}}}));
    p.uncertainty = UncertaintySpec{0.5, true};
    return p;
}

ProblemFile example5() {
    ProblemFile p;
    p.name = "example5";
    p.dimension = 3;
    GeneratorSpec g;
    g.axes = {{0, 0.5, 1}, {0, 0.5, 1}, {0, 0.5, 1}};
    g.supports.push_back({Pattern{0.5, 0.0, 0.0}, {true, true, true}});
    g.supports.push_back({Pattern{0.5, 1.0, 0.0}, {true, true, true}});
    g.supports.push_back({Pattern{0.0, 0.5, 0.0}, {true, true, true}});
    g.supports.push_back({Pattern{1.0, 0.5, 0.0}, {true, true, true}});
    p.generator = g;
    const std::vector<double> down = {0, 0, -2e4};
    p.load_cases.push_back(point_load_case(0, {{{0, 0, 1}, down}}));
    p.load_cases.push_back(point_load_case(1, {{{1, 1, 1}, down}}));
    p.load_cases.push_back(point_load_case(2, {{{0, 0, 1}, down}, {{1, 1, 1}, down}}));
    p.uncertainty = UncertaintySpec{0.5, true};
    p.solver.scenario_generation = true;
    return p;
}

}  // namespace

ProblemFile cantilever2d(int nx, int ny, double force) {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("cantilever2d: nx and ny must be >= 1");
    }
    ProblemFile p;
    p.name = "cantilever2d";
    p.dimension = 2;
    GeneratorSpec g;
    g.axes.resize(2);
    for (int i = 0; i <= nx; ++i) g.axes[0].push_back(i);
    for (int j = 0; j <= ny; ++j) g.axes[1].push_back(j);
    g.supports.push_back({Pattern{0.0, std::nullopt}, {true, true}});
    p.generator = g;
    const double x = nx;
    p.load_cases.push_back(point_load_case(0, {{{x, 0.0}, {0.0, -force}}, {{x, static_cast<double>(ny)}, {0.0, -force}}}));
    p.uncertainty = UncertaintySpec{0.1, true};
    return p;
}

std::vector<std::string> builtin_example_names() {
    return {"example1", "example3", "example4", "example5", "cantilever2d"};
}

ProblemFile builtin_example(const std::string& name) {
    if (name == "example1") return example1();
    if (name == "example3") return example3();
    if (name == "example4") return example4();
    if (name == "example5") return example5();
    if (name == "cantilever2d") return cantilever2d();
    throw std::invalid_argument("unknown example '" + name + "'");
}

}  // namespace trussrob
