// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any
// criterion fails, unless every failing one was named with --known-gap N.

#include "trussrob/geometry.hpp"
#include "trussrob/loads.hpp"
#include "trussrob/problem_file.hpp"
#include "trussrob/report.hpp"
#include "trussrob/truss_opt.hpp"
#include "trussrob/verify.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace trussrob;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

bool rel_close(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

Vec vec2(double x, double y) { return (Vec(2) << x, y).finished(); }

std::set<int> failed;

void criterion(int id, double limit_seconds, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_seconds) {
        out.pass = false;
        out.detail << " [runtime " << secs << " s over " << limit_seconds << " s]";
    }
    if (!out.pass) failed.insert(id);
    std::printf("%s criterion %d:%s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, out.detail.str().c_str(), secs);
    std::fflush(stdout);
}

TrussDesign solve_example(const std::string& name, RunMode mode, std::optional<double> fraction = std::nullopt,
                          std::optional<bool> rescale = std::nullopt, std::optional<BoxBase> base = std::nullopt) {
    RunOptions o;
    o.mode = mode;
    o.fraction = fraction;
    o.rescale = rescale;
    o.box_base = base;
    const RunResult r = run_problem(materialize(builtin_example(name)), o);
    if (!r.design) throw std::runtime_error(name + ": " + r.status);
    return *r.design;
}

// Small random instances: a jittered 3x2 node grid clamped on the left
// column, 12 bars, one or two load cases on random free nodes.
struct RandomInstance {
    GroundStructure structure;
    std::vector<UncertainLoad> boxes;
};

RandomInstance random_instance(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(-0.15, 0.15);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Node> nodes;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 2; ++j) {
            const bool fixed = i == 0;
            const Vec x = vec2(i + (fixed ? 0.0 : jitter(rng)), j + (fixed ? 0.0 : jitter(rng)));
            nodes.push_back({static_cast<int>(nodes.size()), x, std::vector<bool>(2, fixed)});
        }
    }
    std::vector<std::pair<int, int>> bars;
    for (int a = 0; a < 6; ++a) {
        for (int b = a + 1; b < 6; ++b) {
            const bool both_fixed = a < 2 && b < 2;
            const bool long_row = b - a == 4;  // node i=0 to i=2 in the same row
            if (!both_fixed && !long_row) bars.emplace_back(a, b);
        }
    }
    RandomInstance inst{GroundStructure(2, nodes, bars), {}};

    const int cases = 1 + static_cast<int>(unit(rng) < 0.5);
    for (int c = 0; c < cases; ++c) {
        std::map<int, Vec> forces;
        const int loaded = 1 + static_cast<int>(unit(rng) < 0.5);
        while (static_cast<int>(forces.size()) < loaded) {
            const int node = 2 + static_cast<int>(unit(rng) * 4) % 4;
            const double angle = 2 * std::numbers::pi * unit(rng);
            const double mag = 1e3 + 9e3 * unit(rng);
            forces[node] = vec2(mag * std::cos(angle), mag * std::sin(angle));
        }
        const LoadCase lc = make_load_case(inst.structure, c, forces);
        inst.boxes.push_back({lc, build_relative_box(inst.structure, lc, 0.05 + 0.45 * unit(rng)), 1.0});
    }
    return inst;
}

VertexLoadSet vertex_loads(const RandomInstance& inst) {
    std::vector<VertexLoadSet> sets;
    for (const UncertainLoad& u : inst.boxes) sets.push_back(enumerate_vertices(inst.structure, u.box, u.load_case));
    return union_vertex_sets(sets);
}

// Every box sampled on a regular grid with `k` points per interval.
VertexLoadSet grid_loads(const RandomInstance& inst, int k) {
    VertexLoadSet out;
    for (const UncertainLoad& u : inst.boxes) {
        std::vector<std::pair<int, Interval>> axes;
        for (const auto& [key, iv] : u.box.deltas) axes.emplace_back(inst.structure.dof(key.first, key.second), iv);
        std::vector<int> idx(axes.size(), 0);
        while (true) {
            Vec f = u.load_case.reduced;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const Interval& iv = axes[a].second;
                f[axes[a].first] += iv.lo + (iv.hi - iv.lo) * idx[a] / (k - 1);
            }
            out.vertices.push_back(f);
            out.provenance.push_back({u.load_case.id, 0});
            std::size_t a = 0;
            while (a < idx.size() && ++idx[a] == k) idx[a++] = 0;
            if (a == idx.size()) break;
        }
    }
    return out;
}

std::vector<double> lp_point(const TrussDesign& d) {
    std::vector<double> x(d.s.data(), d.s.data() + d.s.size());
    for (const Vec& w : d.w) x.insert(x.end(), w.data(), w.data() + w.size());
    return x;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::err);
    std::set<int> known_gaps;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::string(argv[i]) != "--known-gap") {
            std::fprintf(stderr, "usage: acceptance [--known-gap N]...\n");
            return 2;
        }
        known_gaps.insert(std::stoi(argv[i + 1]));
    }
    const MaterialLimits steel{};
    double ex1_nominal = 0, ex1_robust = 0;
    double ex3_nominal = 0, ex3_robust = 0;
    double ex4_nominal = 0, ex4_robust = 0;
    double ex5_nominal = 0, ex5_robust = 0;

    criterion(1, 1.0, [&](Outcome& o) {
        const TrussDesign d = solve_example("example1", RunMode::Nominal);
        ex1_nominal = d.volume;
        o.detail << " example 1 nominal volume " << d.volume;
        o.require(rel_close(d.volume, 1e-4, 1e-6), "volume 1.00e-4");
        o.require(std::abs(d.s[0]) <= 1e-9 && std::abs(d.s[1] - 1e-4) <= 1e-9 && std::abs(d.s[2]) <= 1e-9,
                  "s = (0, 1e-4, 0)");
    });

    criterion(2, 1.0, [&](Outcome& o) {
        const MaterializedProblem mp = materialize(builtin_example("example1"));
        const double fx = 1e4 / std::sqrt(1.01);
        const LoadCase lc = make_load_case(mp.structure, 0, {{3, vec2(fx, 0.1 * fx)}});
        const TrussDesign d = solve_topology(make_truss_problem(mp.structure, mp.material, nominal_vertex_set(lc)));
        o.detail << " example 1 perturbed volume " << d.volume;
        o.require(rel_close(d.volume, 1.09e-4, 0.005), "volume 1.09e-4 within 0.5%");
    });

    criterion(3, 1.0, [&](Outcome& o) {
        const TrussDesign d = solve_example("example1", RunMode::Robust, 0.1, false);
        ex1_robust = d.volume;
        const double diag = 7.0710678118654752e-06;
        o.detail << " example 1 robust volume " << d.volume;
        o.require(rel_close(d.volume, 1.3e-4, 1e-6), "volume 1.30e-4");
        o.require(std::abs(d.s[0] - diag) <= 1e-9 && std::abs(d.s[1] - 1.1e-4) <= 1e-9 &&
                      std::abs(d.s[2] - diag) <= 1e-9,
                  "s = (7.071e-6, 1.1e-4, 7.071e-6)");
    });

    criterion(4, 60.0, [&](Outcome& o) {
        const int bars = materialize(builtin_example("example3")).structure.num_bars();
        ex3_nominal = solve_example("example3", RunMode::Nominal).volume;
        ex3_robust = solve_example("example3", RunMode::Robust).volume;
        o.detail << " example 3 bars " << bars << ", nominal " << ex3_nominal << ", robust " << ex3_robust;
        o.require(bars == 274, "274 bars");
        o.require(rel_close(ex3_nominal, 0.0024, 0.02), "nominal 0.0024 within 2%");
        o.require(rel_close(ex3_robust, 0.0026, 0.05), "robust 0.0026 within 5%");
    });

    criterion(5, 300.0, [&](Outcome& o) {
        const int bars = materialize(builtin_example("example4")).structure.num_bars();
        ex4_nominal = solve_example("example4", RunMode::Nominal).volume;
        ex4_robust = solve_example("example4", RunMode::Robust).volume;
        o.detail << " example 4 bars " << bars << ", nominal " << ex4_nominal << ", robust " << ex4_robust;
        o.require(bars == 503, "503 bars");
        o.require(rel_close(ex4_nominal, 0.000514, 0.02), "nominal 0.000514 within 2%");
        o.require(rel_close(ex4_robust, 0.001568, 0.05), "robust 0.001568 within 5%");
    });

    criterion(6, 600.0, [&](Outcome& o) {
        const MaterializedProblem mp = materialize(builtin_example("example5"));
        const int bars = mp.structure.num_bars();
        const RunSetup robust = prepare_run(mp, RunMode::Robust, std::nullopt, std::nullopt);
        ex5_nominal = solve_example("example5", RunMode::Nominal).volume;
        ex5_robust = solve_example("example5", RunMode::Robust).volume;
        o.detail << " example 5 bars " << bars << " (294 quoted), vertex loads " << robust.problem.num_loads()
                 << ", nominal " << ex5_nominal << ", robust " << ex5_robust;
        o.require(bars == 298, "298 bars");
        o.require(robust.problem.num_loads() == 80, "80 vertex loads");
        o.require(rel_close(ex5_nominal, 0.000850, 0.02), "nominal 0.000850 within 2%");
        o.require(rel_close(ex5_robust, 0.002562, 0.05), "robust 0.002562 within 5%");
        if (!o.pass) {
            // the same vertex count with each force's own box and no rescaling
            const double alt = solve_example("example5", RunMode::Robust, std::nullopt, false, BoxBase::Force).volume;
            o.detail << " (per-force box without rescaling: " << alt << ")";
        }
    });

    criterion(7, 120.0, [&](Outcome& o) {
        std::mt19937_64 rng(7001);
        int solved = 0;
        double worst_violation = 0, worst_gap = 0;
        while (solved < 50) {
            const RandomInstance inst = random_instance(rng);
            const TrussProblem p = make_truss_problem(inst.structure, steel, vertex_loads(inst));
            TrussDesign d;
            try {
                d = solve_topology(p);
            } catch (const RobustInfeasibleError&) {
                continue;  // mechanism under this load; draw again
            }
            ++solved;
            const FeasibilityReport r = verify_robust_design(d, inst.boxes, p, 200, static_cast<std::uint64_t>(solved));
            worst_violation = std::max(worst_violation, r.max_relative_violation);
            o.require(r.pass, "sampled verification, instance " + std::to_string(solved));

            const double grid = solve_topology(with_loads(p, grid_loads(inst, 3))).volume;
            const double gap = std::abs(grid - d.volume) / d.volume;
            worst_gap = std::max(worst_gap, gap);
            o.require(gap <= 1e-6, "grid oracle, instance " + std::to_string(solved));
        }
        o.detail << " 50 random instances, max relative violation " << worst_violation << ", max grid gap " << worst_gap;
        o.require(worst_violation <= 1e-7, "violation <= 1e-7");
    });

    criterion(8, 30.0, [&](Outcome& o) {
        std::mt19937_64 rng(8001);
        std::uniform_real_distribution<double> log_scale(-2.0, 2.0);
        int done = 0;
        double worst = 0;
        while (done < 20) {
            const RandomInstance inst = random_instance(rng);
            const TrussProblem p = make_truss_problem(inst.structure, steel, vertex_loads(inst));
            const double alpha = std::pow(10.0, log_scale(rng));
            const double beta = std::pow(10.0, log_scale(rng));
            double base = 0;
            try {
                base = solve_topology(p).volume;
            } catch (const RobustInfeasibleError&) {
                continue;
            }
            ++done;
            const TrussProblem q = scale_problem(p, alpha, beta);
            const TrussDesign d = solve_topology(q);
            const double err = std::abs(d.volume / base - alpha / beta) / (alpha / beta);
            worst = std::max(worst, err);
            o.require(err <= 1e-7, "ratio, triple " + std::to_string(done));

            const lp::FeasibilityViolation v = check_primal_feasibility(build_topology_lp(q), lp_point(d));
            double fmax = 0;
            for (const Vec& f : q.loads.vertices) fmax = std::max(fmax, f.lpNorm<Eigen::Infinity>());
            o.require(v.equality <= 1e-9 * fmax, "scaled equilibrium, triple " + std::to_string(done));
            o.require(v.inequality <= 1e-9 * fmax, "scaled stress rows, triple " + std::to_string(done));
            o.require(v.bounds <= 1e-9 * d.s.maxCoeff(), "scaled bounds, triple " + std::to_string(done));
        }
        o.detail << " 20 scaling triples, max ratio error " << worst;
    });

    criterion(9, 1.0, [&](Outcome& o) {
        const std::pair<double, double> pairs[] = {
            {ex1_nominal, ex1_robust}, {ex3_nominal, ex3_robust}, {ex4_nominal, ex4_robust}, {ex5_nominal, ex5_robust}};
        const char* names[] = {"1", "3", "4", "5"};
        o.detail << " robust over nominal:";
        for (int i = 0; i < 4; ++i) {
            const auto [nom, rob] = pairs[i];
            o.detail << " example " << names[i] << " " << (nom > 0 ? rob / nom : 0.0);
            o.require(nom > 0 && rob > nom, std::string("strict increase on example ") + names[i]);
        }
    });

    criterion(10, 1.0, [&](Outcome& o) {
        const MaterializedProblem mp = materialize(builtin_example("example1"));
        const TrussProblem p = make_truss_problem(mp.structure, mp.material, nominal_vertex_set(mp.load_cases[0]));
        const Vec nominal = solve_topology(p).s;
        const double fx = 1e4 / std::sqrt(1.01);
        const double v = check_feasibility_for_load(nominal, vec2(fx, 0.1 * fx), p);
        o.detail << " nominal design under the tilted load: violation " << v << " N";
        o.require(v > 100.0, "violation > 100 N");
    });

    bool unexpected = false;
    std::string gaps;
    for (int id : failed) {
        if (known_gaps.count(id)) gaps += " " + std::to_string(id);
        else unexpected = true;
    }
    for (int id : known_gaps) {
        if (!failed.count(id)) std::printf("note: criterion %d is listed as a known gap but passed\n", id);
    }
    std::printf("%zu of 10 criteria failed", failed.size());
    if (!gaps.empty()) std::printf("; known gaps:%s", gaps.c_str());
    std::printf("\n");
    return unexpected ? 1 : 0;
}
