#include "helpers.hpp"
#include "trussrob/export.hpp"
#include "trussrob/problem_file.hpp"
#include "trussrob/report.hpp"

#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

using namespace trussrob;
using testing_support::vec;

namespace {

const std::string kMinimal = R"({
  "dimension": 2,
  "nodes": [
    {"id": 0, "position": [0, 1], "fixed": true},
    {"id": 1, "position": [0, 2], "fixed": true},
    {"id": 2, "position": [0, 3], "fixed": true},
    {"id": 3, "position": [1, 2]}
  ],
  "bars": [[0, 3], [1, 3], [2, 3]],
  "material": {"sigma_plus": 1e8},
  "load_cases": [{"loads": [{"node": 3, "force": [10000, 0]}]}]
})";

std::vector<SchemaError> errors_of(const std::string& text) {
    try {
        parse_problem(text);
    } catch (const ProblemParseError& e) {
        return e.errors();
    }
    return {};
}

bool mentions(const std::vector<SchemaError>& errors, const std::string& what) {
    for (const SchemaError& e : errors) {
        if (e.to_string().find(what) != std::string::npos) return true;
    }
    return false;
}

std::size_t count(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1)) ++n;
    return n;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("parsing an explicit structure") {
    const ProblemFile pf = parse_problem(kMinimal);
    CHECK(pf.dimension == 2);
    CHECK(pf.nodes.size() == 4);
    CHECK(pf.bars.size() == 3);
    const MaterializedProblem mp = materialize(pf);
    CHECK(mp.structure.num_bars() == 3);
    CHECK(mp.structure.num_free_dofs() == 2);
    CHECK(mp.material.sigma_plus == 1e8);
    CHECK(mp.material.sigma_minus == -1e8);
    REQUIRE(mp.load_cases.size() == 1);
    CHECK(mp.load_cases[0].reduced == vec({1e4, 0}));
}

TEST_CASE("schema errors") {
    SUBCASE("dimension 4") {
        std::string text = kMinimal;
        text.replace(text.find("\"dimension\": 2"), 14, "\"dimension\": 4");
        CHECK(mentions(errors_of(text), "dimension must be 2 or 3"));
    }
    SUBCASE("missing material") {
        std::string text = kMinimal;
        text.replace(text.find("\"material\""), std::string("\"material\": {\"sigma_plus\": 1e8},").size(), "");
        CHECK(mentions(errors_of(text), "missing required field \"material\""));
    }
    SUBCASE("unknown field, with its line") {
        std::string text = kMinimal;
        text.replace(text.find("\"sigma_plus\""), 12, "\"sigma_plsu\"");
        const auto errors = errors_of(text);
        REQUIRE(mentions(errors, "unknown field \"sigma_plsu\""));
        bool has_line = false;
        for (const SchemaError& e : errors) has_line = has_line || e.line == 10;
        CHECK(has_line);
    }
    SUBCASE("malformed JSON") {
        CHECK_FALSE(errors_of("{\"dimension\": ").empty());
    }
    SUBCASE("both nodes and generator") {
        std::string text = kMinimal;
        text.replace(text.find("\"bars\""), 6, "\"generator\": {\"axes\": [[0,1],[0,1]], \"supports\": []}, \"bars\"");
        CHECK_FALSE(errors_of(text).empty());
    }
    SUBCASE("perturbation base") {
        std::string text = kMinimal;
        text.replace(text.rfind('}'), 1, ", \"uncertainty\": {\"relative_fraction\": 0.1, \"perturbation_base\": \"nodes\"}}");
        CHECK(mentions(errors_of(text), "unknown perturbation base"));
        text.replace(text.find("\"nodes\"}"), 7, "\"force\"");
        CHECK(parse_problem(text).uncertainty->perturbation_base == BoxBase::Force);
    }
    SUBCASE("unknown load node") {
        std::string text = kMinimal;
        text.replace(text.find("\"node\": 3"), 9, "\"node\": 9");
        CHECK_THROWS(materialize(parse_problem(text)));
    }
}

TEST_CASE("serialize and parse round trip") {
    for (const std::string& name : builtin_example_names()) {
        CAPTURE(name);
        const ProblemFile a = builtin_example(name);
        const std::string text = serialize_problem(a);
        const ProblemFile b = parse_problem(text);
        CHECK(serialize_problem(b) == text);
        const MaterializedProblem ma = materialize(a);
        const MaterializedProblem mb = materialize(b);
        CHECK(ma.structure.num_bars() == mb.structure.num_bars());
        CHECK(ma.load_cases.size() == mb.load_cases.size());
    }
}

TEST_CASE("built-in examples") {
    SUBCASE("example1") {
        const MaterializedProblem mp = materialize(builtin_example("example1"));
        CHECK(mp.structure.num_bars() == 3);
        CHECK(mp.structure.num_free_dofs() == 2);
        CHECK(mp.material.sigma_plus == 1e8);
        CHECK(mp.load_cases[0].reduced == vec({1e4, 0}));
    }
    SUBCASE("example3") {
        const MaterializedProblem mp = materialize(builtin_example("example3"));
        CHECK(mp.structure.num_nodes() == 27);
        CHECK(mp.structure.num_bars() == 274);
        const LoadCase& lc = mp.load_cases[0];
        REQUIRE(lc.forces.size() == 1);
        const int node = lc.forces.begin()->first;
        CHECK(mp.structure.nodes()[static_cast<std::size_t>(node)].position == vec({3, 2, 1}));
        CHECK(lc.forces.begin()->second == vec({0, 0, -4e4}));
    }
    SUBCASE("example4 generator") {
        const MaterializedProblem mp = materialize(builtin_example("example4"));
        CHECK(mp.structure.num_nodes() == 72);
        CHECK(mp.structure.num_bars() == 503);
    }
    SUBCASE("example5") {
        const MaterializedProblem mp = materialize(builtin_example("example5"));
        REQUIRE(mp.load_cases.size() == 3);
        CHECK(mp.load_cases[0].forces.size() == 1);
        CHECK(mp.load_cases[1].forces.size() == 1);
        CHECK(mp.load_cases[2].forces.size() == 2);
        for (const LoadCase& lc : mp.load_cases) {
            for (const auto& [node, f] : lc.forces) {
                CHECK(f == vec({0, 0, -2e4}));
                const Vec& x = mp.structure.nodes()[static_cast<std::size_t>(node)].position;
                CHECK((x == vec({0, 0, 1}) || x == vec({1, 1, 1})));
            }
        }
    }
    SUBCASE("cantilever2d") {
        const MaterializedProblem mp = materialize(builtin_example("cantilever2d"));
        CHECK(mp.structure.dimension() == 2);
    }
    CHECK_THROWS_AS(builtin_example("example2"), std::invalid_argument);
}

TEST_CASE("reports") {
    const MaterializedProblem mp = materialize(builtin_example("example1"));
    RunOptions o;
    o.mode = RunMode::Robust;
    o.fraction = 0.1;
    o.rescale = false;
    o.verify_samples = 100;
    o.seed = 5;
    const RunResult a = run_problem(mp, o);
    const RunResult b = run_problem(mp, o);
    REQUIRE(a.design);
    CHECK(a.status == "optimal");
    const std::string ta = report_json(a);
    CHECK(ta == report_json(b));
    CHECK(ta.find("timing_seconds") == std::string::npos);
    CHECK(report_json(a, {true, 10}).find("timing_seconds") != std::string::npos);

    const Vec s = sections_from_report(ta);
    CHECK(s.isApprox(a.design->s));
    CHECK(verify_sections(a.setup, s, 100, 5).pass);
    CHECK_THROWS(sections_from_report("{}"));
}

TEST_CASE("svg export") {
    const MaterializedProblem mp = materialize(builtin_example("example1"));
    const Vec robust = vec({7.07e-6, 1.1e-4, 7.07e-6});
    std::ostringstream os;
    write_svg(os, robust, mp.structure);
    const std::string svg = os.str();
    CHECK(count(svg, "<line") == 3);
    CHECK(svg.find("<svg") != std::string::npos);

    SUBCASE("shared width scale") {
        const Vec nominal = vec({0, 1e-4, 0});
        SvgOptions opt;
        opt.reference_section = shared_reference_section({nominal, robust});
        std::ostringstream n, r;
        write_svg(n, nominal, mp.structure, opt);
        write_svg(r, robust, mp.structure, opt);
        const std::regex width("stroke-width=\"([0-9.eE+-]+)\"");
        auto widths = [&](const std::string& text) {
            std::vector<double> out;
            for (auto it = std::sregex_iterator(text.begin(), text.end(), width); it != std::sregex_iterator(); ++it) {
                out.push_back(std::stod((*it)[1]));
            }
            return out;
        };
        const auto wn = widths(n.str());
        const auto wr = widths(r.str());
        REQUIRE(!wn.empty());
        REQUIRE(!wr.empty());
        const double max_r = *std::max_element(wr.begin(), wr.end());
        CHECK(max_r == doctest::Approx(opt.max_stroke));
        CHECK(*std::max_element(wn.begin(), wn.end()) == doctest::Approx(opt.max_stroke * 1e-4 / 1.1e-4).epsilon(1e-3));
    }
    SUBCASE("all-zero design draws no bars") {
        std::ostringstream z;
        write_svg(z, Vec::Zero(3), mp.structure);
        CHECK(count(z.str(), "<line") == 0);
    }
    SUBCASE("3D structure") {
        const MaterializedProblem m3 = materialize(builtin_example("example3"));
        std::ostringstream z;
        CHECK_THROWS_WITH_AS(write_svg(z, Vec::Ones(m3.structure.num_bars()), m3.structure),
                             "svg requires dimension 2", ExportError);
    }
}

TEST_CASE("obj export") {
    const MaterializedProblem mp = materialize(builtin_example("example3"));
    Vec s = Vec::Zero(mp.structure.num_bars());
    s[0] = 1e-4;
    s[5] = 2e-4;
    std::ostringstream os;
    ObjOptions opt;
    opt.segments = 8;
    write_obj(os, s, mp.structure, opt);
    const std::string obj = os.str();
    CHECK(count(obj, "\no bar") + (obj.rfind("o bar", 0) == 0 ? 1 : 0) == 2);
    // per bar: two rings of vertices, side quads and two caps
    CHECK(count(obj, "\nv ") + (obj.rfind("v ", 0) == 0 ? 1 : 0) == 2 * 2 * 8);
    CHECK(count(obj, "\nf ") == 2 * (8 + 2));

    std::ostringstream z;
    CHECK_THROWS_WITH_AS(write_obj(z, Vec::Ones(3), materialize(builtin_example("example1")).structure),
                         "obj requires dimension 3", ExportError);
}

TEST_CASE("bundled problem files match the built-ins") {
    for (const char* name : {"example1", "example3", "example4", "example5"}) {
        CAPTURE(name);
        const std::string text = read_file(std::string(TRUSSROB_DATA_DIR) + "/" + name + ".json");
        REQUIRE_FALSE(text.empty());
        CHECK(serialize_problem(parse_problem(text)) == serialize_problem(builtin_example(name)));
    }
}
