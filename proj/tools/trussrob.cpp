// trussrob command line: solve, robust, verify, export, example, dump-lp.

#include "trussrob/export.hpp"
#include "trussrob/problem_file.hpp"
#include "trussrob/report.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace trussrob;

constexpr int kExitError = 1;
constexpr int kExitVerifyFailed = 3;
constexpr int kExitInfeasible = 4;

struct Args {
    std::string input;
    std::string example;
    std::string output;
    std::string design;
    std::string format;
    std::optional<double> fraction;
    std::optional<std::string> box_base;
    bool rescale = false;
    bool no_rescale = false;
    int verify = 0;
    std::uint64_t seed = 0;
    std::optional<double> feas_tol;
    std::optional<double> opt_tol;
    std::optional<double> threshold;
    bool timing = false;
    bool robust = false;
    bool compare = false;
    bool list = false;
};

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("trussrob");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("TRUSSROB_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

void add_problem_options(CLI::App* cmd, Args& a) {
    auto* in = cmd->add_option("-i,--input", a.input, "Problem file (JSON)");
    auto* ex = cmd->add_option("--example", a.example, "Built-in example instead of a file");
    in->excludes(ex);
}

void add_uncertainty_options(CLI::App* cmd, Args& a) {
    cmd->add_option("--fraction", a.fraction, "Relative box half-width p (overrides the file)");
    auto* on = cmd->add_flag("--rescale", a.rescale, "Rescale vertex loads to the nominal maximum nodal force");
    auto* off = cmd->add_flag("--no-rescale", a.no_rescale, "Keep vertex loads unscaled");
    on->excludes(off);
    cmd->add_option("--box-base", a.box_base, "Half-width measured against the load case (load_case) or each force")
        ->check(CLI::IsMember({"load_case", "force"}));
}

std::optional<BoxBase> base_override(const Args& a) {
    if (a.box_base) return box_base_from_string(*a.box_base);
    return std::nullopt;
}

void add_solver_options(CLI::App* cmd, Args& a) {
    cmd->add_option("--feas-tol", a.feas_tol, "Primal feasibility tolerance");
    cmd->add_option("--opt-tol", a.opt_tol, "Optimality tolerance");
    cmd->add_option("--threshold", a.threshold, "Relative cross-section threshold for active bars");
}

ProblemFile load_input(const Args& a) {
    if (!a.example.empty()) return builtin_example(a.example);
    if (a.input.empty()) throw std::invalid_argument("give --input FILE or --example NAME");
    return load_problem_file(a.input);
}

std::optional<bool> rescale_override(const Args& a) {
    if (a.rescale) return true;
    if (a.no_rescale) return false;
    return std::nullopt;
}

RunOptions run_options(const Args& a, RunMode mode) {
    RunOptions o;
    o.mode = mode;
    o.fraction = a.fraction;
    o.rescale = rescale_override(a);
    o.box_base = base_override(a);
    o.verify_samples = a.verify;
    o.seed = a.seed;
    o.feas_tol = a.feas_tol;
    o.opt_tol = a.opt_tol;
    o.threshold = a.threshold;
    return o;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_run(const Args& a, RunMode mode) {
    const MaterializedProblem mp = materialize(load_input(a));
    const RunResult r = run_problem(mp, run_options(a, mode));
    ReportOptions ro;
    ro.include_timing = a.timing;
    write_text(a.output, report_json(r, ro));
    if (!r.design) {
        std::cerr << "error: robust infeasible\n";
        return kExitInfeasible;
    }
    if (r.verification && !r.verification->pass) {
        std::cerr << "verification failed: " << r.verification->failures.size() << " of "
                  << r.verification->samples_tested << " samples not carried\n";
        return kExitVerifyFailed;
    }
    return 0;
}

int cmd_verify(const Args& a) {
    const MaterializedProblem mp = materialize(load_input(a));
    const RunSetup setup = prepare_run(mp, RunMode::Robust, a.fraction, rescale_override(a), base_override(a));
    const Vec s = sections_from_report(read_text(a.design));
    if (s.size() != setup.problem.num_bars()) {
        throw std::invalid_argument("design has " + std::to_string(s.size()) + " sections, problem has " +
                                    std::to_string(setup.problem.num_bars()) + " bars");
    }
    const int samples = a.verify > 0 ? a.verify : kDefaultSamplesPerBox;
    const FeasibilityReport v = verify_sections(setup, s, samples, a.seed);

    RunResult r(mp.name, RunMode::Robust, setup);
    r.status = "verified";
    r.verification = v;
    write_text(a.output, report_json(r));
    return v.pass ? 0 : kExitVerifyFailed;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

int cmd_export(const Args& a) {
    if (a.output.empty()) throw std::invalid_argument("export needs --output");
    const MaterializedProblem mp = materialize(load_input(a));
    const GroundStructure& gs = mp.structure;
    std::string format = a.format;
    if (format.empty()) format = gs.dimension() == 2 ? "svg" : "obj";
    if (format == "svg" && gs.dimension() != 2) throw ExportError("svg requires dimension 2");
    if (format == "obj" && gs.dimension() != 3) throw ExportError("obj requires dimension 3");
    if (format != "svg" && format != "obj") throw std::invalid_argument("export format must be svg or obj");

    std::vector<std::pair<std::string, Vec>> designs;
    if (!a.design.empty()) {
        designs.emplace_back(a.output, sections_from_report(read_text(a.design)));
    } else {
        std::vector<RunMode> modes;
        if (a.compare) modes = {RunMode::Nominal, RunMode::Robust};
        else modes = {a.robust ? RunMode::Robust : RunMode::Nominal};
        for (RunMode mode : modes) {
            RunOptions o = run_options(a, mode);
            o.verify_samples = 0;
            const RunResult r = run_problem(mp, o);
            if (!r.design) {
                std::cerr << "error: robust infeasible\n";
                return kExitInfeasible;
            }
            const std::string path = a.compare ? with_suffix(a.output, std::string("_") + to_string(mode)) : a.output;
            designs.emplace_back(path, r.design->s);
        }
    }
    for (const auto& [path, s] : designs) {
        if (s.size() != gs.num_bars()) throw std::invalid_argument("design does not match the problem's bars");
    }

    std::vector<Vec> all;
    for (const auto& d : designs) all.push_back(d.second);
    const double ref = shared_reference_section(all);
    for (const auto& [path, s] : designs) {
        if (format == "svg") {
            SvgOptions so;
            so.reference_section = ref;
            if (a.threshold) so.threshold = *a.threshold;
            export_svg(s, gs, path, so);
        } else {
            ObjOptions oo;
            if (a.threshold) oo.threshold = *a.threshold;
            export_obj(s, gs, path, oo);
        }
        spdlog::info("wrote {}", path);
    }
    return 0;
}

int cmd_example(const Args& a) {
    if (a.list) {
        for (const std::string& name : builtin_example_names()) std::cout << name << "\n";
        return 0;
    }
    if (a.example.empty()) throw std::invalid_argument("give an example name or --list");
    if (!a.format.empty() && a.format != "json") throw std::invalid_argument("example format must be json");
    write_text(a.output, serialize_problem(builtin_example(a.example)));
    return 0;
}

int cmd_dump_lp(const Args& a) {
    const MaterializedProblem mp = materialize(load_input(a));
    const RunSetup setup = prepare_run(mp, a.robust ? RunMode::Robust : RunMode::Nominal, a.fraction,
                                       rescale_override(a), base_override(a));
    std::ostringstream os;
    lp::write_lp_text(build_topology_lp(setup.problem), os);
    write_text(a.output, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Minimum-volume plastic truss design with robust load boxes"};
    app.require_subcommand(1);
    Args a;

    auto* solve = app.add_subcommand("solve", "Nominal design for every load case");
    auto* robust = app.add_subcommand("robust", "Design carrying every load in the perturbation boxes");
    for (auto* cmd : {solve, robust}) {
        add_problem_options(cmd, a);
        cmd->add_option("-o,--output", a.output, "Report path (default stdout)");
        add_uncertainty_options(cmd, a);
        add_solver_options(cmd, a);
        cmd->add_option("--verify", a.verify, "Samples per box for a verification pass")
                           ->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", a.seed, "Sampling seed");
        cmd->add_flag("--timing", a.timing, "Include wall-clock time in the report");
    }

    auto* verify = app.add_subcommand("verify", "Sample the boxes against the sections of a report");
    add_problem_options(verify, a);
    verify->add_option("--design", a.design, "Report holding the cross-sections")->required();
    verify->add_option("-o,--output", a.output, "Report path (default stdout)");
    add_uncertainty_options(verify, a);
    verify->add_option("--verify", a.verify, "Samples per box (default 200)")->check(CLI::PositiveNumber);
    verify->add_option("--seed", a.seed, "Sampling seed");

    auto* exp = app.add_subcommand("export", "Draw a design as SVG (2D) or OBJ (3D)");
    add_problem_options(exp, a);
    exp->add_option("-o,--output", a.output, "Figure path")->required();
    exp->add_option("--format", a.format, "svg or obj (default by dimension)")
        ->check(CLI::IsMember({"json", "svg", "obj"}));
    exp->add_option("--design", a.design, "Draw the sections of this report instead of solving");
    exp->add_flag("--robust", a.robust, "Solve the robust problem");
    exp->add_flag("--compare", a.compare, "Write nominal and robust designs at a shared width scale");
    add_uncertainty_options(exp, a);
    add_solver_options(exp, a);

    auto* example = app.add_subcommand("example", "Write a built-in problem file");
    example->add_option("name", a.example, "Example name");
    example->add_flag("--list", a.list, "List the built-in examples");
    example->add_option("-o,--output", a.output, "Output path (default stdout)");
    example->add_option("--format", a.format, "json")->check(CLI::IsMember({"json", "svg", "obj"}));

    auto* dump = app.add_subcommand("dump-lp", "Write the topology LP as text");
    add_problem_options(dump, a);
    dump->add_option("-o,--output", a.output, "Output path (default stdout)");
    dump->add_flag("--robust", a.robust, "Dump the robust LP");
    add_uncertainty_options(dump, a);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_run(a, RunMode::Nominal);
        if (robust->parsed()) return cmd_run(a, RunMode::Robust);
        if (verify->parsed()) return cmd_verify(a);
        if (exp->parsed()) return cmd_export(a);
        if (example->parsed()) return cmd_example(a);
        if (dump->parsed()) return cmd_dump_lp(a);
    } catch (const ProblemParseError& e) {
        for (const SchemaError& err : e.errors()) std::cerr << "error: " << err.to_string() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
