#include "trussrob/problem_file.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace trussrob {

using Json = nlohmann::ordered_json;

MaterialLimits MaterialSpec::limits() const {
    MaterialLimits m;
    m.sigma_plus = sigma_plus * safety_factor;
    m.sigma_minus = sigma_minus * safety_factor;
    m.density = density;
    m.validate();
    return m;
}

SolveOptions SolverSpec::apply(SolveOptions base) const {
    if (feas_tol) base.simplex.feas_tol = *feas_tol;
    if (opt_tol) base.simplex.opt_tol = *opt_tol;
    if (max_iterations) base.simplex.max_iters = *max_iterations;
    if (scenario_generation) base.scenario_generation = *scenario_generation;
    if (active_threshold) base.active_threshold = *active_threshold;
    return base;
}

std::string SchemaError::to_string() const {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!path.empty()) out += path + ": ";
    return out + message;
}

namespace {

std::string join_errors(const std::vector<SchemaError>& errors) {
    std::string out = "invalid problem file";
    for (const SchemaError& e : errors) out += "\n  " + e.to_string();
    return out;
}

}  // namespace

ProblemParseError::ProblemParseError(std::vector<SchemaError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

namespace {

// ---- source positions -------------------------------------------------------

// Char iterator that publishes how far the JSON lexer has read.
class TrackingIterator {
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    TrackingIterator() = default;
    TrackingIterator(const char* p, const char* base, std::size_t* consumed) : p_(p), base_(base), consumed_(consumed) {}

    reference operator*() const { return *p_; }
    TrackingIterator& operator++() {
        ++p_;
        if (consumed_ != nullptr) *consumed_ = static_cast<std::size_t>(p_ - base_);
        return *this;
    }
    TrackingIterator operator++(int) {
        TrackingIterator old = *this;
        ++*this;
        return old;
    }
    bool operator==(const TrackingIterator& o) const { return p_ == o.p_; }

private:
    const char* p_ = nullptr;
    const char* base_ = nullptr;
    std::size_t* consumed_ = nullptr;
};

std::string pointer_escape(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// Source line of every value by JSON pointer; also flags duplicate keys.
class PositionIndex : public nlohmann::json_sax<Json> {
public:
    explicit PositionIndex(const std::string& text) : text_(text) {
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '\n') line_starts_.push_back(i + 1);
        }
    }

    bool build(std::vector<SchemaError>& errors) {
        errors_ = &errors;
        TrackingIterator first(text_.data(), text_.data(), &consumed_);
        TrackingIterator last(text_.data() + text_.size(), text_.data(), nullptr);
        const bool ok = Json::sax_parse(first, last, this);
        errors_ = nullptr;
        return ok;
    }

    int line_of(std::string path) const {
        while (true) {
            auto it = lines_.find(path);
            if (it != lines_.end()) return it->second;
            if (path.empty()) return 0;
            path.erase(path.rfind('/'));
        }
    }

    bool null() override { return scalar(); }
    bool boolean(bool) override { return scalar(); }
    bool number_integer(number_integer_t) override { return scalar(); }
    bool number_unsigned(number_unsigned_t) override { return scalar(); }
    bool number_float(number_float_t, const string_t&) override { return scalar(); }
    bool string(string_t&) override { return scalar(); }
    bool binary(binary_t&) override { return scalar(); }

    bool start_object(std::size_t) override { return open(false); }
    bool start_array(std::size_t) override { return open(true); }
    bool end_object() override { return close(); }
    bool end_array() override { return close(); }

    bool key(string_t& k) override {
        Frame& f = frames_.back();
        f.key = k;
        const std::string path = f.path + "/" + pointer_escape(k);
        if (!f.keys.insert(k).second) {
            errors_->push_back({path, current_line(), "duplicate key \"" + k + "\""});
        }
        lines_[path] = current_line();
        return true;
    }

    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override {
        errors_->push_back({"", current_line(), ex.what()});
        return false;
    }

private:
    struct Frame {
        bool is_array = false;
        std::size_t index = 0;
        std::string key;
        std::string path;
        std::set<std::string> keys;
    };

    int current_line() const {
        // the lexer reads one character past a token
        const std::size_t pos = consumed_ > 0 ? consumed_ - 1 : 0;
        const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), pos);
        return static_cast<int>(it - line_starts_.begin());
    }

    std::string current_path() const {
        if (frames_.empty()) return "";
        const Frame& f = frames_.back();
        return f.path + "/" + (f.is_array ? std::to_string(f.index) : pointer_escape(f.key));
    }

    void record() {
        if (frames_.empty() || frames_.back().is_array) lines_.emplace(current_path(), current_line());
    }

    void advance() {
        if (!frames_.empty() && frames_.back().is_array) ++frames_.back().index;
    }

    bool scalar() {
        record();
        advance();
        return true;
    }

    bool open(bool is_array) {
        record();
        Frame f;
        f.is_array = is_array;
        f.path = current_path();
        frames_.push_back(std::move(f));
        return true;
    }

    bool close() {
        frames_.pop_back();
        advance();
        return true;
    }

    const std::string& text_;
    std::vector<std::size_t> line_starts_{0};
    std::map<std::string, int> lines_;
    std::vector<Frame> frames_;
    std::size_t consumed_ = 0;
    std::vector<SchemaError>* errors_ = nullptr;
};

// ---- schema checks ------------------------------------------------------------

class Checker {
public:
    explicit Checker(const PositionIndex& index) : index_(index) {}

    void error(const std::string& path, const std::string& message) {
        errors.push_back({path, index_.line_of(path), message});
    }

    bool object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required = {}) {
        if (!j.is_object()) {
            error(path, "expected an object");
            return false;
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j.items()) {
            if (!ok.count(k)) error(path + "/" + pointer_escape(k), "unknown field \"" + k + "\"");
        }
        bool complete = true;
        for (const char* r : required) {
            if (!j.contains(r)) {
                error(path, std::string("missing required field \"") + r + "\"");
                complete = false;
            }
        }
        return complete;
    }

    std::optional<double> number(const Json& j, const std::string& path) {
        if (!j.is_number()) {
            error(path, "expected a number");
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            error(path, "number must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> positive(const Json& j, const std::string& path) {
        auto v = number(j, path);
        if (v && !(*v > 0.0)) {
            error(path, "must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> integer(const Json& j, const std::string& path) {
        if (!j.is_number_integer()) {
            error(path, "expected an integer");
            return std::nullopt;
        }
        return j.get<long long>();
    }

    std::optional<bool> boolean(const Json& j, const std::string& path) {
        if (!j.is_boolean()) {
            error(path, "expected true or false");
            return std::nullopt;
        }
        return j.get<bool>();
    }

    std::optional<std::string> string(const Json& j, const std::string& path) {
        if (!j.is_string()) {
            error(path, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    bool array(const Json& j, const std::string& path, bool non_empty = false) {
        if (!j.is_array()) {
            error(path, "expected an array");
            return false;
        }
        if (non_empty && j.empty()) {
            error(path, "must not be empty");
            return false;
        }
        return true;
    }

    // number array of length `dim`
    std::optional<std::vector<double>> vector(const Json& j, const std::string& path, int dim) {
        if (!array(j, path)) return std::nullopt;
        if (static_cast<int>(j.size()) != dim) {
            error(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto v = number(j[i], path + "/" + std::to_string(i));
            if (!v) return std::nullopt;
            out.push_back(*v);
        }
        return out;
    }

    // `true`/`false` for every axis or one flag per axis
    std::optional<std::vector<bool>> fixed_flags(const Json& j, const std::string& path, int dim) {
        if (j.is_boolean()) return std::vector<bool>(static_cast<std::size_t>(dim), j.get<bool>());
        if (!j.is_array() || static_cast<int>(j.size()) != dim) {
            error(path, "expected a boolean or " + std::to_string(dim) + " booleans");
            return std::nullopt;
        }
        std::vector<bool> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto b = boolean(j[i], path + "/" + std::to_string(i));
            if (!b) return std::nullopt;
            out.push_back(*b);
        }
        return out;
    }

    std::vector<SchemaError> errors;

private:
    const PositionIndex& index_;
};

constexpr double kCoordTol = 1e-9;

bool on_axis(const std::vector<double>& axis, double v) {
    return std::any_of(axis.begin(), axis.end(), [&](double a) { return std::abs(a - v) <= kCoordTol; });
}

void parse_generator(Checker& ck, const Json& j, int dim, ProblemFile& out) {
    const std::string path = "/generator";
    if (!ck.object(j, path, {"axes", "supports", "max_bar_length", "exclude_collinear", "exclude_fixed_fixed"},
                   {"axes", "supports"})) {
        return;
    }
    GeneratorSpec g;
    bool ok = true;
    if (ck.array(j["axes"], path + "/axes")) {
        if (static_cast<int>(j["axes"].size()) != dim) {
            ck.error(path + "/axes", "expected one coordinate list per axis (" + std::to_string(dim) + ")");
            ok = false;
        }
        for (std::size_t a = 0; a < j["axes"].size(); ++a) {
            const std::string ap = path + "/axes/" + std::to_string(a);
            const Json& axis = j["axes"][a];
            if (!ck.array(axis, ap, true)) {
                ok = false;
                continue;
            }
            std::vector<double> coords;
            for (std::size_t i = 0; i < axis.size(); ++i) {
                auto v = ck.number(axis[i], ap + "/" + std::to_string(i));
                if (!v) {
                    ok = false;
                    continue;
                }
                if (!coords.empty() && *v <= coords.back()) {
                    ck.error(ap + "/" + std::to_string(i), "coordinates must be strictly increasing");
                    ok = false;
                }
                coords.push_back(*v);
            }
            g.axes.push_back(std::move(coords));
        }
    } else {
        ok = false;
    }
    if (ck.array(j["supports"], path + "/supports", true)) {
        for (std::size_t s = 0; s < j["supports"].size(); ++s) {
            const std::string sp = path + "/supports/" + std::to_string(s);
            const Json& sj = j["supports"][s];
            if (!ck.object(sj, sp, {"pattern", "fixed"}, {"pattern"})) continue;
            SupportPattern pat;
            const Json& pj = sj["pattern"];
            if (!ck.array(pj, sp + "/pattern")) continue;
            if (static_cast<int>(pj.size()) != dim) {
                ck.error(sp + "/pattern", "expected " + std::to_string(dim) + " entries");
                continue;
            }
            for (std::size_t i = 0; i < pj.size(); ++i) {
                if (pj[i].is_null()) {
                    pat.pattern.emplace_back(std::nullopt);
                } else if (auto v = ck.number(pj[i], sp + "/pattern/" + std::to_string(i))) {
                    pat.pattern.emplace_back(*v);
                }
            }
            pat.fixed = std::vector<bool>(static_cast<std::size_t>(dim), true);
            if (sj.contains("fixed")) {
                if (auto f = ck.fixed_flags(sj["fixed"], sp + "/fixed", dim)) pat.fixed = *f;
            }
            g.supports.push_back(std::move(pat));
        }
    }
    if (j.contains("max_bar_length")) {
        if (auto v = ck.positive(j["max_bar_length"], path + "/max_bar_length")) g.max_bar_length = *v;
    }
    if (j.contains("exclude_collinear")) {
        if (auto b = ck.boolean(j["exclude_collinear"], path + "/exclude_collinear")) g.exclude_collinear = *b;
    }
    if (j.contains("exclude_fixed_fixed")) {
        if (auto b = ck.boolean(j["exclude_fixed_fixed"], path + "/exclude_fixed_fixed")) g.exclude_fixed_fixed = *b;
    }
    if (ok) out.generator = std::move(g);
}

void parse_nodes(Checker& ck, const Json& root, int dim, ProblemFile& out) {
    const Json& nodes = root["nodes"];
    if (ck.array(nodes, "/nodes", true)) {
        std::set<int> ids;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const std::string np = "/nodes/" + std::to_string(i);
            if (!ck.object(nodes[i], np, {"id", "position", "fixed"}, {"id", "position"})) continue;
            NodeSpec n;
            auto id = ck.integer(nodes[i]["id"], np + "/id");
            auto pos = ck.vector(nodes[i]["position"], np + "/position", dim);
            if (!id || !pos) continue;
            if (!ids.insert(static_cast<int>(*id)).second) ck.error(np + "/id", "duplicate node id " + std::to_string(*id));
            n.id = static_cast<int>(*id);
            n.position = *pos;
            n.fixed = std::vector<bool>(static_cast<std::size_t>(dim), false);
            if (nodes[i].contains("fixed")) {
                if (auto f = ck.fixed_flags(nodes[i]["fixed"], np + "/fixed", dim)) n.fixed = *f;
            }
            out.nodes.push_back(std::move(n));
        }
        const int count = static_cast<int>(nodes.size());
        for (int id : ids) {
            if (id < 0 || id >= count) {
                ck.error("/nodes", "node ids must be 0.." + std::to_string(count - 1) + ", found " + std::to_string(id));
                break;
            }
        }
    }
    if (!root.contains("bars")) {
        ck.error("", "missing required field \"bars\" (explicit nodes need a bar list)");
        return;
    }
    const Json& bars = root["bars"];
    if (!ck.array(bars, "/bars", true)) return;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const std::string bp = "/bars/" + std::to_string(i);
        if (!bars[i].is_array() || bars[i].size() != 2) {
            ck.error(bp, "expected a pair of node ids");
            continue;
        }
        auto a = ck.integer(bars[i][0], bp + "/0");
        auto b = ck.integer(bars[i][1], bp + "/1");
        if (a && b) out.bars.emplace_back(static_cast<int>(*a), static_cast<int>(*b));
    }
}

void parse_material(Checker& ck, const Json& j, MaterialSpec& m) {
    const std::string path = "/material";
    if (!ck.object(j, path, {"sigma_plus", "sigma_minus", "density", "safety_factor"}, {"sigma_plus"})) return;
    if (auto v = ck.positive(j["sigma_plus"], path + "/sigma_plus")) {
        m.sigma_plus = *v;
        m.sigma_minus = -*v;
    }
    if (j.contains("sigma_minus")) {
        if (auto v = ck.number(j["sigma_minus"], path + "/sigma_minus")) {
            if (*v < 0.0) m.sigma_minus = *v;
            else ck.error(path + "/sigma_minus", "must be negative");
        }
    }
    if (j.contains("density")) {
        if (auto v = ck.positive(j["density"], path + "/density")) m.density = *v;
    }
    if (j.contains("safety_factor")) {
        if (auto v = ck.positive(j["safety_factor"], path + "/safety_factor")) m.safety_factor = *v;
    }
}

void parse_load_cases(Checker& ck, const Json& j, int dim, ProblemFile& out) {
    if (!ck.array(j, "/load_cases", true)) return;
    std::set<int> ids;
    for (std::size_t c = 0; c < j.size(); ++c) {
        const std::string cp = "/load_cases/" + std::to_string(c);
        if (!ck.object(j[c], cp, {"id", "loads"}, {"loads"})) continue;
        LoadCaseSpec lc;
        lc.id = static_cast<int>(c);
        if (j[c].contains("id")) {
            if (auto id = ck.integer(j[c]["id"], cp + "/id")) lc.id = static_cast<int>(*id);
        }
        if (!ids.insert(lc.id).second) ck.error(cp + "/id", "duplicate load case id " + std::to_string(lc.id));
        const Json& loads = j[c]["loads"];
        if (!ck.array(loads, cp + "/loads", true)) continue;
        for (std::size_t i = 0; i < loads.size(); ++i) {
            const std::string lp = cp + "/loads/" + std::to_string(i);
            if (!ck.object(loads[i], lp, {"node", "position", "force"}, {"force"})) continue;
            LoadSpec l;
            const bool has_node = loads[i].contains("node");
            const bool has_pos = loads[i].contains("position");
            if (has_node == has_pos) {
                ck.error(lp, "give exactly one of \"node\" and \"position\"");
                continue;
            }
            if (has_node) {
                if (auto id = ck.integer(loads[i]["node"], lp + "/node")) l.node = static_cast<int>(*id);
            } else if (auto pos = ck.vector(loads[i]["position"], lp + "/position", dim)) {
                l.position = *pos;
            }
            if (auto f = ck.vector(loads[i]["force"], lp + "/force", dim)) l.force = *f;
            lc.loads.push_back(std::move(l));
        }
        out.load_cases.push_back(std::move(lc));
    }
}

// Every load must name a node that exists.
void check_load_references(Checker& ck, const ProblemFile& p) {
    for (std::size_t c = 0; c < p.load_cases.size(); ++c) {
        for (std::size_t i = 0; i < p.load_cases[c].loads.size(); ++i) {
            const LoadSpec& l = p.load_cases[c].loads[i];
            const std::string lp = "/load_cases/" + std::to_string(c) + "/loads/" + std::to_string(i);
            if (p.generator) {
                const auto& axes = p.generator->axes;
                std::size_t count = 1;
                for (const auto& a : axes) count *= a.size();
                if (l.node && (*l.node < 0 || static_cast<std::size_t>(*l.node) >= count)) {
                    ck.error(lp + "/node", "node " + std::to_string(*l.node) + " is not a grid node");
                }
                if (l.position) {
                    for (std::size_t a = 0; a < axes.size() && a < l.position->size(); ++a) {
                        if (!on_axis(axes[a], (*l.position)[a])) {
                            ck.error(lp + "/position", "position is not a grid node");
                            break;
                        }
                    }
                }
            } else {
                if (l.node && std::none_of(p.nodes.begin(), p.nodes.end(),
                                           [&](const NodeSpec& n) { return n.id == *l.node; })) {
                    ck.error(lp + "/node", "unknown node " + std::to_string(*l.node));
                }
                if (l.position) {
                    const bool found = std::any_of(p.nodes.begin(), p.nodes.end(), [&](const NodeSpec& n) {
                        for (std::size_t a = 0; a < n.position.size(); ++a) {
                            if (std::abs(n.position[a] - (*l.position)[a]) > kCoordTol) return false;
                        }
                        return true;
                    });
                    if (!found) ck.error(lp + "/position", "no node at this position");
                }
            }
        }
    }
}

void parse_uncertainty(Checker& ck, const Json& j, ProblemFile& out) {
    const std::string path = "/uncertainty";
    if (!ck.object(j, path, {"relative_fraction", "rescale_to_nominal_max", "perturbation_base"},
                   {"relative_fraction"})) {
        return;
    }
    UncertaintySpec u;
    if (auto v = ck.number(j["relative_fraction"], path + "/relative_fraction")) {
        if (*v < 0.0) ck.error(path + "/relative_fraction", "must be non-negative");
        u.relative_fraction = *v;
    }
    if (j.contains("rescale_to_nominal_max")) {
        if (auto b = ck.boolean(j["rescale_to_nominal_max"], path + "/rescale_to_nominal_max")) {
            u.rescale_to_nominal_max = *b;
        }
    }
    if (j.contains("perturbation_base")) {
        if (auto name = ck.string(j["perturbation_base"], path + "/perturbation_base")) {
            try {
                u.perturbation_base = box_base_from_string(*name);
            } catch (const LoadError& e) {
                ck.error(path + "/perturbation_base", e.what());
            }
        }
    }
    out.uncertainty = u;
}

void parse_solver(Checker& ck, const Json& j, SolverSpec& s) {
    const std::string path = "/solver";
    if (!ck.object(j, path, {"feas_tol", "opt_tol", "max_iterations", "scenario_generation", "active_threshold"})) {
        return;
    }
    if (j.contains("feas_tol")) s.feas_tol = ck.positive(j["feas_tol"], path + "/feas_tol");
    if (j.contains("opt_tol")) s.opt_tol = ck.positive(j["opt_tol"], path + "/opt_tol");
    if (j.contains("max_iterations")) {
        if (auto v = ck.integer(j["max_iterations"], path + "/max_iterations")) {
            if (*v > 0) s.max_iterations = static_cast<std::size_t>(*v);
            else ck.error(path + "/max_iterations", "must be positive");
        }
    }
    if (j.contains("scenario_generation")) {
        s.scenario_generation = ck.boolean(j["scenario_generation"], path + "/scenario_generation");
    }
    if (j.contains("active_threshold")) {
        if (auto v = ck.number(j["active_threshold"], path + "/active_threshold")) {
            if (*v >= 0.0 && *v < 1.0) s.active_threshold = *v;
            else ck.error(path + "/active_threshold", "must lie in [0, 1)");
        }
    }
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
    std::vector<SchemaError> syntax;
    PositionIndex index(text);
    if (!index.build(syntax) || !syntax.empty()) {
        if (syntax.empty()) syntax.push_back({"", 0, "malformed JSON"});
        throw ProblemParseError(std::move(syntax));
    }
    const Json root = Json::parse(text);

    Checker ck(index);
    ProblemFile out;
    if (!ck.object(root, "",
                   {"name", "dimension", "nodes", "bars", "generator", "material", "load_cases", "uncertainty",
                    "s_max", "solver"},
                   {"dimension", "material", "load_cases"})) {
        throw ProblemParseError(std::move(ck.errors));
    }
    if (root.contains("name")) {
        if (auto s = ck.string(root["name"], "/name")) out.name = *s;
    }
    const auto dim = ck.integer(root["dimension"], "/dimension");
    if (!dim) throw ProblemParseError(std::move(ck.errors));
    if (*dim != 2 && *dim != 3) {
        ck.error("/dimension", "dimension must be 2 or 3, got " + std::to_string(*dim));
        throw ProblemParseError(std::move(ck.errors));
    }
    out.dimension = static_cast<int>(*dim);

    const bool has_nodes = root.contains("nodes");
    const bool has_gen = root.contains("generator");
    if (has_nodes == has_gen) {
        ck.error("", "give exactly one of \"nodes\" and \"generator\"");
    } else if (has_nodes) {
        parse_nodes(ck, root, out.dimension, out);
    } else {
        if (root.contains("bars")) ck.error("/bars", "\"bars\" is only allowed with explicit nodes");
        parse_generator(ck, root["generator"], out.dimension, out);
    }

    parse_material(ck, root["material"], out.material);
    parse_load_cases(ck, root["load_cases"], out.dimension, out);
    if (root.contains("uncertainty")) parse_uncertainty(ck, root["uncertainty"], out);
    if (root.contains("s_max")) {
        const Json& sj = root["s_max"];
        if (sj.is_array()) {
            std::vector<double> caps;
            for (std::size_t i = 0; i < sj.size(); ++i) {
                if (auto v = ck.positive(sj[i], "/s_max/" + std::to_string(i))) caps.push_back(*v);
            }
            if (caps.empty()) ck.error("/s_max", "must not be empty");
            out.s_max = caps;
        } else if (auto v = ck.positive(sj, "/s_max")) {
            out.s_max = std::vector<double>{*v};
        }
    }
    if (root.contains("solver")) parse_solver(ck, root["solver"], out.solver);
    if (ck.errors.empty()) check_load_references(ck, out);
    if (!ck.errors.empty()) throw ProblemParseError(std::move(ck.errors));
    return out;
}

ProblemFile load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

namespace {

Json fixed_json(const std::vector<bool>& fixed) {
    const bool all = std::all_of(fixed.begin(), fixed.end(), [](bool b) { return b; });
    const bool none = std::none_of(fixed.begin(), fixed.end(), [](bool b) { return b; });
    if (all || none) return Json(all);
    Json out = Json::array();
    for (bool b : fixed) out.push_back(b);
    return out;
}

}  // namespace

std::string serialize_problem(const ProblemFile& p) {
    Json root;
    if (!p.name.empty()) root["name"] = p.name;
    root["dimension"] = p.dimension;
    if (p.generator) {
        const GeneratorSpec& g = *p.generator;
        Json gj;
        gj["axes"] = g.axes;
        Json supports = Json::array();
        for (const SupportPattern& s : g.supports) {
            Json pattern = Json::array();
            for (const auto& v : s.pattern) pattern.push_back(v ? Json(*v) : Json(nullptr));
            supports.push_back(Json{{"pattern", pattern}, {"fixed", fixed_json(s.fixed)}});
        }
        gj["supports"] = supports;
        if (g.max_bar_length) gj["max_bar_length"] = *g.max_bar_length;
        gj["exclude_collinear"] = g.exclude_collinear;
        gj["exclude_fixed_fixed"] = g.exclude_fixed_fixed;
        root["generator"] = gj;
    } else {
        Json nodes = Json::array();
        for (const NodeSpec& n : p.nodes) {
            nodes.push_back(Json{{"id", n.id}, {"position", n.position}, {"fixed", fixed_json(n.fixed)}});
        }
        root["nodes"] = nodes;
        Json bars = Json::array();
        for (const auto& [a, b] : p.bars) bars.push_back(Json::array({a, b}));
        root["bars"] = bars;
    }
    root["material"] = Json{{"sigma_plus", p.material.sigma_plus},
                            {"sigma_minus", p.material.sigma_minus},
                            {"density", p.material.density},
                            {"safety_factor", p.material.safety_factor}};
    Json cases = Json::array();
    for (const LoadCaseSpec& lc : p.load_cases) {
        Json loads = Json::array();
        for (const LoadSpec& l : lc.loads) {
            Json lj;
            if (l.node) lj["node"] = *l.node;
            if (l.position) lj["position"] = *l.position;
            lj["force"] = l.force;
            loads.push_back(lj);
        }
        cases.push_back(Json{{"id", lc.id}, {"loads", loads}});
    }
    root["load_cases"] = cases;
    if (p.uncertainty) {
        root["uncertainty"] = Json{{"relative_fraction", p.uncertainty->relative_fraction},
                                   {"rescale_to_nominal_max", p.uncertainty->rescale_to_nominal_max},
                                   {"perturbation_base", to_string(p.uncertainty->perturbation_base)}};
    }
    if (p.s_max) {
        root["s_max"] = p.s_max->size() == 1 ? Json(p.s_max->front()) : Json(*p.s_max);
    }
    Json solver = Json::object();
    if (p.solver.feas_tol) solver["feas_tol"] = *p.solver.feas_tol;
    if (p.solver.opt_tol) solver["opt_tol"] = *p.solver.opt_tol;
    if (p.solver.max_iterations) solver["max_iterations"] = *p.solver.max_iterations;
    if (p.solver.scenario_generation) solver["scenario_generation"] = *p.solver.scenario_generation;
    if (p.solver.active_threshold) solver["active_threshold"] = *p.solver.active_threshold;
    if (!solver.empty()) root["solver"] = solver;
    return root.dump(2) + "\n";
}

namespace {

GroundStructure build_structure(const ProblemFile& p) {
    if (p.generator) {
        const GeneratorSpec& g = *p.generator;
        GridSpec spec;
        spec.axes = g.axes;
        spec.max_bar_length = g.max_bar_length;
        spec.exclude_collinear = g.exclude_collinear;
        spec.exclude_fixed_fixed = g.exclude_fixed_fixed;
        const auto supports = g.supports;
        const int dim = p.dimension;
        // later patterns add to earlier ones
        spec.supports = [supports, dim](const Vec& x) {
            std::vector<bool> fixed(static_cast<std::size_t>(dim), false);
            for (const SupportPattern& s : supports) {
                bool match = true;
                for (int a = 0; a < dim; ++a) {
                    const auto& v = s.pattern[static_cast<std::size_t>(a)];
                    if (v && std::abs(*v - x[a]) > kCoordTol) {
                        match = false;
                        break;
                    }
                }
                if (!match) continue;
                for (std::size_t a = 0; a < fixed.size(); ++a) fixed[a] = fixed[a] || s.fixed[a];
            }
            return fixed;
        };
        return generate_grid_ground_structure(spec);
    }
    std::vector<Node> nodes;
    for (const NodeSpec& n : p.nodes) {
        nodes.push_back(Node{n.id, Eigen::Map<const Vec>(n.position.data(), static_cast<Eigen::Index>(n.position.size())),
                             n.fixed});
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    return GroundStructure(p.dimension, std::move(nodes), p.bars);
}

}  // namespace

MaterializedProblem materialize(const ProblemFile& p) {
    MaterializedProblem out{p.name, build_structure(p), p.material.limits(), {}, std::nullopt, p.uncertainty,
                            p.solver.apply()};
    const GroundStructure& gs = out.structure;
    for (const LoadCaseSpec& lc : p.load_cases) {
        std::map<int, Vec> forces;
        for (const LoadSpec& l : lc.loads) {
            int node = -1;
            if (l.node) {
                node = *l.node;
            } else {
                const Vec pos = Eigen::Map<const Vec>(l.position->data(), static_cast<Eigen::Index>(l.position->size()));
                const auto found = gs.find_node(pos, kCoordTol);
                if (!found) throw std::invalid_argument("load case " + std::to_string(lc.id) + ": no node at position");
                node = *found;
            }
            const Vec f = Eigen::Map<const Vec>(l.force.data(), static_cast<Eigen::Index>(l.force.size()));
            auto [it, inserted] = forces.emplace(node, f);
            if (!inserted) it->second += f;
        }
        out.load_cases.push_back(make_load_case(gs, lc.id, std::move(forces)));
    }
    if (p.s_max) {
        if (p.s_max->size() == 1) {
            out.s_max = Vec::Constant(gs.num_bars(), p.s_max->front());
        } else if (static_cast<int>(p.s_max->size()) == gs.num_bars()) {
            out.s_max = Eigen::Map<const Vec>(p.s_max->data(), static_cast<Eigen::Index>(p.s_max->size()));
        } else {
            throw std::invalid_argument("s_max has " + std::to_string(p.s_max->size()) + " entries for " +
                                        std::to_string(gs.num_bars()) + " bars");
        }
    }
    return out;
}

}  // namespace trussrob
