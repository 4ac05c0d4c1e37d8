#include "trussrob/export.hpp"

#include <Eigen/Geometry>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

namespace trussrob {

namespace {

double max_section(const Vec& s) {
    return s.size() == 0 ? 0.0 : std::max(s.maxCoeff(), 0.0);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ExportError("cannot open '" + path + "' for writing");
    return out;
}

void check_size(const Vec& s, const GroundStructure& gs) {
    if (s.size() != gs.num_bars()) {
        throw ExportError("design has " + std::to_string(s.size()) + " sections for " +
                          std::to_string(gs.num_bars()) + " bars");
    }
}

}  // namespace

double shared_reference_section(const std::vector<Vec>& designs) {
    double ref = 0.0;
    for (const Vec& s : designs) ref = std::max(ref, max_section(s));
    return ref;
}

void write_svg(std::ostream& os, const Vec& s, const GroundStructure& gs, const SvgOptions& options) {
    if (gs.dimension() != 2) throw ExportError("svg requires dimension 2");
    check_size(s, gs);

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const Node& n : gs.nodes()) {
        const double x = n.position[0], y = n.position[1];
        xmin = first ? x : std::min(xmin, x);
        xmax = first ? x : std::max(xmax, x);
        ymin = first ? y : std::min(ymin, y);
        ymax = first ? y : std::max(ymax, y);
        first = false;
    }
    const double k = options.pixels_per_meter;
    const double m = options.margin;
    const double width = (xmax - xmin) * k + 2 * m;
    const double height = (ymax - ymin) * k + 2 * m;
    auto px = [&](double x) { return m + (x - xmin) * k; };
    auto py = [&](double y) { return m + (ymax - y) * k; };

    const double ref = options.reference_section > 0 ? options.reference_section : max_section(s);
    if (ref <= 0) spdlog::warn("all cross-sections are zero; the drawing is empty");

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<g stroke=\"black\" stroke-linecap=\"round\">\n";
    if (ref > 0) {
        for (const Bar& bar : gs.bars()) {
            const double sk = s[bar.id];
            if (sk < options.threshold * ref) continue;
            const Vec& a = gs.nodes()[static_cast<std::size_t>(bar.a)].position;
            const Vec& b = gs.nodes()[static_cast<std::size_t>(bar.b)].position;
            os << "<line x1=\"" << px(a[0]) << "\" y1=\"" << py(a[1]) << "\" x2=\"" << px(b[0]) << "\" y2=\""
               << py(b[1]) << "\" stroke-width=\"" << options.max_stroke * sk / ref << "\"/>\n";
        }
    }
    os << "</g>\n<g fill=\"gray\">\n";
    for (const Node& n : gs.nodes()) {
        if (std::none_of(n.fixed.begin(), n.fixed.end(), [](bool f) { return f; })) continue;
        os << "<rect x=\"" << px(n.position[0]) - 4 << "\" y=\"" << py(n.position[1]) - 4
           << "\" width=\"8\" height=\"8\"/>\n";
    }
    os << "</g>\n</svg>\n";
}

void export_svg(const Vec& s, const GroundStructure& gs, const std::string& path, const SvgOptions& options) {
    if (gs.dimension() != 2) throw ExportError("svg requires dimension 2");
    std::ofstream out = open_output(path);
    write_svg(out, s, gs, options);
    if (!out) throw ExportError("write to '" + path + "' failed");
}

void write_obj(std::ostream& os, const Vec& s, const GroundStructure& gs, const ObjOptions& options) {
    if (gs.dimension() != 3) throw ExportError("obj requires dimension 3");
    check_size(s, gs);
    const int seg = std::max(options.segments, 3);
    const double ref = max_section(s);
    if (ref <= 0) spdlog::warn("all cross-sections are zero; the mesh is empty");

    os << "# " << gs.num_bars() << " candidate bars, radius sqrt(s/pi)\n";
    long base = 1;  // OBJ indices are 1-based
    for (const Bar& bar : gs.bars()) {
        const double sk = s[bar.id];
        if (ref <= 0 || sk < options.threshold * ref) continue;
        const double radius = std::sqrt(sk / std::numbers::pi);
        const Eigen::Vector3d a = gs.nodes()[static_cast<std::size_t>(bar.a)].position;
        const Eigen::Vector3d b = gs.nodes()[static_cast<std::size_t>(bar.b)].position;
        const Eigen::Vector3d axis = (b - a).normalized();
        const Eigen::Vector3d helper =
            std::abs(axis.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
        const Eigen::Vector3d u = axis.cross(helper).normalized();
        const Eigen::Vector3d v = axis.cross(u);

        os << "o bar" << bar.id << "\n";
        for (const Eigen::Vector3d* end : {&a, &b}) {
            for (int i = 0; i < seg; ++i) {
                const double t = 2.0 * std::numbers::pi * i / seg;
                const Eigen::Vector3d p = *end + radius * (std::cos(t) * u + std::sin(t) * v);
                os << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << "\n";
            }
        }
        for (int i = 0; i < seg; ++i) {
            const long i0 = base + i, i1 = base + (i + 1) % seg;
            os << "f " << i0 << ' ' << i1 << ' ' << i1 + seg << ' ' << i0 + seg << "\n";
        }
        os << "f";
        for (int i = seg - 1; i >= 0; --i) os << ' ' << base + i;
        os << "\nf";
        for (int i = 0; i < seg; ++i) os << ' ' << base + seg + i;
        os << "\n";
        base += 2L * seg;
    }
}

void export_obj(const Vec& s, const GroundStructure& gs, const std::string& path, const ObjOptions& options) {
    if (gs.dimension() != 3) throw ExportError("obj requires dimension 3");
    std::ofstream out = open_output(path);
    write_obj(out, s, gs, options);
    if (!out) throw ExportError("write to '" + path + "' failed");
}

}  // namespace trussrob
