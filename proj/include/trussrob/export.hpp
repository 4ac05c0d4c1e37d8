#pragma once

// Figure export: SVG line drawings of 2D designs and OBJ cylinder meshes of
// 3D designs. Only bars at or above the threshold are drawn.

#include "trussrob/geometry.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace trussrob {

class ExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SvgOptions {
    double reference_section = 0.0;  ///< s drawn at max_stroke; 0 means max(s) of this design
    double max_stroke = 8.0;         ///< px
    double pixels_per_meter = 200.0;
    double margin = 20.0;            ///< px
    double threshold = 1e-6;         ///< relative to the reference section
};

/// Largest section over several designs, for drawing them at a common scale.
double shared_reference_section(const std::vector<Vec>& designs);

/// Stroke width is proportional to s. The y axis points up.
/// Throws ExportError("svg requires dimension 2") for 3D structures.
void write_svg(std::ostream& os, const Vec& s, const GroundStructure& gs, const SvgOptions& options = {});
void export_svg(const Vec& s, const GroundStructure& gs, const std::string& path, const SvgOptions& options = {});

struct ObjOptions {
    int segments = 12;
    double threshold = 1e-6;  ///< relative to max(s)
};

/// One closed cylinder per active bar with radius sqrt(s / pi).
/// Throws ExportError("obj requires dimension 3") for 2D structures.
void write_obj(std::ostream& os, const Vec& s, const GroundStructure& gs, const ObjOptions& options = {});
void export_obj(const Vec& s, const GroundStructure& gs, const std::string& path, const ObjOptions& options = {});

}  // namespace trussrob
