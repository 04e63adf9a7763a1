#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gridwarp/core.hpp"
#include "gridwarp/pipeline.hpp"
#include "gridwarp/synth.hpp"

namespace gridwarp {

using Json = nlohmann::ordered_json;

/// PNG (8-bit gray, gray+alpha, RGB, RGBA, palette) and binary or ASCII PGM/PPM.
/// Alpha is dropped; 16-bit samples are reduced to 8 bits.
ImageBuffer read_image(const std::filesystem::path& path);
/// Format chosen by extension: .png, .pgm (gray only) or .ppm.
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);
ImageBuffer read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageBuffer& image);

/// { "schema": 1, "image_size": [w, h], "boundary": {top, bottom, left, right},
///   "text_lines": [...], "vertical_lines": [...] }, polylines as [[x, y], ...].
Json elements_to_json(const GeometricElements& elems);
/// Throws ConfigError on schema violations and missing boundaries.
GeometricElements elements_from_json(const Json& j);
GeometricElements read_elements(const std::filesystem::path& path);
void write_elements(const std::filesystem::path& path, const GeometricElements& elems);

/// "GRIDFLO1", uint32 width, uint32 height, then float32 (x, y) per pixel in
/// row-major order, all little endian. Holes are NaN pairs.
void write_flow(const std::filesystem::path& path, const BackwardMap& flow);
BackwardMap read_flow(const std::filesystem::path& path);
/// A GridField as an n x n flow of (u, v).
void write_field(const std::filesystem::path& path, const GridField& field);
GridField read_field(const std::filesystem::path& path);

Json config_to_json(const PipelineConfig& config);
/// Keys present in j override `base`; unknown keys are rejected.
PipelineConfig config_from_json(const Json& j, const PipelineConfig& base = {});
PipelineConfig read_config(const std::filesystem::path& path);

Json diagnostics_to_json(const SolveDiagnostics& d);
Json diagnostics_to_json(const InversionDiagnostics& d);
Json diagnostics_to_json(const GridDiagnostics& d);
Json energy_to_json(const EnergyReport& report);

Json warp_spec_to_json(const WarpSpec& spec);
WarpSpec warp_spec_from_json(const Json& j);

/// Directory with flat.png, warped.png, flat_elements.json,
/// warped_elements.json, gt_forward.flo, gt_backward.flo and meta.json.
void write_bundle(const std::filesystem::path& dir, const WarpBundle& bundle);
WarpBundle read_bundle(const std::filesystem::path& dir);

Json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace gridwarp
