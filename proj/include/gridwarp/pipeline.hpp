#pragma once

#include <string>

#include "gridwarp/constraints.hpp"
#include "gridwarp/core.hpp"
#include "gridwarp/elements.hpp"
#include "gridwarp/metrics.hpp"
#include "gridwarp/remap.hpp"
#include "gridwarp/solver.hpp"

namespace gridwarp {

struct PipelineConfig {
  SolverParams solver;
  DiscretizeParams discretize;
  VerticalDetectParams vertical;
  bool detect_vertical = true;  // replace supplied vertical lines with detected ones
  bool use_text_lines = true;
  bool use_vertical_lines = true;
  int output_width = 0;   // 0: longer input side
  int output_height = 0;  // 0: longer input side
  int backward_size = 0;  // inversion raster side; 0: solver n
};

void validate(const PipelineConfig& config);

/// Output raster size after applying the defaults.
std::pair<int, int> output_size(const PipelineConfig& config, int width, int height);

/// The elements the solver sees: text and vertical lines dropped or detected per config.
GeometricElements prepare_elements(const GeometricElements& elems, const PipelineConfig& config);

struct DewarpResult {
  GeometricElements elements;  // as constrained
  GridField field;
  SolveDiagnostics u, v;
  InversionDiagnostics inversion;
  GridDiagnostics grid;
  BackwardMap backward;  // output raster -> input pixels
  ImageBuffer image;
};

/// discretize -> solve -> invert -> fill -> upsample.
DewarpResult compute_dewarp(const GeometricElements& elems, const PipelineConfig& config);

/// compute_dewarp followed by resampling of the input image.
DewarpResult dewarp(const ImageBuffer& image, const GeometricElements& elems, const PipelineConfig& config);

enum class Baseline { tfi, tps };

const char* to_string(Baseline b);
Baseline baseline_from_string(const std::string& name);

struct BaselineResult {
  GridField lattice;  // source pixel of each target lattice node
  BackwardMap backward;
  ImageBuffer image;
};

BaselineResult compute_baseline(const GeometricElements& elems, Baseline method, const PipelineConfig& config,
                                double tps_regularization = 0.0);

BaselineResult baseline_dewarp(const ImageBuffer& image, const GeometricElements& elems, Baseline method,
                               const PipelineConfig& config, double tps_regularization = 0.0);

/// RGB copy of the image with boundaries red, text lines green, vertical lines yellow.
ImageBuffer render_overlay(const ImageBuffer& image, const GeometricElements& elems);

/// RGB picture of a forward field at width x height: red = u, green = v, with
/// dark iso-lines every 1/16.
ImageBuffer render_uv(const GridField& field, int width, int height);

}  // namespace gridwarp
