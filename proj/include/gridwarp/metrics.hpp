#pragma once

#include "gridwarp/core.hpp"

namespace gridwarp {

struct MsSsimOptions {
  int scales = 5;
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double max_value = 255.0;
};

/// Multi-scale SSIM of two equally sized images (colour is reduced to Rec. 601
/// luma). Gaussian windows are applied without padding; each coarser scale is a
/// 2x2 average after symmetric padding of odd edges. Contrast-structure factors
/// are clipped at zero before weighting. Needs min(width, height) >= 11 * 2^(scales-1).
double ms_ssim(const ImageBuffer& a, const ImageBuffer& b, const MsSsimOptions& options = {});

/// Mean Euclidean distance between two dense flows over pixels valid in both.
double local_distortion(const BackwardMap& estimate, const BackwardMap& reference);

struct GridDiagnostics {
  long fold_count = 0;         // cells whose centre Jacobian determinant is negative
  double min_cell_area = 0.0;  // smallest signed quad area relative to a uniform cell
  double row_v_std = 0.0;      // mean over grid rows of the spread of v
  double col_u_std = 0.0;      // mean over grid columns of the spread of u
};

GridDiagnostics grid_diagnostics(const GridField& field);

}  // namespace gridwarp
