#pragma once

#include <cstdint>

#include "gridwarp/core.hpp"

namespace gridwarp {

struct InversionDiagnostics {
  long degenerate_triangles = 0;
  long folded_triangles = 0;   // orientation flipped relative to the source grid
  long folded_pixels = 0;      // pixels touched by a folded triangle
  long overlap_pixels = 0;     // pixels receiving contributions from several interiors
  long hole_pixels = 0;
  Plane<std::uint8_t> fold_mask;  // 1 where a folded triangle contributed
};

struct InversionResult {
  BackwardMap map;
  InversionDiagnostics diagnostics;
};

/// Rasterizes every grid cell's two UV-space triangles into an out_w x out_h
/// target raster (pixel p sits at u = p / (out_w - 1)) and interpolates the
/// source coordinates barycentrically. Overlapping contributions are averaged;
/// uncovered pixels are holes. Source node (ix, iy) sits at
/// (ix / (n-1) * (src_w-1), iy / (n-1) * (src_h-1)).
InversionResult invert_forward(const GridField& field, int src_w, int src_h, int out_w, int out_h);

/// Source positions of a target lattice (TFI/TPS output) as an n x n backward map.
BackwardMap lattice_to_backward(const GridField& lattice);

/// Each hole takes the value of its nearest valid pixel (ties: scan order).
/// Throws DomainError for an all-hole map.
BackwardMap fill_holes(const BackwardMap& bm);

/// Corner-aligned bilinear resize. Throws DomainError if holes remain.
BackwardMap upsample_backward(const BackwardMap& bm, int width, int height);

/// Bilinear sample of src at every backward-map coordinate, clamped to the
/// source frame. Holes produce zero samples.
ImageBuffer resample(const ImageBuffer& src, const BackwardMap& bm);

/// Backward map of an axis-aligned rectangle [x0,x1]x[y0,y1] onto width x height.
BackwardMap rectangle_backward(double x0, double y0, double x1, double y1, int width, int height);

}  // namespace gridwarp
