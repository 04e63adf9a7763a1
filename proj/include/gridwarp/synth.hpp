#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridwarp/core.hpp"

namespace gridwarp {

enum class WarpKind { cylinder, fold, gaussian_bumps, polynomial };

const char* to_string(WarpKind kind);
WarpKind warp_kind_from_string(const std::string& name);

struct WarpSpec {
  WarpKind kind = WarpKind::cylinder;
  double amplitude = 0.0;  // pixels
  std::uint64_t seed = 0;
  int count = 4;           // bump count for gaussian_bumps
};

/// Document rectangle on the flat page; (u, v) = (0, 0) at (x0, y0), (1, 1) at (x1, y1).
struct DocRect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  Point2 to_flat(const Point2& uv) const { return {x0 + uv.x() * (x1 - x0), y0 + uv.y() * (y1 - y0)}; }
  Point2 to_uv(const Point2& flat) const { return {(flat.x() - x0) / (x1 - x0), (flat.y() - y0) / (y1 - y0)}; }
};

struct Page {
  ImageBuffer image;
  GeometricElements elements;
  DocRect doc;
};

/// White document on a grey background with black horizontal bars as text
/// lines, grouped into paragraphs (indented first line, short last line).
/// Elements hold the exact bar midlines and the document rectangle.
Page render_page(int width, int height, int line_count, std::uint64_t seed);

/// Smooth map from warped-image pixels to flat-page pixels: flat = p + offset(p).
class Warp {
 public:
  /// One additive offset component, parameterized in normalized frame
  /// coordinates s = x / (W-1), t = y / (H-1).
  struct Term {
    enum class Type { column_sine, column_sine2, crease, bump, polynomial } type = Type::bump;
    double amplitude = 0.0;  // pixels
    double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
    Point2 direction = Point2(0.0, 1.0);
    Eigen::Matrix<double, 10, 2> poly = Eigen::Matrix<double, 10, 2>::Zero();
  };

  Warp() = default;
  Warp(WarpSpec spec, int width, int height, std::vector<Term> terms);

  Point2 offset(const Point2& warped) const;
  /// Jacobian of the warped -> flat map, I + d(offset)/dp.
  Eigen::Matrix2d jacobian(const Point2& warped) const;
  Point2 to_flat(const Point2& warped) const { return warped + offset(warped); }
  /// Newton inversion of to_flat.
  Point2 to_warped(const Point2& flat) const;

  const WarpSpec& spec() const { return spec_; }
  int width() const { return width_; }
  int height() const { return height_; }

  /// Smallest Jacobian determinant over every pixel of the frame.
  double min_jacobian_determinant() const;

 private:
  WarpSpec spec_;
  int width_ = 0, height_ = 0;
  std::vector<Term> terms_;
};

struct WarpResult {
  Warp warp;
  Plane<double> dx, dy;  // dense offset per warped pixel
  GridField gt_forward;  // normalized (u, v) of every source grid node
};

/// Throws DomainError when the requested amplitude folds the page.
WarpResult make_warp(const WarpSpec& spec, int width, int height, const DocRect& doc, int n = 128);

/// Ground-truth forward lattice of a warp: (u, v) of the flat point under each node.
GridField warp_forward_field(const Warp& warp, const DocRect& doc, int n);

/// Target raster (u, v) -> warped-image coordinate.
BackwardMap warp_backward_map(const Warp& warp, const DocRect& doc, int out_w, int out_h);

struct WarpBundle {
  ImageBuffer flat_image, warped_image;
  GridField gt_forward;
  BackwardMap gt_backward;
  GeometricElements flat_elements, warped_elements;
  DocRect doc;
  WarpSpec spec;
};

/// Warped image by backward sampling of the flat page; element polylines
/// mapped point by point; ground-truth flows recorded at out_w x out_h
/// (defaults to the page size).
WarpBundle apply_warp(const Page& page, const WarpResult& warp, int out_w = 0, int out_h = 0);

/// The flat document rectangle resampled onto the target raster: what a
/// perfect rectification produces.
ImageBuffer flat_reference(const WarpBundle& bundle);

/// Backward map of the uncorrected input: the flat document rectangle read
/// straight off the warped image.
BackwardMap identity_backward(const WarpBundle& bundle);

}  // namespace gridwarp
