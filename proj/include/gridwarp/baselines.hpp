#pragma once

#include <vector>

#include <Eigen/Core>

#include "gridwarp/core.hpp"

namespace gridwarp {

/// Four arc-length parameterized boundary curves: top and bottom run left to
/// right, left and right run top to bottom.
struct BoundaryCurves {
  ArcLengthCurve top, right, bottom, left;
};

/// Orients the element boundaries to the convention above.
BoundaryCurves make_boundary_curves(const GeometricElements& elems);

/// Largest distance between curve ends that should meet at a corner.
double corner_mismatch(const BoundaryCurves& curves);

/// Coons patch: both ruled surfaces minus the bilinear corner correction.
Point2 tfi_point(const BoundaryCurves& curves, double u, double v);

/// Source position of every target lattice node (u, v) = (ix, iy) / (n-1).
/// Throws DomainError when corners disagree by more than 1e-3 pixels.
GridField tfi_grid(const BoundaryCurves& curves, int n);

/// Biharmonic kernel r^2 log r.
double tps_kernel(double r);

struct TpsModel {
  Eigen::MatrixX2d control;          // p_i, one per row
  Eigen::MatrixX2d kernel;           // w_i
  Eigen::Matrix<double, 3, 2> affine;  // rows: constant, x, y
  double regularization = 0.0;

  Point2 operator()(const Point2& p) const;

  /// trace(W^T K W); zero exactly when the model is affine.
  double bending_energy() const;
};

/// Closed-form minimizer of sum |f(p_i) - q_i|^2 + reg * bending energy via the
/// bordered kernel system. Throws DomainError for singular configurations.
TpsModel tps_fit(const std::vector<Point2>& p, const std::vector<Point2>& q, double reg = 0.0);

/// Model evaluated at every lattice node (ix, iy) / (n-1).
GridField tps_grid(const TpsModel& model, int n);

struct ControlPoints {
  std::vector<Point2> target;  // normalized (u, v) on the unit square boundary
  std::vector<Point2> source;  // source pixels
};

/// Boundary sampled at `interval` pixels of the square working frame, each
/// point paired with its arc-length position on the unit square.
ControlPoints boundary_control_points(const GeometricElements& elems, double interval = 4.0,
                                      int working_frame = 512);

}  // namespace gridwarp
