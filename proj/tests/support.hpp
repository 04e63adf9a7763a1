#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gridwarp/core.hpp"
#include "gridwarp/solver.hpp"

namespace gridwarp::testing {

inline Polyline segment(Point2 a, Point2 b, int pieces = 1) {
  Polyline line;
  for (int k = 0; k <= pieces; ++k) line.points.push_back(a + (b - a) * (double(k) / pieces));
  return line;
}

/// Axis-aligned document rectangle as four straight boundary polylines.
inline GeometricElements rect_elements(int width, int height, double x0, double y0, double x1, double y1) {
  GeometricElements e;
  e.width = width;
  e.height = height;
  e.top = segment({x0, y0}, {x1, y0});
  e.bottom = segment({x0, y1}, {x1, y1});
  e.left = segment({x0, y0}, {x0, y1});
  e.right = segment({x1, y0}, {x1, y1});
  return e;
}

/// Least-squares minimizer from the stacked, row-scaled dense system, by QR.
/// Independent of the normal-equation assembly used by the solver.
inline Eigen::VectorXd dense_minimizer(const QuadraticProblem& p) {
  Eigen::Index rows = 0;
  for (const auto& b : p.blocks) rows += b.rows.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, p.unknowns());
  Eigen::VectorXd rhs(rows);
  Eigen::Index r0 = 0;
  for (const auto& b : p.blocks) {
    const double s = std::sqrt(b.weight);
    for (Eigen::Index r = 0; r < b.rows.rows(); ++r) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(b.rows, r); it; ++it)
        a(r0 + r, it.col()) += s * it.value();
      rhs(r0 + r) = s * b.rhs(r);
    }
    r0 += b.rows.rows();
  }
  return a.colPivHouseholderQr().solve(rhs);
}

inline std::vector<Point2> random_points(std::mt19937_64& rng, int count, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<Point2> pts;
  for (int i = 0; i < count; ++i) pts.emplace_back(d(rng), d(rng));
  return pts;
}

}  // namespace gridwarp::testing
