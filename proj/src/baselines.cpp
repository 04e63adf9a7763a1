#include "gridwarp/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gridwarp {

namespace {

Polyline oriented(const Polyline& line, bool horizontal) {
  Polyline out = line;
  const Point2& a = out.points.front();
  const Point2& b = out.points.back();
  if (horizontal ? a.x() > b.x() : a.y() > b.y()) std::reverse(out.points.begin(), out.points.end());
  return out;
}

GeometricElements oriented(const GeometricElements& elems) {
  GeometricElements out = elems;
  out.top = oriented(elems.top, true);
  out.bottom = oriented(elems.bottom, true);
  out.left = oriented(elems.left, false);
  out.right = oriented(elems.right, false);
  return out;
}

}  // namespace

BoundaryCurves make_boundary_curves(const GeometricElements& elems) {
  validate(elems);
  const auto o = oriented(elems);
  return {ArcLengthCurve(o.top), ArcLengthCurve(o.right), ArcLengthCurve(o.bottom), ArcLengthCurve(o.left)};
}

double corner_mismatch(const BoundaryCurves& c) {
  return std::max({(c.top.front() - c.left.front()).norm(), (c.top.back() - c.right.front()).norm(),
                   (c.bottom.front() - c.left.back()).norm(), (c.bottom.back() - c.right.back()).norm()});
}

Point2 tfi_point(const BoundaryCurves& c, double u, double v) {
  const Point2 p00 = c.top(0.0), p10 = c.top(1.0), p01 = c.bottom(0.0), p11 = c.bottom(1.0);
  return (1 - u) * c.left(v) + u * c.right(v) + (1 - v) * c.top(u) + v * c.bottom(u) -
         ((1 - u) * (1 - v) * p00 + u * (1 - v) * p10 + (1 - u) * v * p01 + u * v * p11);
}

GridField tfi_grid(const BoundaryCurves& curves, int n) {
  if (n < 2) throw DomainError("tfi_grid: n must be >= 2");
  if (corner_mismatch(curves) > 1e-3) throw DomainError("tfi_grid: boundary curves do not meet at the corners");
  GridField g(n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) g.set(ix, iy, tfi_point(curves, double(ix) / (n - 1), double(iy) / (n - 1)));
  return g;
}

double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

Point2 TpsModel::operator()(const Point2& p) const {
  Eigen::RowVector2d out = affine.row(0) + p.x() * affine.row(1) + p.y() * affine.row(2);
  for (Eigen::Index i = 0; i < control.rows(); ++i)
    out += tps_kernel((p - control.row(i).transpose()).norm()) * kernel.row(i);
  return out.transpose();
}

double TpsModel::bending_energy() const {
  const Eigen::Index m = control.rows();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) k(i, j) = tps_kernel((control.row(i) - control.row(j)).norm());
  return (kernel.transpose() * k * kernel).trace();
}

TpsModel tps_fit(const std::vector<Point2>& p, const std::vector<Point2>& q, double reg) {
  if (p.size() != q.size()) throw DomainError("tps_fit: source and target counts differ");
  if (p.size() < 3) throw DomainError("tps_fit: need at least 3 control points");
  if (reg < 0) throw DomainError("tps_fit: regularization must be non-negative");
  const Eigen::Index m = Eigen::Index(p.size());
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 3, m + 3);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + 3, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) sys(i, j) = tps_kernel((p[std::size_t(i)] - p[std::size_t(j)]).norm());
    sys(i, i) += reg;
    sys(i, m) = sys(m, i) = 1.0;
    sys(i, m + 1) = sys(m + 1, i) = p[std::size_t(i)].x();
    sys(i, m + 2) = sys(m + 2, i) = p[std::size_t(i)].y();
    rhs.row(i) = q[std::size_t(i)].transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw DomainError("tps_fit: singular system (collinear or duplicate control points)");
  const Eigen::MatrixXd sol = lu.solve(rhs);

  TpsModel model;
  model.control.resize(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) model.control.row(i) = p[std::size_t(i)].transpose();
  model.kernel = sol.topRows(m);
  model.affine = sol.bottomRows(3);
  model.regularization = reg;
  return model;
}

GridField tps_grid(const TpsModel& model, int n) {
  if (n < 2) throw DomainError("tps_grid: n must be >= 2");
  GridField g(n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) g.set(ix, iy, model(Point2(double(ix) / (n - 1), double(iy) / (n - 1))));
  return g;
}

ControlPoints boundary_control_points(const GeometricElements& elems, double interval, int working_frame) {
  validate(elems);
  const auto o = oriented(rescale(elems, working_frame, working_frame));
  const double bx = double(elems.width - 1) / double(working_frame - 1);
  const double by = double(elems.height - 1) / double(working_frame - 1);

  ControlPoints cp;
  auto add_side = [&](const Polyline& line, auto place) {
    const auto pts = resample_polyline(line, interval);
    if (pts.size() < 2) throw ConfigError("boundary_control_points: degenerate boundary");
    const double total = Polyline{pts}.length();
    double s = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k > 0) s += (pts[k] - pts[k - 1]).norm();
      const Point2 target = place(std::clamp(s / total, 0.0, 1.0));
      const Point2 source(pts[k].x() * bx, pts[k].y() * by);
      const bool seen = std::any_of(cp.target.begin(), cp.target.end(),
                                    [&](const Point2& t) { return (t - target).norm() < 1e-12; });
      if (seen) continue;  // shared corner
      cp.target.push_back(target);
      cp.source.push_back(source);
    }
  };
  add_side(o.top, [](double t) { return Point2(t, 0.0); });
  add_side(o.bottom, [](double t) { return Point2(t, 1.0); });
  add_side(o.left, [](double t) { return Point2(0.0, t); });
  add_side(o.right, [](double t) { return Point2(1.0, t); });
  return cp;
}

}  // namespace gridwarp
