#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridwarp/errors.hpp"

namespace gridwarp {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Pixel coordinate: x rightward, y downward.
using Point2 = Vec2<double>;

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Polyline {
  std::vector<Point2> points;

  double length() const;
  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

enum class Side { top, bottom, left, right };

const char* to_string(Side side);

struct GeometricElements {
  Polyline top, bottom, left, right;
  std::vector<Polyline> text_lines;
  std::vector<Polyline> vertical_lines;
  int width = 0;
  int height = 0;

  const Polyline& boundary(Side side) const;
  Polyline& boundary(Side side);
};

/// Throws ConfigError when a boundary side is missing or a point leaves [0,W]x[0,H].
void validate(const GeometricElements& elems);

/// Two-channel n x n lattice. Forward fields store normalized (u, v) per source
/// grid node; interpolation baselines store source pixel (x, y) per target node.
/// Node (ix, iy) lives at row iy, column ix; flat index iy * n + ix.
template <typename Scalar>
class GridFieldT {
 public:
  using PlaneType = Plane<Scalar>;

  GridFieldT() = default;
  explicit GridFieldT(int n) : n_(n), u_(PlaneType::Zero(n, n)), v_(PlaneType::Zero(n, n)) {}

  /// u = ix / (n-1), v = iy / (n-1).
  static GridFieldT uniform(int n) {
    GridFieldT f(n);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        f.u_(iy, ix) = Scalar(ix) / Scalar(n - 1);
        f.v_(iy, ix) = Scalar(iy) / Scalar(n - 1);
      }
    return f;
  }

  int size() const { return n_; }

  PlaneType& u() { return u_; }
  const PlaneType& u() const { return u_; }
  PlaneType& v() { return v_; }
  const PlaneType& v() const { return v_; }
  PlaneType& channel(int c) { return c == 0 ? u_ : v_; }
  const PlaneType& channel(int c) const { return c == 0 ? u_ : v_; }

  Vec2<Scalar> at(int ix, int iy) const { return {u_(iy, ix), v_(iy, ix)}; }
  void set(int ix, int iy, const Vec2<Scalar>& value) {
    u_(iy, ix) = value.x();
    v_(iy, ix) = value.y();
  }

  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> flat(int c) {
    return {channel(c).data(), Eigen::Index(n_) * n_};
  }
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> flat(int c) const {
    return {channel(c).data(), Eigen::Index(n_) * n_};
  }

  bool all_finite() const { return u_.allFinite() && v_.allFinite(); }

 private:
  int n_ = 0;
  PlaneType u_, v_;
};

using GridField = GridFieldT<double>;

/// Target pixel -> source coordinate, with an explicit validity channel.
struct BackwardMap {
  BackwardMap() = default;
  BackwardMap(int w, int h)
      : width(w), height(h), x(Plane<double>::Zero(h, w)), y(Plane<double>::Zero(h, w)),
        valid(Plane<std::uint8_t>::Zero(h, w)) {}

  int width = 0;
  int height = 0;
  Plane<double> x, y;
  Plane<std::uint8_t> valid;

  bool is_hole(int px, int py) const { return valid(py, px) == 0; }
  Point2 at(int px, int py) const { return {x(py, px), y(py, px)}; }
  void set(int px, int py, const Point2& p) {
    x(py, px) = p.x();
    y(py, px) = p.y();
    valid(py, px) = 1;
  }
  void set_hole(int px, int py) {
    x(py, px) = 0.0;
    y(py, px) = 0.0;
    valid(py, px) = 0;
  }
  long hole_count() const { return long(valid.size()) - long((valid != 0).count()); }
};

/// Row-major 8-bit image with 1 or 3 interleaved channels.
struct ImageBuffer {
  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(std::size_t(w) * h * c, fill) {}

  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  std::uint8_t& at(int px, int py, int c = 0) { return data[(std::size_t(py) * width + px) * channels + c]; }
  std::uint8_t at(int px, int py, int c = 0) const {
    return data[(std::size_t(py) * width + px) * channels + c];
  }
  bool operator==(const ImageBuffer&) const = default;
};

/// Rec. 601 luma for 3-channel input; copies single-channel input.
ImageBuffer to_gray(const ImageBuffer& img);

/// Bilinear coupling of a point to its enclosing grid cell. Corner order:
/// (x0,y0), (x0+1,y0), (x0,y0+1), (x0+1,y0+1).
template <typename Scalar>
struct BilinearStencil {
  std::array<Eigen::Vector2i, 4> nodes;
  std::array<Scalar, 4> weights;

  int flat_index(int k, int n) const { return nodes[k].y() * n + nodes[k].x(); }
};

/// Weights of the four nodes surrounding p, given in grid units.
/// Requires 0 <= p.x, p.y <= n - 1.
template <typename Scalar>
BilinearStencil<Scalar> bilinear_weights(const Vec2<Scalar>& p, int n) {
  using std::floor;
  if (n < 2) throw DomainError("bilinear_weights: grid size must be >= 2");
  const Scalar hi = Scalar(n - 1);
  if (!(p.x() >= Scalar(0) && p.x() <= hi && p.y() >= Scalar(0) && p.y() <= hi))
    throw DomainError("bilinear_weights: point outside the grid");
  int x0 = std::min(int(floor(p.x())), n - 2);
  int y0 = std::min(int(floor(p.y())), n - 2);
  const Scalar dx = p.x() - Scalar(x0);
  const Scalar dy = p.y() - Scalar(y0);
  BilinearStencil<Scalar> s;
  s.nodes = {Eigen::Vector2i(x0, y0), Eigen::Vector2i(x0 + 1, y0), Eigen::Vector2i(x0, y0 + 1),
             Eigen::Vector2i(x0 + 1, y0 + 1)};
  s.weights = {(Scalar(1) - dx) * (Scalar(1) - dy), dx * (Scalar(1) - dy), (Scalar(1) - dx) * dy, dx * dy};
  return s;
}

/// Bilinear interpolation of one plane at grid-unit position p.
template <typename Scalar>
Scalar interpolate(const Plane<Scalar>& plane, const Vec2<Scalar>& p) {
  const auto s = bilinear_weights(p, int(plane.rows()));
  Scalar acc(0);
  for (int k = 0; k < 4; ++k) acc += s.weights[k] * plane(s.nodes[k].y(), s.nodes[k].x());
  return acc;
}

/// Source pixel -> grid units: g = x / (W-1) * (n-1).
inline Point2 to_grid(const Point2& pixel, int width, int height, int n) {
  return {pixel.x() / double(width - 1) * double(n - 1), pixel.y() / double(height - 1) * double(n - 1)};
}

inline Point2 grid_to_pixel(const Point2& g, int width, int height, int n) {
  return {g.x() / double(n - 1) * double(width - 1), g.y() / double(n - 1) * double(height - 1)};
}

/// Points at arc-length spacing `interval`, always including both endpoints.
/// Zero-length input yields an empty list.
std::vector<Point2> resample_polyline(const Polyline& line, double interval);

/// Polyline evaluated by normalized arc length t in [0, 1].
class ArcLengthCurve {
 public:
  explicit ArcLengthCurve(const Polyline& line);

  Point2 operator()(double t) const;
  double length() const { return arc_.back(); }
  const Point2& front() const { return points_.front(); }
  const Point2& back() const { return points_.back(); }

 private:
  std::vector<Point2> points_;
  std::vector<double> arc_;
};

/// Scales every element coordinate from one frame to another with the
/// (W-1)-aligned convention used by the grid mapping.
GeometricElements rescale(const GeometricElements& elems, int width, int height);

}  // namespace gridwarp
