#include "gridwarp/remap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridwarp {

namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

InversionResult invert_forward(const GridField& field, int src_w, int src_h, int out_w, int out_h) {
  if (!field.all_finite()) throw DomainError("invert_forward: field has non-finite entries");
  if (out_w < 2 || out_h < 2 || src_w < 2 || src_h < 2) throw DomainError("invert_forward: sizes must be >= 2");
  const int n = field.size();
  const double eps = 1e-9;

  Plane<double> sum_x = Plane<double>::Zero(out_h, out_w);
  Plane<double> sum_y = Plane<double>::Zero(out_h, out_w);
  Plane<int> count = Plane<int>::Zero(out_h, out_w);
  Plane<int> interior = Plane<int>::Zero(out_h, out_w);
  InversionResult res;
  auto& diag = res.diagnostics;
  diag.fold_mask = Plane<std::uint8_t>::Zero(out_h, out_w);

  auto target = [&](int ix, int iy) {
    return Point2(field.u()(iy, ix) * (out_w - 1), field.v()(iy, ix) * (out_h - 1));
  };
  auto source = [&](int ix, int iy) {
    return Point2(double(ix) / (n - 1) * (src_w - 1), double(iy) / (n - 1) * (src_h - 1));
  };

  auto raster = [&](const Point2 (&t)[3], const Point2 (&s)[3]) {
    const double area2 = cross(t[1] - t[0], t[2] - t[0]);
    if (std::abs(area2) < 1e-12) {
      ++diag.degenerate_triangles;
      return;
    }
    const bool folded = area2 < 0;
    if (folded) ++diag.folded_triangles;
    const double minx = std::min({t[0].x(), t[1].x(), t[2].x()}), maxx = std::max({t[0].x(), t[1].x(), t[2].x()});
    const double miny = std::min({t[0].y(), t[1].y(), t[2].y()}), maxy = std::max({t[0].y(), t[1].y(), t[2].y()});
    const int x0 = std::max(0, int(std::ceil(minx - 1e-7))), x1 = std::min(out_w - 1, int(std::floor(maxx + 1e-7)));
    const int y0 = std::max(0, int(std::ceil(miny - 1e-7))), y1 = std::min(out_h - 1, int(std::floor(maxy + 1e-7)));
    for (int py = y0; py <= y1; ++py)
      for (int px = x0; px <= x1; ++px) {
        const Point2 q(px, py);
        const double w0 = cross(t[1] - q, t[2] - q) / area2;
        const double w1 = cross(t[2] - q, t[0] - q) / area2;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < -eps || w1 < -eps || w2 < -eps) continue;
        const Point2 p = w0 * s[0] + w1 * s[1] + w2 * s[2];
        sum_x(py, px) += p.x();
        sum_y(py, px) += p.y();
        ++count(py, px);
        if (w0 > eps && w1 > eps && w2 > eps) ++interior(py, px);
        if (folded) diag.fold_mask(py, px) = 1;
      }
  };

  for (int iy = 0; iy + 1 < n; ++iy)
    for (int ix = 0; ix + 1 < n; ++ix) {
      const Point2 ta = target(ix, iy), tb = target(ix + 1, iy), tc = target(ix, iy + 1), td = target(ix + 1, iy + 1);
      const Point2 sa = source(ix, iy), sb = source(ix + 1, iy), sc = source(ix, iy + 1), sd = source(ix + 1, iy + 1);
      raster({ta, tb, td}, {sa, sb, sd});
      raster({ta, td, tc}, {sa, sd, sc});
    }

  res.map = BackwardMap(out_w, out_h);
  for (int py = 0; py < out_h; ++py)
    for (int px = 0; px < out_w; ++px) {
      const int c = count(py, px);
      if (c == 0) {
        res.map.set_hole(px, py);
        ++diag.hole_pixels;
        continue;
      }
      res.map.set(px, py, Point2(sum_x(py, px) / c, sum_y(py, px) / c));
      if (interior(py, px) > 1) ++diag.overlap_pixels;
    }
  diag.folded_pixels = long((diag.fold_mask != 0).count());
  return res;
}

BackwardMap lattice_to_backward(const GridField& lattice) {
  const int n = lattice.size();
  BackwardMap bm(n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) bm.set(ix, iy, lattice.at(ix, iy));
  return bm;
}

BackwardMap fill_holes(const BackwardMap& bm) {
  if (bm.hole_count() == long(bm.valid.size())) throw DomainError("fill_holes: map has no valid pixels");
  BackwardMap out = bm;
  const int w = bm.width, h = bm.height;
  const int max_r = std::max(w, h);
  for (int py = 0; py < h; ++py)
    for (int px = 0; px < w; ++px) {
      if (!bm.is_hole(px, py)) continue;
      long best_d2 = std::numeric_limits<long>::max();
      long best_idx = -1;
      auto consider = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h || bm.is_hole(x, y)) return;
        const long d2 = long(x - px) * (x - px) + long(y - py) * (y - py);
        const long idx = long(y) * w + x;
        if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
          best_d2 = d2;
          best_idx = idx;
        }
      };
      for (int r = 1; r <= max_r; ++r) {
        if (long(r) * r > best_d2) break;
        for (int k = -r; k <= r; ++k) {
          consider(px + k, py - r);
          consider(px + k, py + r);
        }
        for (int k = -r + 1; k <= r - 1; ++k) {
          consider(px - r, py + k);
          consider(px + r, py + k);
        }
      }
      out.set(px, py, bm.at(int(best_idx % w), int(best_idx / w)));
    }
  return out;
}

namespace {

double sample_plane(const Plane<double>& plane, double sx, double sy) {
  const int w = int(plane.cols()), h = int(plane.rows());
  sx = std::clamp(sx, 0.0, double(w - 1));
  sy = std::clamp(sy, 0.0, double(h - 1));
  const int x0 = std::min(int(sx), std::max(w - 2, 0));
  const int y0 = std::min(int(sy), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double dx = sx - x0, dy = sy - y0;
  return (1 - dx) * (1 - dy) * plane(y0, x0) + dx * (1 - dy) * plane(y0, x1) + (1 - dx) * dy * plane(y1, x0) +
         dx * dy * plane(y1, x1);
}

}  // namespace

BackwardMap upsample_backward(const BackwardMap& bm, int width, int height) {
  if (bm.hole_count() > 0) throw DomainError("upsample_backward: fill holes first");
  if (width < 1 || height < 1) throw DomainError("upsample_backward: invalid size");
  BackwardMap out(width, height);
  const double fx = width > 1 ? double(bm.width - 1) / (width - 1) : 0.0;
  const double fy = height > 1 ? double(bm.height - 1) / (height - 1) : 0.0;
  for (int py = 0; py < height; ++py)
    for (int px = 0; px < width; ++px) {
      const double sx = px * fx, sy = py * fy;
      out.set(px, py, Point2(sample_plane(bm.x, sx, sy), sample_plane(bm.y, sx, sy)));
    }
  return out;
}

ImageBuffer resample(const ImageBuffer& src, const BackwardMap& bm) {
  ImageBuffer out(bm.width, bm.height, src.channels);
  const int w = src.width, h = src.height;
  for (int py = 0; py < bm.height; ++py)
    for (int px = 0; px < bm.width; ++px) {
      if (bm.is_hole(px, py)) continue;
      const double sx = std::clamp(bm.x(py, px), 0.0, double(w - 1));
      const double sy = std::clamp(bm.y(py, px), 0.0, double(h - 1));
      const int x0 = std::min(int(sx), std::max(w - 2, 0)), y0 = std::min(int(sy), std::max(h - 2, 0));
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double dx = sx - x0, dy = sy - y0;
      for (int c = 0; c < src.channels; ++c) {
        const double val = (1 - dx) * (1 - dy) * src.at(x0, y0, c) + dx * (1 - dy) * src.at(x1, y0, c) +
                           (1 - dx) * dy * src.at(x0, y1, c) + dx * dy * src.at(x1, y1, c);
        out.at(px, py, c) = std::uint8_t(std::clamp(std::lround(val), 0L, 255L));
      }
    }
  return out;
}

BackwardMap rectangle_backward(double x0, double y0, double x1, double y1, int width, int height) {
  BackwardMap bm(width, height);
  for (int py = 0; py < height; ++py)
    for (int px = 0; px < width; ++px) {
      const double u = width > 1 ? double(px) / (width - 1) : 0.0;
      const double v = height > 1 ? double(py) / (height - 1) : 0.0;
      bm.set(px, py, Point2(x0 + u * (x1 - x0), y0 + v * (y1 - y0)));
    }
  return bm;
}

}  // namespace gridwarp
