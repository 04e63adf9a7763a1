#include "gridwarp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace gridwarp {

namespace {

using Image = Plane<double>;

Image to_plane(const ImageBuffer& img) {
  const ImageBuffer g = to_gray(img);
  Image out(g.height, g.width);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) out(y, x) = g.at(x, y);
  return out;
}

// Separable valid-mode filtering with a normalized 1-D kernel.
Image filter_valid(const Image& img, const std::vector<double>& k) {
  const int r = int(k.size());
  const Eigen::Index h = img.rows(), w = img.cols();
  Image tmp = Image::Zero(h, w - r + 1);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < tmp.cols(); ++x) {
      double acc = 0.0;
      for (int i = 0; i < r; ++i) acc += k[std::size_t(i)] * img(y, x + i);
      tmp(y, x) = acc;
    }
  Image out = Image::Zero(h - r + 1, tmp.cols());
  for (Eigen::Index y = 0; y < out.rows(); ++y)
    for (Eigen::Index x = 0; x < out.cols(); ++x) {
      double acc = 0.0;
      for (int i = 0; i < r; ++i) acc += k[std::size_t(i)] * tmp(y + i, x);
      out(y, x) = acc;
    }
  return out;
}

Image downsample(const Image& img) {
  const Eigen::Index h = (img.rows() + 1) / 2, w = (img.cols() + 1) / 2;
  Image out(h, w);
  auto at = [&](Eigen::Index y, Eigen::Index x) {
    return img(std::min(y, img.rows() - 1), std::min(x, img.cols() - 1));
  };
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      out(y, x) = 0.25 * (at(2 * y, 2 * x) + at(2 * y, 2 * x + 1) + at(2 * y + 1, 2 * x) + at(2 * y + 1, 2 * x + 1));
  return out;
}

struct ScaleResult {
  double ssim, cs;
};

ScaleResult ssim_scale(const Image& x, const Image& y, const std::vector<double>& k, const MsSsimOptions& o) {
  const double c1 = (o.k1 * o.max_value) * (o.k1 * o.max_value);
  const double c2 = (o.k2 * o.max_value) * (o.k2 * o.max_value);
  const Image mu_x = filter_valid(x, k), mu_y = filter_valid(y, k);
  const Image num0 = 2.0 * mu_x * mu_y;
  const Image den0 = mu_x.square() + mu_y.square();
  const Image lum = (num0 + c1) / (den0 + c1);
  const Image num1 = 2.0 * filter_valid(x * y, k);
  const Image den1 = filter_valid(x.square() + y.square(), k);
  const Image cs = (num1 - num0 + c2) / (den1 - den0 + c2);
  return {(lum * cs).mean(), cs.mean()};
}

}  // namespace

double ms_ssim(const ImageBuffer& a, const ImageBuffer& b, const MsSsimOptions& o) {
  static constexpr double kWeights[] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  if (a.width != b.width || a.height != b.height) throw DomainError("ms_ssim: image sizes differ");
  if (o.scales < 1 || o.scales > 5) throw DomainError("ms_ssim: scales must lie in [1, 5]");
  const int min_side = o.window << (o.scales - 1);
  if (std::min(a.width, a.height) < min_side)
    throw DomainError("ms_ssim: images smaller than " + std::to_string(min_side) + " px for " +
                      std::to_string(o.scales) + " scales; use fewer scales");

  std::vector<double> k(std::size_t(o.window));
  double ksum = 0.0;
  for (int i = 0; i < o.window; ++i) {
    const double d = i - (o.window - 1) / 2.0;
    k[std::size_t(i)] = std::exp(-d * d / (2.0 * o.sigma * o.sigma));
    ksum += k[std::size_t(i)];
  }
  for (double& v : k) v /= ksum;

  Image x = to_plane(a), y = to_plane(b);
  double score = 1.0;
  for (int s = 0; s < o.scales; ++s) {
    if (s > 0) {
      x = downsample(x);
      y = downsample(y);
    }
    const ScaleResult r = ssim_scale(x, y, k, o);
    const double factor = s + 1 == o.scales ? r.ssim : r.cs;
    score *= std::pow(std::max(factor, 0.0), kWeights[s]);
  }
  return score;
}

double local_distortion(const BackwardMap& est, const BackwardMap& ref) {
  if (est.width != ref.width || est.height != ref.height) throw DomainError("local_distortion: sizes differ");
  double sum = 0.0;
  long count = 0;
  for (int py = 0; py < est.height; ++py)
    for (int px = 0; px < est.width; ++px) {
      if (est.is_hole(px, py) || ref.is_hole(px, py)) continue;
      sum += (est.at(px, py) - ref.at(px, py)).norm();
      ++count;
    }
  if (count == 0) throw DomainError("local_distortion: no pixel is valid in both flows");
  return sum / double(count);
}

GridDiagnostics grid_diagnostics(const GridField& f) {
  const int n = f.size();
  GridDiagnostics d;
  if (n < 2) return d;
  const auto& u = f.u();
  const auto& v = f.v();
  const double unit = double(n - 1) * double(n - 1);
  d.min_cell_area = std::numeric_limits<double>::infinity();
  for (int iy = 0; iy + 1 < n; ++iy)
    for (int ix = 0; ix + 1 < n; ++ix) {
      const double ux = 0.5 * ((u(iy, ix + 1) - u(iy, ix)) + (u(iy + 1, ix + 1) - u(iy + 1, ix)));
      const double uy = 0.5 * ((u(iy + 1, ix) - u(iy, ix)) + (u(iy + 1, ix + 1) - u(iy, ix + 1)));
      const double vx = 0.5 * ((v(iy, ix + 1) - v(iy, ix)) + (v(iy + 1, ix + 1) - v(iy + 1, ix)));
      const double vy = 0.5 * ((v(iy + 1, ix) - v(iy, ix)) + (v(iy + 1, ix + 1) - v(iy, ix + 1)));
      if (ux * vy - uy * vx < 0.0) ++d.fold_count;
      // shoelace over a -> b -> d -> c
      const Point2 q[4] = {f.at(ix, iy), f.at(ix + 1, iy), f.at(ix + 1, iy + 1), f.at(ix, iy + 1)};
      double area = 0.0;
      for (int k = 0; k < 4; ++k) area += q[k].x() * q[(k + 1) % 4].y() - q[(k + 1) % 4].x() * q[k].y();
      d.min_cell_area = std::min(d.min_cell_area, 0.5 * area * unit);
    }
  auto spread = [](const auto& vec) {
    const double mean = vec.mean();
    return std::sqrt((vec - mean).square().mean());
  };
  for (int iy = 0; iy < n; ++iy) d.row_v_std += spread(v.row(iy));
  for (int ix = 0; ix < n; ++ix) d.col_u_std += spread(u.col(ix));
  d.row_v_std /= n;
  d.col_u_std /= n;
  return d;
}

}  // namespace gridwarp
