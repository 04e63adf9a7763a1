#include "gridwarp/core.hpp"

#include <algorithm>
#include <cmath>

namespace gridwarp {

double Polyline::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

const char* to_string(Side side) {
  switch (side) {
    case Side::top: return "top";
    case Side::bottom: return "bottom";
    case Side::left: return "left";
    case Side::right: return "right";
  }
  return "?";
}

const Polyline& GeometricElements::boundary(Side side) const {
  switch (side) {
    case Side::top: return top;
    case Side::bottom: return bottom;
    case Side::left: return left;
    case Side::right: return right;
  }
  return top;
}

Polyline& GeometricElements::boundary(Side side) {
  return const_cast<Polyline&>(std::as_const(*this).boundary(side));
}

namespace {

void check_polyline(const Polyline& line, const std::string& name, int width, int height) {
  for (const auto& p : line.points) {
    if (!p.allFinite()) throw ConfigError(name + ": non-finite point");
    if (p.x() < 0.0 || p.y() < 0.0 || p.x() > width || p.y() > height)
      throw ConfigError(name + ": point outside the image frame");
  }
}

}  // namespace

void validate(const GeometricElements& elems) {
  if (elems.width < 2 || elems.height < 2) throw ConfigError("elements: image_size must be at least 2x2");
  for (Side side : {Side::top, Side::bottom, Side::left, Side::right}) {
    const auto& line = elems.boundary(side);
    if (line.size() < 2) throw ConfigError(std::string("elements: missing boundary '") + to_string(side) + "'");
    check_polyline(line, std::string("boundary.") + to_string(side), elems.width, elems.height);
  }
  for (const auto& line : elems.text_lines) check_polyline(line, "text_lines", elems.width, elems.height);
  for (const auto& line : elems.vertical_lines) check_polyline(line, "vertical_lines", elems.width, elems.height);
}

ImageBuffer to_gray(const ImageBuffer& img) {
  if (img.channels == 1) return img;
  ImageBuffer out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double l = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      out.at(x, y) = std::uint8_t(std::clamp(std::lround(l), 0L, 255L));
    }
  return out;
}

std::vector<Point2> resample_polyline(const Polyline& line, double interval) {
  if (!(interval > 0.0)) throw DomainError("resample_polyline: interval must be positive");
  std::vector<Point2> pts;
  for (const auto& p : line.points)
    if (pts.empty() || (p - pts.back()).norm() > 0.0) pts.push_back(p);
  if (pts.size() < 2) return {};

  const double total = Polyline{pts}.length();
  const double eps = 1e-9 * std::max(1.0, total);
  std::vector<Point2> out{pts.front()};
  double next = interval;
  double walked = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Point2 seg = pts[i] - pts[i - 1];
    const double len = seg.norm();
    while (next <= walked + len && next < total - eps) {
      out.push_back(pts[i - 1] + seg * ((next - walked) / len));
      next += interval;
    }
    walked += len;
  }
  out.push_back(pts.back());
  return out;
}

ArcLengthCurve::ArcLengthCurve(const Polyline& line) {
  for (const auto& p : line.points)
    if (points_.empty() || (p - points_.back()).norm() > 0.0) points_.push_back(p);
  if (points_.size() < 2) throw DomainError("ArcLengthCurve: need a polyline of non-zero length");
  arc_.assign(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) arc_[i] = arc_[i - 1] + (points_[i] - points_[i - 1]).norm();
}

Point2 ArcLengthCurve::operator()(double t) const {
  const double s = std::clamp(t, 0.0, 1.0) * arc_.back();
  auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  std::size_t i = std::size_t(std::clamp<std::ptrdiff_t>(it - arc_.begin(), 1, std::ptrdiff_t(arc_.size()) - 1));
  const double seg = arc_[i] - arc_[i - 1];
  const double a = (s - arc_[i - 1]) / seg;
  return points_[i - 1] + a * (points_[i] - points_[i - 1]);
}

GeometricElements rescale(const GeometricElements& elems, int width, int height) {
  const double sx = double(width - 1) / double(elems.width - 1);
  const double sy = double(height - 1) / double(elems.height - 1);
  auto map = [&](const Polyline& line) {
    Polyline out;
    out.points.reserve(line.size());
    for (const auto& p : line.points) out.points.emplace_back(p.x() * sx, p.y() * sy);
    return out;
  };
  GeometricElements out;
  out.width = width;
  out.height = height;
  out.top = map(elems.top);
  out.bottom = map(elems.bottom);
  out.left = map(elems.left);
  out.right = map(elems.right);
  for (const auto& l : elems.text_lines) out.text_lines.push_back(map(l));
  for (const auto& l : elems.vertical_lines) out.vertical_lines.push_back(map(l));
  return out;
}

}  // namespace gridwarp
