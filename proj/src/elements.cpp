#include "gridwarp/elements.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>

namespace gridwarp {

std::vector<Polyline> extract_text_lines(const ImageBuffer& mask) {
  if (mask.channels != 1) throw DomainError("extract_text_lines: mask must be single-channel");
  const int w = mask.width, h = mask.height;
  std::vector<int> label(std::size_t(w) * h, -1);
  struct Component {
    int minx, maxx, miny, maxy;
    std::vector<Eigen::Vector2i> pixels;
  };
  std::vector<Component> comps;
  std::vector<Eigen::Vector2i> stack;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) < 128 || label[std::size_t(y) * w + x] >= 0) continue;
      Component c{x, x, y, y, {}};
      const int id = int(comps.size());
      stack.assign(1, {x, y});
      label[std::size_t(y) * w + x] = id;
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        c.minx = std::min(c.minx, p.x());
        c.maxx = std::max(c.maxx, p.x());
        c.miny = std::min(c.miny, p.y());
        c.maxy = std::max(c.maxy, p.y());
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x() + dx, ny = p.y() + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto& l = label[std::size_t(ny) * w + nx];
            if (l >= 0 || mask.at(nx, ny) < 128) continue;
            l = id;
            stack.emplace_back(nx, ny);
          }
      }
      comps.push_back(std::move(c));
    }

  std::vector<Polyline> lines;
  for (const auto& c : comps) {
    const int cw = c.maxx - c.minx + 1;
    const int ch = c.maxy - c.miny + 1;
    if (c.pixels.size() < 32 || cw < 2 * ch) continue;
    std::vector<double> sum(std::size_t(cw), 0.0);
    std::vector<int> count(std::size_t(cw), 0);
    for (const auto& p : c.pixels) {
      sum[std::size_t(p.x() - c.minx)] += p.y();
      ++count[std::size_t(p.x() - c.minx)];
    }
    Polyline line;
    auto emit = [&](int col) {
      if (count[std::size_t(col)] > 0)
        line.points.emplace_back(double(c.minx + col), sum[std::size_t(col)] / count[std::size_t(col)]);
    };
    for (int col = 0; col < cw - 1; col += 8) emit(col);
    emit(cw - 1);
    if (line.size() >= 2) lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end(), [](const Polyline& a, const Polyline& b) {
    if (a.points.front().x() != b.points.front().x()) return a.points.front().x() < b.points.front().x();
    return a.points.front().y() < b.points.front().y();
  });
  return lines;
}

Point2 endpoint_direction(const Polyline& line, EndpointSide side) {
  if (line.size() < 2) throw DomainError("endpoint_direction: need at least 2 control points");
  const auto& p = line.points;
  const std::size_t segs = std::min<std::size_t>(3, p.size() - 1);
  Point2 tangent = Point2::Zero();
  for (std::size_t k = 0; k < segs; ++k) {
    if (side == EndpointSide::left)
      tangent += p[k + 1] - p[k];
    else
      tangent += p[p.size() - 1 - k] - p[p.size() - 2 - k];
  }
  const double len = tangent.norm();
  if (len == 0.0) throw DomainError("endpoint_direction: degenerate tangent");
  tangent /= len;
  return {-tangent.y(), tangent.x()};
}

std::vector<Endpoint> collect_endpoints(const std::vector<Polyline>& text_lines, EndpointSide side) {
  std::vector<Endpoint> out;
  for (std::size_t i = 0; i < text_lines.size(); ++i) {
    const auto& line = text_lines[i];
    if (line.size() < 2) continue;
    Endpoint e;
    e.position = side == EndpointSide::left ? line.points.front() : line.points.back();
    e.side = side;
    e.direction = endpoint_direction(line, side);
    e.line = int(i);
    out.push_back(e);
  }
  return out;
}

namespace {

// Nearest endpoint inside the window above (dir < 0) or below (dir > 0) of d;
// the winner is kept only if segment d-e stays within theta of d's direction.
std::optional<int> search(const std::vector<Endpoint>& pts, int d, int dir, const VerticalDetectParams& prm) {
  const Point2 pd = pts[std::size_t(d)].position;
  std::optional<int> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int e = 0; e < int(pts.size()); ++e) {
    if (e == d) continue;
    const Point2 pe = pts[std::size_t(e)].position;
    const Point2 s = pe - pd;
    if (s.squaredNorm() == 0.0) continue;
    if (std::abs(s.x()) > prm.w) continue;
    if (dir < 0 ? (s.y() < -prm.h || s.y() > 0.0) : (s.y() < 0.0 || s.y() > prm.h)) continue;
    const double dist = s.norm();
    bool better = dist < best_dist;
    if (!better && dist == best_dist) {
      const Point2 pb = pts[std::size_t(*best)].position;
      better = pe.y() < pb.y() || (pe.y() == pb.y() && pe.x() < pb.x());
    }
    if (better) {
      best = e;
      best_dist = dist;
    }
  }
  if (!best) return std::nullopt;
  const Point2 s = pts[std::size_t(*best)].position - pd;
  const double cosang = std::abs(s.dot(pts[std::size_t(d)].direction)) / s.norm();
  const double angle = std::acos(std::clamp(cosang, 0.0, 1.0));
  if (!(angle < prm.theta)) return std::nullopt;
  return best;
}

}  // namespace

VerticalEdgeSets vertical_edges(const std::vector<Endpoint>& endpoints, const VerticalDetectParams& params) {
  VerticalEdgeSets sets;
  for (int d = 0; d < int(endpoints.size()); ++d) {
    if (auto e = search(endpoints, d, -1, params)) sets.upward.emplace_back(*e, d);
    if (auto e = search(endpoints, d, +1, params)) sets.downward.emplace_back(d, *e);
  }
  const std::set<VerticalEdge> down(sets.downward.begin(), sets.downward.end());
  for (const auto& edge : sets.upward)
    if (down.count(edge)) sets.mutual.push_back(edge);
  std::sort(sets.mutual.begin(), sets.mutual.end());
  return sets;
}

std::vector<Polyline> detect_vertical_lines(const std::vector<Polyline>& text_lines,
                                            const VerticalDetectParams& params) {
  std::vector<Polyline> out;
  if (text_lines.size() < 2) return out;
  for (EndpointSide side : {EndpointSide::left, EndpointSide::right}) {
    const auto pts = collect_endpoints(text_lines, side);
    const auto sets = vertical_edges(pts, params);
    std::map<int, int> below, above;
    for (const auto& [upper, lower] : sets.mutual) {
      below[upper] = lower;
      above[lower] = upper;
    }
    std::vector<int> starts;
    for (const auto& [upper, lower] : below)
      if (!above.count(upper)) starts.push_back(upper);
    std::sort(starts.begin(), starts.end(), [&](int a, int b) {
      const auto& pa = pts[std::size_t(a)].position;
      const auto& pb = pts[std::size_t(b)].position;
      return pa.y() != pb.y() ? pa.y() < pb.y() : pa.x() < pb.x();
    });
    for (int s : starts) {
      Polyline chain;
      for (int cur = s;;) {
        chain.points.push_back(pts[std::size_t(cur)].position);
        auto it = below.find(cur);
        if (it == below.end()) break;
        cur = it->second;
      }
      if (chain.size() >= 3) out.push_back(std::move(chain));
    }
  }
  return out;
}

}  // namespace gridwarp
