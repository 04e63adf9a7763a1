#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gridwarp/core.hpp"

namespace gridwarp {

enum class EndpointSide { left, right };

struct Endpoint {
  Point2 position;
  EndpointSide side;
  Point2 direction;  // unit vertical direction g
  int line = -1;     // index of the owning text line
};

struct VerticalDetectParams {
  double w = 15.0;  // half-width of the search window, pixels
  double h = 15.0;  // search height, pixels
  double theta = std::atan(0.45);
};

/// Column-centroid polylines for each elongated foreground component of a
/// binary mask (8-connectivity, >= 32 pixels, width >= 2 * height).
/// Control points every 8 columns plus the last column, sorted by leftmost x, then y.
std::vector<Polyline> extract_text_lines(const ImageBuffer& mask);

/// Unit normal (tangent rotated +90 degrees, downward for a left-to-right line)
/// of the mean tangent over the up-to-three segments adjacent to the endpoint.
Point2 endpoint_direction(const Polyline& line, EndpointSide side);

std::vector<Endpoint> collect_endpoints(const std::vector<Polyline>& text_lines, EndpointSide side);

/// Edge (upper, lower) as indices into an endpoint list.
using VerticalEdge = std::pair<int, int>;

struct VerticalEdgeSets {
  std::vector<VerticalEdge> upward;    // M1: each point linked to its nearest qualifying point above
  std::vector<VerticalEdge> downward;  // M2: each point linked to its nearest qualifying point below
  std::vector<VerticalEdge> mutual;    // M1 intersect M2
};

/// Both search passes over one endpoint set, and their intersection.
VerticalEdgeSets vertical_edges(const std::vector<Endpoint>& endpoints, const VerticalDetectParams& params);

/// Chains of >= 2 mutual edges, for the left then the right endpoint sets,
/// each emitted top to bottom.
std::vector<Polyline> detect_vertical_lines(const std::vector<Polyline>& text_lines,
                                            const VerticalDetectParams& params = {});

}  // namespace gridwarp
