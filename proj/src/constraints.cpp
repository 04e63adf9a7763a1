#include "gridwarp/constraints.hpp"

#include <algorithm>
#include <map>

namespace gridwarp {

const char* to_string(Channel c) { return c == Channel::U ? "U" : "V"; }

Point2 ConstraintSet::grid_position(const ConstraintPoint& p) const {
  // Element coordinates may sit on the closed frame [0, W]; the grid spans [0, W-1].
  const Point2 g = to_grid(p.position, width, height, n);
  return g.cwiseMax(0.0).cwiseMin(double(n - 1));
}

ConstraintSet discretize_elements(const GeometricElements& elems, int n, const DiscretizeParams& params) {
  validate(elems);
  if (n < 3) throw ConfigError("discretize_elements: grid size must be >= 3");
  const int frame = params.working_frame;
  const GeometricElements work = rescale(elems, frame, frame);
  const double back_x = double(elems.width - 1) / double(frame - 1);
  const double back_y = double(elems.height - 1) / double(frame - 1);
  auto to_source = [&](const Point2& p) { return Point2(p.x() * back_x, p.y() * back_y); };

  ConstraintSet set;
  set.n = n;
  set.width = elems.width;
  set.height = elems.height;

  struct SideTarget {
    Side side;
    Channel channel;
    double target;
  };
  const SideTarget sides[] = {{Side::left, Channel::U, 0.0},
                              {Side::right, Channel::U, 1.0},
                              {Side::top, Channel::V, 0.0},
                              {Side::bottom, Channel::V, 1.0}};
  for (const auto& st : sides) {
    const auto pts = resample_polyline(work.boundary(st.side), params.boundary_interval);
    if (pts.size() < 2) throw ConfigError(std::string("discretize_elements: degenerate boundary '") +
                                          to_string(st.side) + "'");
    int order = 0;
    for (const auto& p : pts) {
      ConstraintPoint cp;
      cp.position = to_source(p);
      cp.kind = ElementKind::boundary;
      cp.channel = st.channel;
      cp.target = st.target;
      cp.side = st.side;
      cp.order = order++;
      set.points.push_back(cp);
    }
  }

  int chain = 0;
  auto add_chains = [&](const std::vector<Polyline>& lines, ElementKind kind, Channel ch, double interval) {
    for (const auto& line : lines) {
      const auto pts = resample_polyline(line, interval);
      if (pts.size() < 2) continue;
      int order = 0;
      for (const auto& p : pts) {
        ConstraintPoint cp;
        cp.position = to_source(p);
        cp.kind = kind;
        cp.channel = ch;
        cp.chain_id = chain;
        cp.order = order++;
        set.points.push_back(cp);
      }
      ++chain;
    }
  };
  add_chains(work.text_lines, ElementKind::text_line, Channel::V, params.text_interval);
  add_chains(work.vertical_lines, ElementKind::vertical_line, Channel::U, params.vertical_interval);
  return set;
}

Eigen::VectorXd residual(const ResidualBlock& block, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return block.rows * x - block.rhs;
}

double energy(const ResidualBlock& block, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return block.weight * residual(block, x).squaredNorm();
}

std::vector<double> group_energies(const ResidualBlock& block, const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<double> out(block.group_names.size(), 0.0);
  const Eigen::VectorXd r = residual(block, x);
  for (Eigen::Index i = 0; i < r.size(); ++i) out[std::size_t(block.row_group[std::size_t(i)])] += block.weight * r[i] * r[i];
  return out;
}

namespace {

using Triplet = Eigen::Triplet<double>;

void couple(const ConstraintSet& set, const ConstraintPoint& p, int row, double sign, std::vector<Triplet>& trip) {
  const auto s = bilinear_weights<double>(set.grid_position(p), set.n);
  for (int k = 0; k < 4; ++k)
    if (s.weights[k] != 0.0) trip.emplace_back(row, s.flat_index(k, set.n), sign * s.weights[k]);
}

ResidualBlock finish(std::string name, int rows, int n, const std::vector<Triplet>& trip, Eigen::VectorXd rhs,
                     double weight) {
  ResidualBlock b;
  b.name = std::move(name);
  b.rows.resize(rows, Eigen::Index(n) * n);
  b.rows.setFromTriplets(trip.begin(), trip.end());
  b.rhs = std::move(rhs);
  b.weight = weight;
  return b;
}

}  // namespace

ResidualBlock assemble_boundary_block(const ConstraintSet& set, Channel channel) {
  std::vector<Triplet> trip;
  std::vector<double> rhs;
  std::vector<int> groups;
  std::map<Side, int> side_group;
  std::vector<std::string> names;
  for (const auto& p : set.points) {
    if (p.kind != ElementKind::boundary || p.channel != channel) continue;
    const int row = int(rhs.size());
    couple(set, p, row, 1.0, trip);
    rhs.push_back(*p.target);
    const Side side = p.side.value_or(Side::top);
    auto [it, inserted] = side_group.try_emplace(side, int(names.size()));
    if (inserted) names.emplace_back(to_string(side));
    groups.push_back(it->second);
  }
  auto b = finish("boundary", int(rhs.size()), set.n, trip, Eigen::Map<Eigen::VectorXd>(rhs.data(), Eigen::Index(rhs.size())), 1.0);
  b.row_group = std::move(groups);
  b.group_names = std::move(names);
  return b;
}

ResidualBlock assemble_line_block(const ConstraintSet& set, Channel channel, double alpha) {
  std::map<int, std::vector<const ConstraintPoint*>> chains;
  for (const auto& p : set.points)
    if (p.kind != ElementKind::boundary && p.channel == channel) chains[p.chain_id].push_back(&p);

  std::vector<Triplet> trip;
  std::vector<int> groups;
  std::vector<std::string> names;
  int row = 0;
  for (auto& [id, pts] : chains) {
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->order < b->order; });
    if (pts.size() < 2) continue;
    const int group = int(names.size());
    names.push_back((pts.front()->kind == ElementKind::text_line ? "text_line/" : "vertical_line/") +
                    std::to_string(id));
    for (std::size_t k = 0; k + 1 < pts.size(); ++k, ++row) {
      couple(set, *pts[k], row, 1.0, trip);
      couple(set, *pts[k + 1], row, -1.0, trip);
      groups.push_back(group);
    }
  }
  auto b = finish("line", row, set.n, trip, Eigen::VectorXd::Zero(row), alpha);
  b.row_group = std::move(groups);
  b.group_names = std::move(names);
  return b;
}

}  // namespace gridwarp
