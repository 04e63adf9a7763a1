#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "gridwarp/core.hpp"

namespace gridwarp {

enum class Channel { U = 0, V = 1 };
enum class ElementKind { boundary, text_line, vertical_line };

const char* to_string(Channel c);

struct ConstraintPoint {
  Point2 position;  // source pixels
  ElementKind kind = ElementKind::boundary;
  Channel channel = Channel::U;
  std::optional<double> target;  // boundary only: 0 or 1
  std::optional<Side> side;      // boundary only
  int chain_id = -1;             // lines only
  int order = 0;                 // index within the chain
};

struct ConstraintSet {
  std::vector<ConstraintPoint> points;
  int n = 0;
  int width = 0;
  int height = 0;

  Point2 grid_position(const ConstraintPoint& p) const;
};

struct DiscretizeParams {
  double text_interval = 16.0;
  double vertical_interval = 10.0;
  double boundary_interval = 4.0;
  int working_frame = 512;  // intervals are measured in this square frame
};

/// Boundary sides become absolute targets (left U=0, right U=1, top V=0,
/// bottom V=1). Text lines become V chains, vertical lines U chains.
/// Throws ConfigError for a missing boundary polyline.
ConstraintSet discretize_elements(const GeometricElements& elems, int n, const DiscretizeParams& params = {});

/// Sparse residual rows r = A x - b over the n^2 unknowns of one channel;
/// energy contribution weight * |r|^2. Rows carry a group id for reporting.
struct ResidualBlock {
  std::string name;
  Eigen::SparseMatrix<double, Eigen::RowMajor> rows;
  Eigen::VectorXd rhs;
  double weight = 1.0;
  std::vector<int> row_group;
  std::vector<std::string> group_names;

  Eigen::Index row_count() const { return rows.rows(); }
};

Eigen::VectorXd residual(const ResidualBlock& block, const Eigen::Ref<const Eigen::VectorXd>& x);

/// weight * |A x - b|^2
double energy(const ResidualBlock& block, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Per-group weighted energies, indexed like group_names.
std::vector<double> group_energies(const ResidualBlock& block, const Eigen::Ref<const Eigen::VectorXd>& x);

ResidualBlock assemble_boundary_block(const ConstraintSet& set, Channel channel);

/// One row per adjacent pair within each chain of the channel: phi(p_k) - phi(p_k+1).
ResidualBlock assemble_line_block(const ConstraintSet& set, Channel channel, double alpha = 10.0);

}  // namespace gridwarp
