#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "gridwarp/constraints.hpp"
#include "gridwarp/core.hpp"

namespace gridwarp {

enum class Preconditioner { jacobi, incomplete_cholesky, cholesky };

const char* to_string(Preconditioner p);
Preconditioner preconditioner_from_string(const std::string& name);

struct SolverParams {
  int n = 128;
  double alpha = 10.0;   // line weight
  double lambda = 2.0;   // regularizer weight
  double beta = 20.0;    // mixed-derivative weight inside the regularizer
  double tol = 1e-8;     // relative residual of the normal equations
  int max_iters = 20000;
  Preconditioner preconditioner = Preconditioner::cholesky;
};

void validate(const SolverParams& params);

/// Stacked least-squares system for one channel:
/// E(x) = sum_b weight_b * |A_b x - rhs_b|^2.
struct QuadraticProblem {
  Channel channel = Channel::U;
  int n = 0;
  std::vector<ResidualBlock> blocks;
  bool well_posed = true;
  std::vector<std::string> warnings;

  Eigen::Index unknowns() const { return Eigen::Index(n) * n; }
  const ResidualBlock* find(const std::string& name) const;
};

/// Index-space second-difference stencils. The laplacian block has one row per
/// interior node, the cross block one row per cell and weight beta.
std::pair<ResidualBlock, ResidualBlock> regularizer_blocks(int n, double beta);

/// Boundary block (weight 1), line block (weight alpha), laplacian (lambda) and
/// cross (lambda * beta) for one channel. A channel missing either absolute
/// target is flagged as not well posed.
QuadraticProblem build_problem(const ConstraintSet& constraints, const SolverParams& params, Channel channel);

double objective(const QuadraticProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd gradient(const QuadraticProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x);

/// sum_b w_b A_b^T A_b and sum_b w_b A_b^T rhs_b.
Eigen::SparseMatrix<double> normal_matrix(const QuadraticProblem& problem);
Eigen::VectorXd normal_rhs(const QuadraticProblem& problem);

struct BlockEnergy {
  std::string name;
  double energy = 0.0;
};

struct SolveDiagnostics {
  int iterations = 0;
  double relative_residual = 0.0;
  double objective = 0.0;
  std::vector<BlockEnergy> block_energies;
  std::vector<double> residual_history;  // relative normal-equation residual per iteration
};

struct ChannelSolution {
  Eigen::VectorXd values;  // flat index iy * n + ix
  SolveDiagnostics diagnostics;
};

/// Called with (iteration, iterate) after every update, starting at iteration 0.
using IterationObserver = std::function<void(int, const Eigen::VectorXd&)>;

/// Preconditioned conjugate gradients on the normal equations, started from the
/// uniform grid. Throws UnderDeterminedError for ill-posed problems and
/// NonConvergenceError after max_iters.
ChannelSolution solve(const QuadraticProblem& problem, const SolverParams& params,
                      const IterationObserver& observer = {});

struct FieldSolution {
  GridField field;
  SolveDiagnostics u, v;
};

/// Builds and solves both channels concurrently.
FieldSolution solve_field(const ConstraintSet& constraints, const SolverParams& params);

struct GroupEnergy {
  std::string name;
  double energy = 0.0;
};

struct ChannelEnergy {
  std::vector<GroupEnergy> boundary;  // per side
  std::vector<GroupEnergy> lines;     // per chain
  double laplacian = 0.0;
  double cross = 0.0;
  double total = 0.0;
};

struct EnergyReport {
  ChannelEnergy u, v;
  double total = 0.0;
};

EnergyReport energy_report(const GridField& field, const QuadraticProblem& u_problem,
                           const QuadraticProblem& v_problem);

}  // namespace gridwarp
