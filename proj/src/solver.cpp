#include "gridwarp/solver.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <memory>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace gridwarp {

const char* to_string(Preconditioner p) {
  switch (p) {
    case Preconditioner::jacobi: return "jacobi";
    case Preconditioner::incomplete_cholesky: return "incomplete_cholesky";
    case Preconditioner::cholesky: return "cholesky";
  }
  return "?";
}

Preconditioner preconditioner_from_string(const std::string& name) {
  if (name == "jacobi") return Preconditioner::jacobi;
  if (name == "incomplete_cholesky") return Preconditioner::incomplete_cholesky;
  if (name == "cholesky") return Preconditioner::cholesky;
  throw ConfigError("unknown preconditioner '" + name + "'");
}

void validate(const SolverParams& p) {
  if (p.n < 3) throw ConfigError("solver: n must be >= 3");
  if (!(p.alpha > 0 && p.lambda > 0 && p.beta > 0)) throw ConfigError("solver: alpha, lambda, beta must be positive");
  if (!(p.tol > 0 && p.tol < 1)) throw ConfigError("solver: tol must lie in (0, 1)");
  if (p.max_iters <= 0) throw ConfigError("solver: max_iters must be positive");
}

const ResidualBlock* QuadraticProblem::find(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

std::pair<ResidualBlock, ResidualBlock> regularizer_blocks(int n, double beta) {
  if (n < 3) throw ConfigError("regularizer_blocks: n must be >= 3");
  using Triplet = Eigen::Triplet<double>;
  auto idx = [n](int i, int j) { return j * n + i; };  // i along x, j along y

  std::vector<Triplet> lap;
  int row = 0;
  for (int j = 1; j <= n - 2; ++j)
    for (int i = 1; i <= n - 2; ++i, ++row) {
      lap.emplace_back(row, idx(i + 1, j), 1.0);
      lap.emplace_back(row, idx(i - 1, j), 1.0);
      lap.emplace_back(row, idx(i, j + 1), 1.0);
      lap.emplace_back(row, idx(i, j - 1), 1.0);
      lap.emplace_back(row, idx(i, j), -4.0);
    }
  ResidualBlock laplacian;
  laplacian.name = "laplacian";
  laplacian.rows.resize(row, Eigen::Index(n) * n);
  laplacian.rows.setFromTriplets(lap.begin(), lap.end());
  laplacian.rhs = Eigen::VectorXd::Zero(row);
  laplacian.row_group.assign(std::size_t(row), 0);
  laplacian.group_names = {"laplacian"};

  std::vector<Triplet> crs;
  row = 0;
  for (int j = 0; j <= n - 2; ++j)
    for (int i = 0; i <= n - 2; ++i, ++row) {
      crs.emplace_back(row, idx(i + 1, j + 1), 1.0);
      crs.emplace_back(row, idx(i + 1, j), -1.0);
      crs.emplace_back(row, idx(i, j + 1), -1.0);
      crs.emplace_back(row, idx(i, j), 1.0);
    }
  ResidualBlock cross;
  cross.name = "cross";
  cross.rows.resize(row, Eigen::Index(n) * n);
  cross.rows.setFromTriplets(crs.begin(), crs.end());
  cross.rhs = Eigen::VectorXd::Zero(row);
  cross.weight = beta;
  cross.row_group.assign(std::size_t(row), 0);
  cross.group_names = {"cross"};
  return {std::move(laplacian), std::move(cross)};
}

QuadraticProblem build_problem(const ConstraintSet& constraints, const SolverParams& params, Channel channel) {
  validate(params);
  if (constraints.n != params.n) throw ConfigError("build_problem: constraint grid size differs from solver n");
  QuadraticProblem prob;
  prob.channel = channel;
  prob.n = params.n;

  bool has_zero = false, has_one = false;
  for (const auto& p : constraints.points)
    if (p.kind == ElementKind::boundary && p.channel == channel && p.target) {
      has_zero |= *p.target == 0.0;
      has_one |= *p.target == 1.0;
    }
  if (!has_zero || !has_one) {
    prob.well_posed = false;
    prob.warnings.push_back(std::string("channel ") + to_string(channel) +
                            " lacks absolute boundary targets; solution is under-determined");
  }

  prob.blocks.push_back(assemble_boundary_block(constraints, channel));
  prob.blocks.push_back(assemble_line_block(constraints, channel, params.alpha));
  auto [lap, cross] = regularizer_blocks(params.n, params.beta);
  lap.weight = params.lambda;
  cross.weight = params.lambda * params.beta;
  prob.blocks.push_back(std::move(lap));
  prob.blocks.push_back(std::move(cross));
  return prob;
}

double objective(const QuadraticProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double e = 0.0;
  for (const auto& b : problem.blocks) e += energy(b, x);
  return e;
}

Eigen::VectorXd gradient(const QuadraticProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(problem.unknowns());
  for (const auto& b : problem.blocks) g += 2.0 * b.weight * (b.rows.transpose() * residual(b, x));
  return g;
}

Eigen::SparseMatrix<double> normal_matrix(const QuadraticProblem& problem) {
  Eigen::SparseMatrix<double> normal(problem.unknowns(), problem.unknowns());
  for (const auto& b : problem.blocks) {
    if (b.row_count() == 0) continue;
    const Eigen::SparseMatrix<double> a = b.rows;
    normal += b.weight * Eigen::SparseMatrix<double>(a.transpose() * a);
  }
  normal.makeCompressed();
  return normal;
}

Eigen::VectorXd normal_rhs(const QuadraticProblem& problem) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(problem.unknowns());
  for (const auto& b : problem.blocks)
    if (b.row_count() > 0) c += b.weight * (b.rows.transpose() * b.rhs);
  return c;
}

namespace {

class PreconditionerOp {
 public:
  virtual ~PreconditionerOp() = default;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& r) const = 0;
};

class JacobiOp : public PreconditionerOp {
 public:
  explicit JacobiOp(const Eigen::SparseMatrix<double>& a) : inv_(a.diagonal()) {
    for (Eigen::Index i = 0; i < inv_.size(); ++i) inv_[i] = inv_[i] > 0 ? 1.0 / inv_[i] : 1.0;
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override { return inv_.cwiseProduct(r); }

 private:
  Eigen::VectorXd inv_;
};

template <typename Factor>
class FactorOp : public PreconditionerOp {
 public:
  explicit FactorOp(const Eigen::SparseMatrix<double>& a) {
    factor_.compute(a);
    if (factor_.info() != Eigen::Success) throw UnderDeterminedError("solve: normal matrix is not positive definite");
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override { return factor_.solve(r); }

 private:
  Factor factor_;
};

std::unique_ptr<PreconditionerOp> make_preconditioner(Preconditioner kind, const Eigen::SparseMatrix<double>& a) {
  switch (kind) {
    case Preconditioner::jacobi: return std::make_unique<JacobiOp>(a);
    case Preconditioner::incomplete_cholesky:
      return std::make_unique<FactorOp<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>>>(a);
    case Preconditioner::cholesky:
      return std::make_unique<FactorOp<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>>(a);
  }
  return std::make_unique<JacobiOp>(a);
}

Eigen::VectorXd uniform_channel(int n, Channel channel) {
  const GridField u = GridField::uniform(n);
  return u.flat(int(channel));
}

}  // namespace

ChannelSolution solve(const QuadraticProblem& problem, const SolverParams& params, const IterationObserver& observer) {
  if (!problem.well_posed)
    throw UnderDeterminedError(problem.warnings.empty() ? "solve: problem is under-determined" : problem.warnings.front());
  if (!problem.find("boundary") || problem.find("boundary")->row_count() == 0)
    throw UnderDeterminedError("solve: no boundary block");

  const Eigen::SparseMatrix<double> normal = normal_matrix(problem);
  const Eigen::VectorXd c = normal_rhs(problem);
  const double scale = c.norm() > 0 ? c.norm() : 1.0;
  const auto precond = make_preconditioner(params.preconditioner, normal);

  Eigen::VectorXd x = uniform_channel(problem.n, problem.channel);
  Eigen::VectorXd r = c - normal * x;
  ChannelSolution sol;
  auto& diag = sol.diagnostics;
  double rel = r.norm() / scale;
  Eigen::VectorXd best = x;
  double best_rel = rel;
  diag.residual_history.push_back(rel);
  if (observer) observer(0, x);

  Eigen::VectorXd z = precond->apply(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  int it = 0;
  while (rel >= params.tol) {
    if (it >= params.max_iters)
      throw NonConvergenceError("solve: no convergence within max_iters", best, best_rel, it);
    const Eigen::VectorXd np = normal * p;
    const double pnp = p.dot(np);
    if (!(pnp > 0.0)) break;  // exact solution reached in floating point
    const double step = rz / pnp;
    x += step * p;
    ++it;
    // periodic true-residual refresh bounds recurrence drift
    if (it % 50 == 0)
      r = c - normal * x;
    else
      r -= step * np;
    rel = r.norm() / scale;
    diag.residual_history.push_back(rel);
    if (rel < best_rel) {
      best_rel = rel;
      best = x;
    }
    if (observer) observer(it, x);
    z = precond->apply(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }

  diag.iterations = it;
  diag.relative_residual = (c - normal * x).norm() / scale;
  diag.objective = objective(problem, x);
  for (const auto& b : problem.blocks) diag.block_energies.push_back({b.name, energy(b, x)});
  sol.values = std::move(x);
  return sol;
}

FieldSolution solve_field(const ConstraintSet& constraints, const SolverParams& params) {
  auto run = [&](Channel ch) { return solve(build_problem(constraints, params, ch), params); };
  auto v_future = std::async(std::launch::async, run, Channel::V);
  ChannelSolution u = run(Channel::U);
  ChannelSolution v = v_future.get();

  FieldSolution out{GridField(params.n), std::move(u.diagnostics), std::move(v.diagnostics)};
  out.field.flat(0) = u.values;
  out.field.flat(1) = v.values;
  return out;
}

namespace {

ChannelEnergy channel_energy(const QuadraticProblem& prob, const Eigen::Ref<const Eigen::VectorXd>& x) {
  ChannelEnergy ce;
  for (const auto& b : prob.blocks) {
    const auto groups = group_energies(b, x);
    double sum = 0.0;
    for (double g : groups) sum += g;
    if (b.name == "boundary" || b.name == "line") {
      auto& dst = b.name == "boundary" ? ce.boundary : ce.lines;
      for (std::size_t i = 0; i < groups.size(); ++i) dst.push_back({b.group_names[i], groups[i]});
    } else if (b.name == "laplacian") {
      ce.laplacian = sum;
    } else if (b.name == "cross") {
      ce.cross = sum;
    }
    ce.total += energy(b, x);
  }
  return ce;
}

}  // namespace

EnergyReport energy_report(const GridField& field, const QuadraticProblem& u_problem,
                           const QuadraticProblem& v_problem) {
  if (field.size() != u_problem.n || field.size() != v_problem.n)
    throw DomainError("energy_report: field size does not match the problems");
  EnergyReport rep;
  rep.u = channel_energy(u_problem, field.flat(0));
  rep.v = channel_energy(v_problem, field.flat(1));
  rep.total = rep.u.total + rep.v.total;
  return rep;
}

}  // namespace gridwarp
