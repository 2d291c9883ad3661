#pragma once

#include <limits>
#include <string_view>
#include <vector>

#include "edci/core_types.hpp"

namespace edci::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Numerical tolerances. Feasibility and binding tests are scaled by
/// max(1, |rhs|) of the row; the rank threshold is relative to the largest
/// pivot of the factorization.
struct Tolerances {
  double feas = 1e-8;
  double bind = 1e-7;
  double rank = 1e-10;

  /// Throws ConfigError unless every tolerance is strictly positive.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Degenerate };

std::string_view status_name(LpStatus status);

/// min cost.x  s.t.  ineq_lhs x <= ineq_rhs,  eq_lhs x = eq_rhs,  x free.
struct LinearProgram {
  Vector cost;
  Matrix ineq_lhs;
  Vector ineq_rhs;
  Matrix eq_lhs;
  Vector eq_rhs;

  Index num_vars() const { return cost.size(); }
  /// Throws DimensionError on inconsistent shapes, DataError on non-finite entries.
  void validate() const;
};

struct LpSolution {
  Vector x_opt;
  double objective = 0.0;
  /// Inequality rows with |a.x - b| <= tol.bind * max(1, |b|).
  std::vector<Index> binding_ineq;
  LpStatus status = LpStatus::Infeasible;
  /// True when the binding equality and inequality rows have rank n.
  bool vertex = false;
  /// Maximal independent subset of `binding_ineq` that, together with the
  /// equality rows, spans the vertex. Equal to `binding_ineq` when the vertex
  /// is nondegenerate.
  std::vector<Index> independent_binding;
  /// Multipliers with cost + ineq_lhs' ineq_dual + eq_lhs' eq_dual = 0 and
  /// ineq_dual >= 0 at an optimum.
  Vector ineq_dual;
  Vector eq_dual;
  Index iterations = 0;

  bool has_optimum() const { return status == LpStatus::Optimal || status == LpStatus::Degenerate; }
};

/// Dense bounded-variable primal simplex. An Optimal/Degenerate result is a
/// basic feasible solution; Degenerate flags more than n binding rows.
LpSolution solve_lp(const LinearProgram& lp, const Tolerances& tol = {});

/// Row-ranged, column-bounded form used internally and by callers that can
/// state bounds directly:
///   min cost.x  s.t.  row_lower <= rows x <= row_upper,  col_lower <= x <= col_upper.
/// Bounds may be infinite.
struct BoundedLp {
  Vector cost;
  Matrix rows;
  Vector row_lower;
  Vector row_upper;
  Vector col_lower;
  Vector col_upper;

  void validate() const;
};

struct BoundedSolution {
  LpStatus status = LpStatus::Infeasible;  // Optimal, Infeasible or Unbounded
  Vector x;
  Vector activity;  // rows * x
  /// d(objective)/d(row activity): <= 0 on rows at their upper bound,
  /// >= 0 at their lower bound, 0 on inactive rows.
  Vector row_dual;
  double objective = 0.0;
  /// False only when the optimal face contains a line (no vertex exists).
  bool vertex = false;
  Index iterations = 0;
};

BoundedSolution solve_bounded(const BoundedLp& lp, const Tolerances& tol = {});

/// |a.x - b| <= tol * max(1, |b|).
inline bool is_tight(double activity, double rhs, double tol) {
  return std::abs(activity - rhs) <= tol * std::max(1.0, std::abs(rhs));
}

}  // namespace edci::lp
