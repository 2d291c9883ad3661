#include "edci/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edci/linalg.hpp"

namespace edci::lp {

void Tolerances::validate() const {
  if (!(feas > 0.0 && bind > 0.0 && rank > 0.0))
    throw ConfigError("tolerances must be strictly positive");
}

std::string_view status_name(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::Degenerate:
      return "degenerate";
  }
  return "?";
}

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DataError(std::string(what) + " contains non-finite entries");
}

}  // namespace

void LinearProgram::validate() const {
  const Index n = cost.size();
  if (ineq_lhs.rows() != ineq_rhs.size() || (ineq_lhs.rows() > 0 && ineq_lhs.cols() != n))
    throw DimensionError("inequality block has inconsistent dimensions");
  if (eq_lhs.rows() != eq_rhs.size() || (eq_lhs.rows() > 0 && eq_lhs.cols() != n))
    throw DimensionError("equality block has inconsistent dimensions");
  require_finite(cost, "cost");
  require_finite(ineq_lhs, "ineq_lhs");
  require_finite(ineq_rhs, "ineq_rhs");
  require_finite(eq_lhs, "eq_lhs");
  require_finite(eq_rhs, "eq_rhs");
}

void BoundedLp::validate() const {
  const Index n = cost.size();
  const Index m = rows.rows();
  if ((m > 0 && rows.cols() != n) || row_lower.size() != m || row_upper.size() != m ||
      col_lower.size() != n || col_upper.size() != n)
    throw DimensionError("bounded LP has inconsistent dimensions");
  require_finite(cost, "cost");
  require_finite(rows, "rows");
  for (Index i = 0; i < m; ++i) {
    if (std::isnan(row_lower[i]) || std::isnan(row_upper[i]) || row_lower[i] > row_upper[i])
      throw DataError("row " + std::to_string(i) + " has invalid bounds");
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isnan(col_lower[j]) || std::isnan(col_upper[j]) || col_lower[j] > col_upper[j])
      throw DataError("column " + std::to_string(j) + " has invalid bounds");
  }
}

namespace {

enum class State { Basic, AtLower, AtUpper, Between };

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr Index kRefactorEvery = 100;
constexpr Index kBlandAfterDegenerate = 50;

// Dense tableau simplex over the columns [structural | logical | artificial]
// with constraint K z = 0, where logical s_i equals row activity i. All
// right-hand sides live in the column bounds.
class BoundedSimplex {
 public:
  BoundedSimplex(const BoundedLp& lp, const Tolerances& tol) : lp_(lp), tol_(tol) {
    n_ = lp.cost.size();
    m_ = lp.rows.rows();
    build();
  }

  BoundedSolution run() {
    BoundedSolution out;
    if (num_art_ > 0) {
      Vector phase1 = Vector::Zero(ncol_);
      phase1.tail(num_art_).setOnes();
      const auto st = optimize(phase1);
      if (st == LpStatus::Unbounded) throw Error("phase 1 reported unbounded");
      double infeas = 0.0;
      for (Index k = n_ + m_; k < ncol_; ++k) infeas += x_[k];
      if (infeas > tol_.feas * bound_scale_) {
        out.status = LpStatus::Infeasible;
        out.iterations = iterations_;
        return out;
      }
      retire_artificials();
    }

    Vector phase2 = Vector::Zero(ncol_);
    phase2.head(n_) = lp_.cost;
    const auto st = optimize(phase2);
    out.iterations = iterations_;
    if (st == LpStatus::Unbounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.vertex = purify(phase2);
    refactor();
    price(phase2);
    out.status = LpStatus::Optimal;
    out.x = x_.head(n_);
    // The logical column of row i has coefficient -1, so its reduced cost is
    // the row's dual value.
    out.row_dual = d_.segment(n_, m_);
    out.activity = m_ > 0 ? Vector(lp_.rows * out.x) : Vector(0);
    out.objective = lp_.cost.dot(out.x);
    out.iterations = iterations_;
    return out;
  }

 private:
  void build() {
    const double inf = kInf;
    lo_.resize(n_ + m_);
    up_.resize(n_ + m_);
    lo_.head(n_) = lp_.col_lower;
    up_.head(n_) = lp_.col_upper;
    lo_.tail(m_) = lp_.row_lower;
    up_.tail(m_) = lp_.row_upper;

    bound_scale_ = 1.0;
    for (Index k = 0; k < n_ + m_; ++k) {
      if (std::isfinite(lo_[k])) bound_scale_ = std::max(bound_scale_, std::abs(lo_[k]));
      if (std::isfinite(up_[k])) bound_scale_ = std::max(bound_scale_, std::abs(up_[k]));
    }

    Vector x = Vector::Zero(n_);
    std::vector<State> st(static_cast<std::size_t>(n_));
    for (Index j = 0; j < n_; ++j) {
      x[j] = std::clamp(0.0, lo_[j], up_[j]);
      st[j] = nonbasic_state(j, x[j]);
    }
    const Vector act = m_ > 0 ? Vector(lp_.rows * x) : Vector(0);

    std::vector<Index> art_rows;
    std::vector<double> art_sign;
    for (Index i = 0; i < m_; ++i) {
      const double a = act[i];
      const double l = lo_[n_ + i], u = up_[n_ + i];
      const double slack = tol_.feas * std::max(1.0, std::max(std::abs(l == -inf ? 0.0 : l),
                                                              std::abs(u == inf ? 0.0 : u)));
      if (a < l - slack || a > u + slack) {
        art_rows.push_back(i);
        art_sign.push_back(a > u ? -1.0 : 1.0);
      }
    }
    num_art_ = static_cast<Index>(art_rows.size());
    ncol_ = n_ + m_ + num_art_;

    lo_.conservativeResize(ncol_);
    up_.conservativeResize(ncol_);
    for (Index k = n_ + m_; k < ncol_; ++k) {
      lo_[k] = 0.0;
      up_[k] = inf;
    }

    k_ = Matrix::Zero(m_, ncol_);
    if (m_ > 0) k_.leftCols(n_) = lp_.rows;
    for (Index i = 0; i < m_; ++i) k_(i, n_ + i) = -1.0;

    x_ = Vector::Zero(ncol_);
    x_.head(n_) = x;
    state_.assign(static_cast<std::size_t>(ncol_), State::AtLower);
    for (Index j = 0; j < n_; ++j) state_[j] = st[j];
    head_.assign(static_cast<std::size_t>(m_), 0);

    for (Index i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      state_[n_ + i] = State::Basic;
      x_[n_ + i] = act[i];
    }
    for (Index k = 0; k < num_art_; ++k) {
      const Index i = art_rows[static_cast<std::size_t>(k)];
      const Index col = n_ + m_ + k;
      const double sgn = art_sign[static_cast<std::size_t>(k)];
      k_(i, col) = sgn;
      const Index logical = n_ + i;
      const double bound = act[i] > up_[logical] ? up_[logical] : lo_[logical];
      x_[logical] = bound;
      state_[logical] = nonbasic_state(logical, bound);
      // act - bound + sgn * a = 0
      x_[col] = (bound - act[i]) / sgn;
      head_[i] = col;
      state_[col] = State::Basic;
    }
    refactor();
  }

  State nonbasic_state(Index j, double value) const {
    if (value == lo_[j] && std::isfinite(lo_[j])) return State::AtLower;
    if (value == up_[j] && std::isfinite(up_[j])) return State::AtUpper;
    return State::Between;
  }

  bool fixed(Index j) const { return lo_[j] == up_[j]; }

  // Recomputes the tableau and basic values from the original columns.
  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return;
    Matrix b(m_, m_);
    for (Index i = 0; i < m_; ++i) b.col(i) = k_.col(head_[i]);
    Eigen::PartialPivLU<Matrix> lu(b);
    tab_ = lu.solve(k_);
    Vector nx = Vector::Zero(m_);
    for (Index j = 0; j < ncol_; ++j) {
      if (state_[j] != State::Basic && x_[j] != 0.0) nx += k_.col(j) * x_[j];
    }
    const Vector xb = lu.solve(-nx);
    for (Index i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
  }

  void price(const Vector& cost) {
    d_ = cost;
    if (m_ > 0) {
      Vector cb(m_);
      for (Index i = 0; i < m_; ++i) cb[i] = cost[head_[i]];
      d_.noalias() -= tab_.transpose() * cb;
    }
  }

  // Entering column and direction (+1 increase, -1 decrease); -1 if optimal.
  std::pair<Index, double> choose_entering(bool bland) const {
    Index best = -1;
    double best_dir = 0.0;
    double best_score = 0.0;
    for (Index j = 0; j < ncol_; ++j) {
      const State s = state_[j];
      if (s == State::Basic || fixed(j)) continue;
      const double dj = d_[j];
      double dir = 0.0;
      if (s == State::AtLower && dj < -kDualTol) dir = 1.0;
      else if (s == State::AtUpper && dj > kDualTol) dir = -1.0;
      else if (s == State::Between && std::abs(dj) > kDualTol) dir = dj < 0.0 ? 1.0 : -1.0;
      if (dir == 0.0) continue;
      if (bland) return {j, dir};
      if (std::abs(dj) > best_score) {
        best_score = std::abs(dj);
        best = j;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  struct Step {
    double t = kInf;
    Index row = -1;  // -1 means bound flip of the entering column
  };

  Step ratio_test(Index j, double dir, bool bland) const {
    Step step;
    if (dir > 0.0 && std::isfinite(up_[j])) step.t = up_[j] - x_[j];
    if (dir < 0.0 && std::isfinite(lo_[j])) step.t = x_[j] - lo_[j];
    step.t = std::max(step.t, 0.0);
    double best_alpha = 0.0;
    for (Index i = 0; i < m_; ++i) {
      const double alpha = tab_(i, j) * dir;  // basic value moves by -alpha * t
      if (std::abs(alpha) <= kPivotTol) continue;
      const Index b = head_[i];
      double limit;
      if (alpha > 0.0) {
        if (!std::isfinite(lo_[b])) continue;
        limit = (x_[b] - lo_[b]) / alpha;
      } else {
        if (!std::isfinite(up_[b])) continue;
        limit = (up_[b] - x_[b]) / -alpha;
      }
      limit = std::max(limit, 0.0);
      const double tie = 1e-12 * std::max(1.0, step.t == kInf ? 1.0 : step.t);
      bool take = false;
      if (limit < step.t - tie) {
        take = true;
      } else if (limit <= step.t + tie && step.row >= 0) {
        take = bland ? head_[i] < head_[step.row] : std::abs(alpha) > best_alpha;
      }
      if (take) {
        step.t = limit;
        step.row = i;
        best_alpha = std::abs(alpha);
      }
    }
    return step;
  }

  void apply(Index j, double dir, const Step& step) {
    const double t = step.t;
    if (t != 0.0) {
      for (Index i = 0; i < m_; ++i) x_[head_[i]] -= tab_(i, j) * dir * t;
      x_[j] += dir * t;
    }
    if (step.row < 0) {
      x_[j] = dir > 0.0 ? up_[j] : lo_[j];
      state_[j] = dir > 0.0 ? State::AtUpper : State::AtLower;
      return;
    }
    const Index r = step.row;
    const Index leaving = head_[r];
    const double alpha = tab_(r, j) * dir;
    x_[leaving] = alpha > 0.0 ? lo_[leaving] : up_[leaving];
    state_[leaving] = alpha > 0.0 ? State::AtLower : State::AtUpper;
    if (fixed(leaving)) state_[leaving] = State::AtLower;
    pivot(r, j);
    ++since_refactor_;
  }

  void pivot(Index r, Index j) {
    const double p = tab_(r, j);
    tab_.row(r) /= p;
    Vector col = tab_.col(j);
    col[r] = 0.0;
    tab_.noalias() -= col * tab_.row(r);
    d_.noalias() -= d_[j] * tab_.row(r).transpose();
    head_[r] = j;
    state_[j] = State::Basic;
  }

  LpStatus optimize(const Vector& cost) {
    price(cost);
    Index degenerate_run = 0;
    const Index limit = 50 * (m_ + ncol_) + 1000;
    for (;;) {
      if (iterations_ > limit) throw Error("simplex iteration limit exceeded");
      const bool bland = degenerate_run > kBlandAfterDegenerate;
      const auto [j, dir] = choose_entering(bland);
      if (j < 0) return LpStatus::Optimal;
      const Step step = ratio_test(j, dir, bland);
      if (!std::isfinite(step.t)) return LpStatus::Unbounded;
      degenerate_run = step.t <= 1e-12 ? degenerate_run + 1 : 0;
      apply(j, dir, step);
      ++iterations_;
      if (since_refactor_ >= kRefactorEvery) {
        refactor();
        price(cost);
      }
    }
  }

  void retire_artificials() {
    for (Index k = n_ + m_; k < ncol_; ++k) {
      lo_[k] = 0.0;
      up_[k] = 0.0;
    }
    for (Index i = 0; i < m_; ++i) {
      const Index b = head_[i];
      if (b < n_ + m_) continue;
      Index best = -1;
      double best_abs = 1e-7;
      for (Index j = 0; j < n_ + m_; ++j) {
        if (state_[j] == State::Basic) continue;
        if (std::abs(tab_(i, j)) > best_abs) {
          best_abs = std::abs(tab_(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        x_[b] = 0.0;
        state_[b] = State::AtLower;
        pivot(i, best);
      }
    }
    for (Index k = n_ + m_; k < ncol_; ++k) {
      if (state_[k] != State::Basic) x_[k] = 0.0;
    }
    refactor();
  }

  // Moves every nonbasic column that sits strictly inside its bounds onto a
  // bound or into the basis without changing the objective. Returns false if
  // some column can move freely in both directions (the optimal face contains
  // a line).
  bool purify(const Vector& cost) {
    bool vertex = true;
    for (Index j = 0; j < ncol_; ++j) {
      if (state_[j] != State::Between || fixed(j)) continue;
      const double first = d_[j] > 0.0 ? -1.0 : 1.0;
      bool moved = false;
      for (const double dir : {first, -first}) {
        const Step step = ratio_test(j, dir, false);
        if (!std::isfinite(step.t)) continue;
        apply(j, dir, step);
        moved = true;
        break;
      }
      if (!moved) vertex = false;
      if (since_refactor_ >= kRefactorEvery) {
        refactor();
        price(cost);
      }
    }
    return vertex;
  }

  const BoundedLp& lp_;
  Tolerances tol_;
  Index n_ = 0, m_ = 0, num_art_ = 0, ncol_ = 0;
  Matrix k_;
  Matrix tab_;
  Vector lo_, up_, x_, d_;
  std::vector<Index> head_;
  std::vector<State> state_;
  double bound_scale_ = 1.0;
  Index iterations_ = 0;
  Index since_refactor_ = 0;
};

}  // namespace

BoundedSolution solve_bounded(const BoundedLp& lp, const Tolerances& tol) {
  lp.validate();
  tol.validate();
  BoundedSimplex simplex(lp, tol);
  return simplex.run();
}

LpSolution solve_lp(const LinearProgram& lp, const Tolerances& tol) {
  lp.validate();
  tol.validate();
  const Index n = lp.num_vars();
  const Index mi = lp.ineq_lhs.rows();
  const Index me = lp.eq_lhs.rows();

  BoundedLp b;
  b.cost = lp.cost;
  b.rows.resize(mi + me, n);
  if (mi > 0) b.rows.topRows(mi) = lp.ineq_lhs;
  if (me > 0) b.rows.bottomRows(me) = lp.eq_lhs;
  b.row_lower.resize(mi + me);
  b.row_upper.resize(mi + me);
  b.row_lower.head(mi).setConstant(-kInf);
  b.row_upper.head(mi) = lp.ineq_rhs;
  b.row_lower.tail(me) = lp.eq_rhs;
  b.row_upper.tail(me) = lp.eq_rhs;
  b.col_lower = Vector::Constant(n, -kInf);
  b.col_upper = Vector::Constant(n, kInf);

  const BoundedSolution s = solve_bounded(b, tol);
  LpSolution out;
  out.iterations = s.iterations;
  out.status = s.status;
  if (s.status != LpStatus::Optimal) return out;

  out.x_opt = s.x;
  out.objective = s.objective;
  out.ineq_dual = -s.row_dual.head(mi);
  out.eq_dual = -s.row_dual.tail(me);
  for (Index i = 0; i < mi; ++i) {
    if (is_tight(s.activity[i], lp.ineq_rhs[i], tol.bind)) out.binding_ineq.push_back(i);
  }

  // Stack equality rows first so they are always part of the basis.
  std::vector<Index> forced, candidates;
  for (Index k = 0; k < me; ++k) forced.push_back(mi + k);
  candidates = out.binding_ineq;
  const auto chosen = linalg::independent_rows(b.rows, forced, candidates, tol.rank);
  for (const Index r : chosen) {
    if (r < mi) out.independent_binding.push_back(r);
  }
  std::sort(out.independent_binding.begin(), out.independent_binding.end());
  out.vertex = static_cast<Index>(chosen.size()) == n;
  if (static_cast<Index>(out.binding_ineq.size()) + me > n) out.status = LpStatus::Degenerate;
  return out;
}

}  // namespace edci::lp
