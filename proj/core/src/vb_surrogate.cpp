#include "edci/vb_surrogate.hpp"

#include <algorithm>
#include <string>

namespace edci::vb {

Matrix cumulative_operator(Index t) {
  Matrix l = Matrix::Zero(t, t);
  for (Index i = 0; i < t; ++i) l.row(i).head(i + 1).setOnes();
  return l;
}

VbLp assemble_lp(const VbTheta& theta, const TimeSeries& price) {
  const Index t = price.size();
  const Index n = theta.num_batteries();
  const Index vars = t * (n + 1);
  const Matrix cum = cumulative_operator(t);

  VbLp out;
  out.horizon = t;
  out.batteries = n;
  out.a = Matrix::Zero(4 * n * t, t);
  out.b = Matrix::Zero(4 * n * t, n * t);
  out.c = Matrix::Zero(4 * n * t, 3 * n);

  for (Index k = 0; k < n; ++k) {
    const Index r0 = VbLp::row(t, k, RowKind::PowerUpper, 0);
    const Index r1 = VbLp::row(t, k, RowKind::PowerLower, 0);
    const Index r2 = VbLp::row(t, k, RowKind::EnergyUpper, 0);
    const Index r3 = VbLp::row(t, k, RowKind::EnergyLower, 0);
    out.b.block(r0, k * t, t, t) = Matrix::Identity(t, t);
    out.b.block(r1, k * t, t, t) = -Matrix::Identity(t, t);
    out.b.block(r2, k * t, t, t) = cum;
    out.b.block(r3, k * t, t, t) = -cum;
    out.c.block(r0, 3 * k, t, 1).setConstant(-1.0);      //  P <= p_bar
    out.c.block(r1, 3 * k, t, 1).setConstant(-1.0);      // -P <= p_bar
    out.c.block(r2, 3 * k + 1, t, 1).setConstant(-1.0);  //  cumsum P <= e_bar
    out.c.block(r3, 3 * k + 2, t, 1).setConstant(1.0);   // -cumsum P <= -e_lower
  }

  auto& lp = out.lp;
  lp.cost = Vector::Zero(vars);
  lp.cost.head(t) = price.values();
  lp.ineq_lhs.resize(4 * n * t, vars);
  lp.ineq_lhs << out.a, out.b;
  lp.ineq_rhs = -out.c * theta.flat();
  lp.eq_lhs = Matrix::Zero(t, vars);
  lp.eq_lhs.leftCols(t) = Matrix::Identity(t, t);
  for (Index k = 0; k < n; ++k) lp.eq_lhs.block(0, t * (k + 1), t, t) = -Matrix::Identity(t, t);
  lp.eq_rhs = Vector::Zero(t);
  return out;
}

Vector VbResponse::stacked() const {
  const Index t = esl_total.size();
  const Index n = per_battery.rows();
  Vector x(t * (n + 1));
  x.head(t) = esl_total.values();
  for (Index k = 0; k < n; ++k) x.segment(t * (k + 1), t) = per_battery.row(k).transpose();
  return x;
}

Vector battery_response(const VirtualBattery& battery, const Vector& price, const Matrix& cumsum,
                        const lp::Tolerances& tol) {
  const Index t = price.size();
  if (battery.p_bar <= 0.0) return Vector::Zero(t);
  lp::BoundedLp b;
  b.cost = price;
  b.rows = cumsum;
  b.row_lower = Vector::Constant(t, battery.e_lower);
  b.row_upper = Vector::Constant(t, battery.e_bar);
  b.col_lower = Vector::Constant(t, -battery.p_bar);
  b.col_upper = Vector::Constant(t, battery.p_bar);
  const auto s = lp::solve_bounded(b, tol);
  if (s.status != lp::LpStatus::Optimal)
    throw Error("virtual battery LP is " + std::string(lp::status_name(s.status)));
  return s.x;
}

std::vector<Index> battery_binding_rows(const VirtualBattery& battery, const Vector& trajectory,
                                        double tol_bind) {
  const Index t = trajectory.size();
  std::vector<Index> rows;
  double energy = 0.0;
  for (Index i = 0; i < t; ++i) {
    if (lp::is_tight(trajectory[i], battery.p_bar, tol_bind))
      rows.push_back(VbLp::row(t, 0, RowKind::PowerUpper, i));
    if (lp::is_tight(-trajectory[i], battery.p_bar, tol_bind))
      rows.push_back(VbLp::row(t, 0, RowKind::PowerLower, i));
  }
  for (Index i = 0; i < t; ++i) {
    energy += trajectory[i];
    if (lp::is_tight(energy, battery.e_bar, tol_bind))
      rows.push_back(VbLp::row(t, 0, RowKind::EnergyUpper, i));
    if (lp::is_tight(-energy, -battery.e_lower, tol_bind))
      rows.push_back(VbLp::row(t, 0, RowKind::EnergyLower, i));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

VbResponse vb_response(const VbTheta& theta, const TimeSeries& price, const lp::Tolerances& tol) {
  if (!theta.valid()) throw DomainError("theta violates p_bar >= 0, e_lower <= 0 <= e_bar");
  const Index t = price.size();
  const Index n = theta.num_batteries();
  const Matrix cum = cumulative_operator(t);

  Matrix per = Matrix::Zero(n, t);
  std::vector<Index> binding;
  for (Index k = 0; k < n; ++k) {
    const Vector p = battery_response(theta.battery(k), price.values(), cum, tol);
    per.row(k) = p.transpose();
    for (const Index r : battery_binding_rows(theta.battery(k), p, tol.bind))
      binding.push_back(k * 4 * t + r);
  }
  Vector total = per.colwise().sum().transpose();
  const double objective = price.values().dot(total);
  const bool degenerate = static_cast<Index>(binding.size()) > n * t;
  return {TimeSeries(std::move(total), Unit::MW, price.period()), std::move(per),
          std::move(binding), degenerate, objective};
}

}  // namespace edci::vb
