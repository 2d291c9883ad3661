#include "edci/physics.hpp"

#include <cmath>
#include <string>

namespace edci {

namespace {

double discriminant(const TclParams& p, double gap) {
  return p.d * p.d - 4.0 * p.c * p.e + 4.0 * p.c * gap / p.r;
}

}  // namespace

void TclParams::validate() const {
  if (!(c < 0.0)) throw DomainError("TCL coefficient c must be negative");
  if (!(r > 0.0)) throw DomainError("TCL thermal resistance r must be positive");
  if (discriminant(*this, 0.0) < 0.0)
    throw DomainError("TCL discriminant is negative at the indoor setpoint");
}

double TclParams::max_gap() const {
  validate();
  // d^2 - 4ce + 4c gap / r >= 0  <=>  gap <= r (d^2 - 4ce) / (-4c)
  return r * (d * d - 4.0 * c * e) / (-4.0 * c);
}

TclParams TclParams::benchmark() {
  TclParams p;
  p.a = 0.02;
  p.b = 0.0;
  p.c = -4e-4;
  p.d = 0.06;
  p.e = 0.0;
  p.r = 10.0;
  p.c_th = 1.0;
  p.tau_in = 22.0;
  return p;
}

void EslDevice::validate() const {
  if (!(p_max >= 0.0)) throw DomainError("device p_max must be nonnegative");
  if (!(e_min <= 0.0 && 0.0 <= e_max)) throw DomainError("device energy bounds must bracket 0");
}

TimeSeries pv_response(double lambda_pv, const TimeSeries& irradiance) {
  return {lambda_pv * irradiance.values(), Unit::MW, irradiance.period()};
}

double tcl_g(const TclParams& params, double tau_out) {
  const double limit = params.max_gap();
  const double gap = std::abs(tau_out - params.tau_in);
  if (!std::isfinite(tau_out) || gap > limit * (1.0 + 1e-12) + 1e-12)
    throw DomainError("outdoor temperature " + std::to_string(tau_out) +
                      " degC is outside the TCL valid range [" + std::to_string(params.valid_low()) +
                      ", " + std::to_string(params.valid_high()) + "]");
  const double disc = std::max(discriminant(params, gap), 0.0);
  return params.a * (params.d - std::sqrt(disc)) / (-2.0 * params.c) + params.b;
}

Vector tcl_g_series(const TclParams& params, const TimeSeries& temperature) {
  Vector g(temperature.size());
  for (Index t = 0; t < temperature.size(); ++t) {
    try {
      g[t] = tcl_g(params, temperature[t]);
    } catch (const DomainError& e) {
      throw DomainError("temperature index " + std::to_string(t) + ": " + e.what());
    }
  }
  return g;
}

TimeSeries tcl_response(double lambda_tcl, const TclParams& params, const TimeSeries& temperature) {
  return {lambda_tcl * tcl_g_series(params, temperature), Unit::MW, temperature.period()};
}

namespace {

// Charge/discharge LP over `price`. When `cyclic`, the final cumulative
// energy is pinned to zero.
std::pair<Vector, double> dispatch_window(const EslDevice& dev, const Vector& price, bool cyclic,
                                          const lp::Tolerances& tol) {
  const Index t = price.size();
  lp::BoundedLp b;
  b.cost.resize(2 * t);
  b.cost << price, -price;
  b.rows = Matrix::Zero(t, 2 * t);
  for (Index i = 0; i < t; ++i) {
    b.rows.block(i, 0, 1, i + 1).setOnes();
    b.rows.block(i, t, 1, i + 1).setConstant(-1.0);
  }
  b.row_lower = Vector::Constant(t, dev.e_min);
  b.row_upper = Vector::Constant(t, dev.e_max);
  if (cyclic) {
    b.row_lower[t - 1] = 0.0;
    b.row_upper[t - 1] = 0.0;
  }
  b.col_lower = Vector::Zero(2 * t);
  b.col_upper = Vector::Constant(2 * t, dev.p_max);
  const auto s = lp::solve_bounded(b, tol);
  if (s.status != lp::LpStatus::Optimal)
    throw Error(std::string("ESL device dispatch LP is ") + std::string(lp::status_name(s.status)));
  return {s.x.head(t) - s.x.tail(t), s.objective};
}

}  // namespace

DispatchResult esl_device_dispatch(const EslDevice& device, const TimeSeries& price,
                                   const lp::Tolerances& tol) {
  device.validate();
  const Index t = price.size();
  if (!device.daily_cyclic) {
    auto [net, obj] = dispatch_window(device, price.values(), false, tol);
    return {TimeSeries(std::move(net), Unit::MW, price.period()), obj};
  }
  const Index d = price.period();
  const Index days = price.days();
  Vector net(t);
  double obj = 0.0;
  for (Index m = 0; m < days; ++m) {
    auto [day, o] = dispatch_window(device, price.values().segment(m * d, d), true, tol);
    net.segment(m * d, d) = day;
    obj += o;
  }
  return {TimeSeries(std::move(net), Unit::MW, price.period()), obj};
}

}  // namespace edci
