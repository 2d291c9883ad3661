#pragma once

#include "edci/core_types.hpp"
#include "edci/lp.hpp"

namespace edci {

/// Steady-state thermostatic-load model. Electric power is linear in the
/// compressor frequency (P = a f + b) and thermal output quadratic
/// (Q = c f^2 + d f + e, c < 0). With a fixed indoor setpoint the thermal
/// output equals |tau_out - tau_in| / r.
struct TclParams {
  double a = 1.0;
  double b = 1.0;
  double c = -1.0;
  double d = 0.0;
  double e = 1.0;
  double r = 1.0;        // thermal resistance, degC/MW
  double c_th = 1.0;     // thermal capacitance; unused in steady state
  double tau_in = 22.0;  // indoor setpoint, degC

  /// Throws DomainError unless c < 0, r > 0 and the discriminant is
  /// nonnegative at the setpoint.
  void validate() const;

  /// Largest |tau_out - tau_in| with a nonnegative discriminant.
  double max_gap() const;
  /// Valid outdoor temperatures are [tau_in - max_gap, tau_in + max_gap].
  double valid_low() const { return tau_in - max_gap(); }
  double valid_high() const { return tau_in + max_gap(); }

  /// Defaults used by the synthetic benchmark: a compressor with
  /// Q(f) = -4e-4 f^2 + 0.06 f, P = 0.02 f, r = 10. Valid for
  /// |tau_out - 22| <= 22.5 degC.
  static TclParams benchmark();
};

/// One price-responsive storage-like device. Energy bounds are relative to
/// a zero start-of-horizon datum.
struct EslDevice {
  double p_max = 0.0;
  double e_max = 0.0;
  double e_min = 0.0;
  bool daily_cyclic = true;

  void validate() const;
};

/// lambda_pv * irradiance.
TimeSeries pv_response(double lambda_pv, const TimeSeries& irradiance);

/// Electric power of a unit TCL at outdoor temperature `tau_out` (negative
/// root branch). Throws DomainError outside the valid temperature range.
double tcl_g(const TclParams& params, double tau_out);

/// g applied elementwise (unit capacity). Errors name the offending index.
Vector tcl_g_series(const TclParams& params, const TimeSeries& temperature);

/// lambda_tcl * g(temperature).
TimeSeries tcl_response(double lambda_tcl, const TclParams& params, const TimeSeries& temperature);

struct DispatchResult {
  TimeSeries net;  // charge - discharge, MW
  double objective = 0.0;
};

/// Price-optimal net consumption of one device: minimizes price.(Pc - Pd)
/// subject to power limits, cumulative-energy bounds and, if daily_cyclic,
/// zero net energy per day. Daily-cyclic devices decouple by day and are
/// solved one day at a time.
DispatchResult esl_device_dispatch(const EslDevice& device, const TimeSeries& price,
                                   const lp::Tolerances& tol = {});

}  // namespace edci
