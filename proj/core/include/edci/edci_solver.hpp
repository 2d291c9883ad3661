#pragma once

#include <vector>

#include "edci/core_types.hpp"
#include "edci/inverse_newton.hpp"
#include "edci/physics.hpp"

namespace edci {

/// How PV enters the net-consumption balance. With ConsumptionNegative the
/// PV component is lambda_pv * irradiance and generation shows up as
/// lambda_pv <= 0. With GenerationPositive it is -lambda_pv * irradiance.
enum class PvSign { ConsumptionNegative, GenerationPositive };

struct EdciConfig {
  int outer_max = 20;      // L
  double conv_tol = 1e-3;  // nu
  Index n_batteries = 3;   // N
  inverse::InverseConfig inverse;
  TclParams tcl = TclParams::benchmark();
  PvSign pv_sign = PvSign::ConsumptionNegative;
  /// Offer the previous outer iteration's theta to the inner loop as an
  /// alternative starting point.
  bool warm_start = true;

  void validate() const;
};

/// Daily-cumulant regression estimates used to seed the outer loop.
struct InitEstimate {
  double lambda_dc_pv = 0.0;
  double lambda_dc_tcl = 0.0;
  double sigma_dc_pl = 0.0;  // PL energy per day
  bool rank_deficient = false;
};

struct OuterRecord {
  int iteration = 0;
  double lambda_pv = 0.0;
  double lambda_tcl = 0.0;
  double loss_g = 0.0;  // inner-loop loss
  double loss_o = 0.0;  // PV/TCL refit loss
  double pl_change = 0.0;
  double tl_nrmse = 0.0;  // training fit, percent
  bool accepted = true;
};

struct EdciResult {
  Decomposition decomposition;
  Vector pl_profile;  // one day
  InitEstimate init;
  std::vector<OuterRecord> outer_trace;
  std::vector<inverse::NewtonTrace> newton_traces;
  bool converged = false;
  EdciConfig config;
};

/// PV regressor under the configured sign convention.
Vector pv_regressor(const TimeSeries& irradiance, PvSign sign);

InitEstimate initialize(const ScenarioData& scenario, const TclParams& tcl_params,
                        PvSign pv_sign = PvSign::ConsumptionNegative);

struct PvTclFit {
  double lambda_pv = 0.0;
  double lambda_tcl = 0.0;
  double loss = 0.0;
  bool rank_deficient = false;
};

/// Least squares of lambda_pv * pv + lambda_tcl * g(tau) against
/// total_load - esl - pl_prev.
PvTclFit refit_pv_tcl(const ScenarioData& scenario, const TimeSeries& esl, const TimeSeries& pl_prev,
                      const TclParams& tcl_params, PvSign pv_sign = PvSign::ConsumptionNegative);

/// total_load - esl - pv - tcl, projected onto exactly D-periodic sequences
/// by slot-wise averaging across days.
TimeSeries update_pl(const ScenarioData& scenario, const TimeSeries& esl, double lambda_pv,
                     double lambda_tcl, const TclParams& tcl_params,
                     PvSign pv_sign = PvSign::ConsumptionNegative);

/// ||pl_new - pl_old|| / ||pl_new|| <= nu. A zero pl_new converges only
/// against a zero pl_old.
bool converged(const TimeSeries& pl_new, const TimeSeries& pl_old, double nu);
double pl_change_ratio(const TimeSeries& pl_new, const TimeSeries& pl_old);

/// Double-layer identification: daily-cumulant initialization, then outer
/// iterations of ESL identification, PV/TCL refit and PL update. An outer
/// iteration that worsens the training fit is discarded and the loop stops.
EdciResult run_edci(const ScenarioData& scenario, const EdciConfig& cfg);

/// What prediction needs from an identification run.
struct IdentifiedModel {
  VbTheta theta;
  double lambda_pv = 0.0;
  double lambda_tcl = 0.0;
  Vector pl_profile;
  TclParams tcl = TclParams::benchmark();
  PvSign pv_sign = PvSign::ConsumptionNegative;
  lp::Tolerances tol;
};

IdentifiedModel model_of(const EdciResult& result);

/// Applies an identified model to new exogenous data.
Decomposition predict(const IdentifiedModel& model, const Exogenous& exogenous);
Decomposition predict(const EdciResult& result, const Exogenous& exogenous);

}  // namespace edci
