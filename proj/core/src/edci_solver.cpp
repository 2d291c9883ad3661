#include "edci/edci_solver.hpp"

#include <cmath>
#include <limits>

#include "edci/linalg.hpp"
#include <optional>

namespace edci {

void EdciConfig::validate() const {
  if (outer_max < 1) throw ConfigError("edci.outer_max must be >= 1");
  if (!(conv_tol > 0.0)) throw ConfigError("edci.conv_tol must be > 0");
  if (n_batteries < 1) throw ConfigError("edci.n_batteries must be >= 1");
  inverse.validate();
  tcl.validate();
}

Vector pv_regressor(const TimeSeries& irradiance, PvSign sign) {
  return sign == PvSign::ConsumptionNegative ? irradiance.values() : Vector(-irradiance.values());
}

InitEstimate initialize(const ScenarioData& scenario, const TclParams& tcl_params, PvSign pv_sign) {
  const Index days = scenario.days();
  if (days < 2) throw DimensionError("initialization needs at least 2 full days of data");
  const int d = scenario.period();
  const Vector g = tcl_g_series(tcl_params, scenario.temperature);

  Matrix f(days, 3);
  f.col(0) = daily_cumulant(pv_regressor(scenario.irradiance, pv_sign), d);
  f.col(1) = daily_cumulant(g, d);
  f.col(2).setOnes();
  const Vector rhs = daily_cumulant(scenario.total_load);

  const auto s = linalg::least_squares(f, rhs, lp::Tolerances{}.rank);
  return {s.value[0], s.value[1], s.value[2], s.rank_deficient};
}

PvTclFit refit_pv_tcl(const ScenarioData& scenario, const TimeSeries& esl, const TimeSeries& pl_prev,
                      const TclParams& tcl_params, PvSign pv_sign) {
  const Index t = scenario.size();
  if (esl.size() != t || pl_prev.size() != t) throw DimensionError("refit_pv_tcl: lengths differ");
  Matrix f(t, 2);
  f.col(0) = pv_regressor(scenario.irradiance, pv_sign);
  f.col(1) = tcl_g_series(tcl_params, scenario.temperature);
  const Vector rhs = scenario.total_load.values() - esl.values() - pl_prev.values();
  const auto s = linalg::least_squares(f, rhs, lp::Tolerances{}.rank);
  return {s.value[0], s.value[1], (f * s.value - rhs).norm(), s.rank_deficient};
}

namespace {

Vector raw_pl(const ScenarioData& scenario, const Vector& esl, double lambda_pv, double lambda_tcl,
              const Vector& pv_reg, const Vector& g) {
  return scenario.total_load.values() - esl - lambda_pv * pv_reg - lambda_tcl * g;
}

}  // namespace

TimeSeries update_pl(const ScenarioData& scenario, const TimeSeries& esl, double lambda_pv,
                     double lambda_tcl, const TclParams& tcl_params, PvSign pv_sign) {
  if (esl.size() != scenario.size()) throw DimensionError("update_pl: lengths differ");
  const Vector residual =
      raw_pl(scenario, esl.values(), lambda_pv, lambda_tcl, pv_regressor(scenario.irradiance, pv_sign),
             tcl_g_series(tcl_params, scenario.temperature));
  return periodic_extend(day_mean_profile(residual, scenario.period()), scenario.size());
}

double pl_change_ratio(const TimeSeries& pl_new, const TimeSeries& pl_old) {
  if (pl_new.size() != pl_old.size()) throw DimensionError("PL series lengths differ");
  const double num = (pl_new.values() - pl_old.values()).norm();
  const double den = pl_new.values().norm();
  if (den == 0.0) return pl_old.values().norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

bool converged(const TimeSeries& pl_new, const TimeSeries& pl_old, double nu) {
  return pl_change_ratio(pl_new, pl_old) <= nu;
}

namespace {

double fit_rmse(const Vector& fit, const Vector& measured) {
  return std::sqrt((fit - measured).squaredNorm() / static_cast<double>(measured.size()));
}

double fit_nrmse(double rmse, const Vector& measured) {
  const double peak = measured.cwiseAbs().maxCoeff();
  if (peak > 0.0) return 100.0 * rmse / peak;
  return rmse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

EdciResult run_edci(const ScenarioData& scenario, const EdciConfig& cfg) {
  cfg.validate();
  const Index t = scenario.size();
  const int d = scenario.period();
  scenario.days();  // whole days required

  const Vector pv_reg = pv_regressor(scenario.irradiance, cfg.pv_sign);
  const Vector g = tcl_g_series(cfg.tcl, scenario.temperature);
  const Vector& measured = scenario.total_load.values();

  const InitEstimate init = initialize(scenario, cfg.tcl, cfg.pv_sign);
  std::optional<Decomposition> best;
  Vector best_profile;
  std::vector<OuterRecord> outer_trace;
  std::vector<inverse::NewtonTrace> newton_traces;
  bool is_converged = false;

  double lambda_pv = init.lambda_dc_pv;
  double lambda_tcl = init.lambda_dc_tcl;
  TimeSeries pl_prev(Vector::Constant(t, init.sigma_dc_pl / d), Unit::MW, d);
  std::optional<VbTheta> warm;
  double best_rmse = std::numeric_limits<double>::infinity();

  for (int l = 0; l < cfg.outer_max; ++l) {
    const TimeSeries target =
        inverse::esl_target(scenario.total_load, pv_reg, lambda_pv, g, lambda_tcl, pl_prev);
    auto id = inverse::identify_esl(target, scenario.price, cfg.n_batteries, cfg.inverse,
                                    cfg.warm_start ? warm : std::nullopt);

    const PvTclFit refit = refit_pv_tcl(scenario, id.response.esl_total, pl_prev, cfg.tcl, cfg.pv_sign);
    const double new_pv = refit.lambda_pv;
    const double new_tcl = refit.lambda_tcl;

    const Vector residual = raw_pl(scenario, id.response.esl_total.values(), new_pv, new_tcl, pv_reg, g);
    const Vector profile = day_mean_profile(residual, d);
    TimeSeries pl = periodic_extend(profile, t);

    const Vector fit = id.response.esl_total.values() + new_pv * pv_reg + new_tcl * g + pl.values();
    const double rmse = fit_rmse(fit, measured);

    OuterRecord rec;
    rec.iteration = l;
    rec.lambda_pv = new_pv;
    rec.lambda_tcl = new_tcl;
    rec.loss_g = id.loss;
    rec.loss_o = refit.loss;
    rec.pl_change = pl_change_ratio(pl, pl_prev);
    rec.tl_nrmse = fit_nrmse(rmse, measured);

    if (best && rmse > best_rmse) {
      rec.accepted = false;
      outer_trace.push_back(rec);
      newton_traces.push_back(std::move(id.trace));
      break;
    }

    best_rmse = rmse;
    outer_trace.push_back(rec);
    newton_traces.push_back(std::move(id.trace));
    best = Decomposition{
        id.response.esl_total,
        TimeSeries(new_pv * pv_reg, Unit::MW, d),
        TimeSeries(new_tcl * g, Unit::MW, d),
        pl,
        new_pv,
        new_tcl,
        id.theta,
    };
    best_profile = profile;

    if (converged(pl, pl_prev, cfg.conv_tol)) {
      is_converged = true;
      break;
    }
    lambda_pv = new_pv;
    lambda_tcl = new_tcl;
    pl_prev = pl;
    warm = id.theta;
  }
  return EdciResult{std::move(*best), std::move(best_profile), init, std::move(outer_trace),
                    std::move(newton_traces), is_converged, cfg};
}

IdentifiedModel model_of(const EdciResult& result) {
  const auto& dec = result.decomposition;
  return {dec.theta,          dec.lambda_pv,          dec.lambda_tcl,          result.pl_profile,
          result.config.tcl, result.config.pv_sign, result.config.inverse.tol};
}

Decomposition predict(const IdentifiedModel& model, const Exogenous& exo) {
  const int d = exo.period();
  const Index t = exo.size();
  if (model.pl_profile.size() != d) throw DimensionError("PL profile length differs from the period");
  if (t % d != 0) throw DimensionError("prediction horizon must cover whole days");
  auto esl = vb::vb_response(model.theta, exo.price, model.tol).esl_total;
  TimeSeries pv(model.lambda_pv * pv_regressor(exo.irradiance, model.pv_sign), Unit::MW, d);
  TimeSeries tcl = tcl_response(model.lambda_tcl, model.tcl, exo.temperature);
  return Decomposition{std::move(esl), std::move(pv), std::move(tcl),
                       periodic_extend(model.pl_profile, t), model.lambda_pv, model.lambda_tcl,
                       model.theta};
}

Decomposition predict(const EdciResult& result, const Exogenous& exo) {
  return predict(model_of(result), exo);
}

}  // namespace edci
