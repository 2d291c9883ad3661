#include "edci/inverse_newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edci/linalg.hpp"

namespace edci::inverse {

namespace {

constexpr Index kMaxExhaustiveCombos = 50000;
constexpr int kMaxCoordinateSweeps = 20;
constexpr double kProbeFractions[] = {0.5, 0.2, 0.05, 0.01};

double residual_norm(const Vector& response, const Vector& target) {
  return (response - target).norm();
}

}  // namespace

void InverseConfig::validate() const {
  if (max_iter < 1) throw ConfigError("inverse.max_iter must be >= 1");
  if (!(loss_tol_rel > 0.0)) throw ConfigError("inverse.loss_tol must be > 0");
  if (grid_points_per_dim < 1) throw ConfigError("inverse.grid_points_per_dim must be >= 1");
  if (max_halvings < 0) throw ConfigError("inverse.max_halvings must be >= 0");
  if (max_probe_rounds < 0) throw ConfigError("inverse.max_probe_rounds must be >= 0");
  tol.validate();
}

TimeSeries esl_target(const TimeSeries& total_load, const Vector& pv_regressor, double lambda_pv,
                      const Vector& g_tau, double lambda_tcl, const TimeSeries& pl) {
  const Index t = total_load.size();
  if (pv_regressor.size() != t || g_tau.size() != t || pl.size() != t)
    throw DimensionError("esl_target: series lengths differ");
  return total_load.with_values(total_load.values() - lambda_pv * pv_regressor -
                                lambda_tcl * g_tau - pl.values());
}

TimeSeries esl_target(const ScenarioData& scenario, double lambda_pv, double lambda_tcl,
                      const TimeSeries& pl, const TclParams& tcl_params) {
  if (pl.size() != scenario.size()) throw DimensionError("esl_target: PL length differs");
  return esl_target(scenario.total_load, scenario.irradiance.values(), lambda_pv,
                    tcl_g_series(tcl_params, scenario.temperature), lambda_tcl, pl);
}

Evaluated evaluate(const VbTheta& theta, const TimeSeries& target, const TimeSeries& price,
                   const lp::Tolerances& tol) {
  if (target.size() != price.size()) throw DimensionError("target and price lengths differ");
  auto response = vb::vb_response(theta, price, tol);
  const double loss = residual_norm(response.esl_total.values(), target.values());
  return {loss, std::move(response)};
}

Lattice Lattice::make(const TimeSeries& target, Index batteries, int points_per_dim) {
  if (points_per_dim < 1) throw ConfigError("grid_points_per_dim must be >= 1");
  Lattice lat;
  const double p_scale = target.values().cwiseAbs().maxCoeff();
  const double e_scale = p_scale * target.period() / 4.0;
  const int g = points_per_dim;
  for (int i = 0; i < g; ++i) {
    lat.p_values.push_back(g == 1 ? p_scale : p_scale * i / (g - 1));
    lat.e_values.push_back(e_scale * std::ldexp(1.0, -(g - 1 - i)));
  }
  lat.lower_fractions = g == 1 ? std::vector<double>{1.0} : std::vector<double>{1.0, 0.0};
  for (Index n = 0; n < batteries; ++n) {
    lat.battery_factor.push_back(batteries == 1 ? 1.0
                                                : 0.9 + 0.2 * static_cast<double>(n) /
                                                            static_cast<double>(batteries - 1));
  }
  return lat;
}

VirtualBattery Lattice::battery(Index n, Index point) const {
  const auto ne = static_cast<Index>(e_values.size());
  const auto nl = static_cast<Index>(lower_fractions.size());
  const double f = battery_factor[static_cast<std::size_t>(n)];
  const double lower = lower_fractions[static_cast<std::size_t>(point % nl)];
  point /= nl;
  const double p = p_values[static_cast<std::size_t>(point / ne)];
  const double e = e_values[static_cast<std::size_t>(point % ne)];
  return {f * p, f * e, -lower * f * e};
}

VbTheta grid_init(const TimeSeries& target, const TimeSeries& price, Index batteries,
                  const InverseConfig& cfg) {
  if (batteries < 1) throw ConfigError("number of virtual batteries must be >= 1");
  if (target.size() != price.size()) throw DimensionError("target and price lengths differ");
  const Lattice lat = Lattice::make(target, batteries, cfg.grid_points_per_dim);
  const Index points = lat.points_per_battery();
  const Index t = target.size();
  const Matrix cum = vb::cumulative_operator(t);

  // cache[n][point] = response of battery n at lattice point
  std::vector<std::vector<Vector>> cache(static_cast<std::size_t>(batteries));
  for (Index n = 0; n < batteries; ++n) {
    auto& c = cache[static_cast<std::size_t>(n)];
    c.reserve(static_cast<std::size_t>(points));
    for (Index p = 0; p < points; ++p)
      c.push_back(vb::battery_response(lat.battery(n, p), price.values(), cum, cfg.tol));
  }

  auto loss_of = [&](const std::vector<Index>& choice) {
    Vector sum = Vector::Zero(t);
    for (Index n = 0; n < batteries; ++n)
      sum += cache[static_cast<std::size_t>(n)][static_cast<std::size_t>(choice[static_cast<std::size_t>(n)])];
    return residual_norm(sum, target.values());
  };

  std::vector<Index> best(static_cast<std::size_t>(batteries), 0);
  double best_loss = std::numeric_limits<double>::infinity();

  double combos = std::pow(static_cast<double>(points), static_cast<double>(batteries));
  if (combos <= static_cast<double>(kMaxExhaustiveCombos)) {
    std::vector<Index> choice(static_cast<std::size_t>(batteries), 0);
    for (;;) {
      const double loss = loss_of(choice);
      if (loss < best_loss) {
        best_loss = loss;
        best = choice;
      }
      Index k = 0;
      while (k < batteries && ++choice[static_cast<std::size_t>(k)] == points) {
        choice[static_cast<std::size_t>(k)] = 0;
        ++k;
      }
      if (k == batteries) break;
    }
  } else {
    // Start from the best fleet of identical (perturbed) batteries.
    for (Index p = 0; p < points; ++p) {
      std::vector<Index> choice(static_cast<std::size_t>(batteries), p);
      const double loss = loss_of(choice);
      if (loss < best_loss) {
        best_loss = loss;
        best = choice;
      }
    }
    for (int sweep = 0; sweep < kMaxCoordinateSweeps; ++sweep) {
      bool improved = false;
      for (Index n = 0; n < batteries; ++n) {
        auto choice = best;
        for (Index p = 0; p < points; ++p) {
          choice[static_cast<std::size_t>(n)] = p;
          const double loss = loss_of(choice);
          if (loss < best_loss) {
            best_loss = loss;
            best = choice;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
  }

  std::vector<VirtualBattery> out;
  for (Index n = 0; n < batteries; ++n) out.push_back(lat.battery(n, best[static_cast<std::size_t>(n)]));
  return VbTheta(std::move(out));
}

namespace {

// Rows of one battery's inequality block (4T x T) and the derivative of
// each row's right-hand side with respect to (p_bar, e_bar, e_lower).
struct BatteryRows {
  Matrix rows;
  Matrix rhs;
};

BatteryRows battery_rows(Index t) {
  const Matrix cum = vb::cumulative_operator(t);
  BatteryRows br{Matrix::Zero(4 * t, t), Matrix::Zero(4 * t, 3)};
  br.rows.block(0, 0, t, t) = Matrix::Identity(t, t);
  br.rows.block(t, 0, t, t) = -Matrix::Identity(t, t);
  br.rows.block(2 * t, 0, t, t) = cum;
  br.rows.block(3 * t, 0, t, t) = -cum;
  br.rhs.block(0, 0, 2 * t, 1).setOnes();
  br.rhs.block(2 * t, 1, t, 1).setOnes();
  br.rhs.block(3 * t, 2, t, 1).setConstant(-1.0);
  return br;
}

Matrix solve_rows(const Matrix& m, const Matrix& rhs, double tol_rank, bool& rank_deficient) {
  if (m.rows() == m.cols()) {
    auto s = linalg::solve_square(m, rhs, tol_rank);
    rank_deficient = rank_deficient || s.rank_deficient;
    return s.value;
  }
  rank_deficient = true;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  cod.setThreshold(tol_rank);
  return cod.solve(rhs);
}

}  // namespace

Sensitivity sensitivity(const VbTheta& theta, const vb::VbResponse& response,
                        const lp::Tolerances& tol) {
  const Index t = response.esl_total.size();
  const Index n = theta.num_batteries();
  if (response.per_battery.rows() != n) throw DimensionError("response/theta battery count differs");

  const BatteryRows br = battery_rows(t);
  Sensitivity out;
  out.f = Matrix::Zero(t, 3 * n);
  for (Index k = 0; k < n; ++k) {
    const Vector p = response.per_battery.row(k).transpose();
    const auto binding = vb::battery_binding_rows(theta.battery(k), p, tol.bind);
    out.binding_count += static_cast<Index>(binding.size());
    if (static_cast<Index>(binding.size()) > t) out.degenerate = true;

    std::vector<Index> chosen = static_cast<Index>(binding.size()) == t
                                    ? binding
                                    : linalg::independent_rows(br.rows, {}, binding, tol.rank);
    Matrix m(static_cast<Index>(chosen.size()), t);
    Matrix rhs(static_cast<Index>(chosen.size()), 3);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      m.row(static_cast<Index>(i)) = br.rows.row(chosen[i]);
      rhs.row(static_cast<Index>(i)) = br.rhs.row(chosen[i]);
    }
    out.f.block(0, 3 * k, t, 3) = solve_rows(m, rhs, tol.rank, out.rank_deficient);
  }
  return out;
}

Sensitivity assembled_sensitivity(const VbTheta& theta, const TimeSeries& price,
                                  const lp::Tolerances& tol) {
  const auto vblp = vb::assemble_lp(theta, price);
  const auto sol = lp::solve_lp(vblp.lp, tol);
  if (!sol.has_optimum()) throw Error("assembled surrogate LP has no optimum");
  const Index t = vblp.horizon;
  const Index vars = vblp.lp.num_vars();
  const Index k = t + static_cast<Index>(sol.independent_binding.size());

  Matrix m(k, vars);
  Matrix c = Matrix::Zero(k, vblp.c.cols());
  m.topRows(t) = vblp.lp.eq_lhs;
  for (std::size_t i = 0; i < sol.independent_binding.size(); ++i) {
    const Index r = sol.independent_binding[i];
    m.row(t + static_cast<Index>(i)) = vblp.lp.ineq_lhs.row(r);
    c.row(t + static_cast<Index>(i)) = vblp.c.row(r);
  }
  Sensitivity out;
  out.binding_count = static_cast<Index>(sol.binding_ineq.size());
  out.degenerate = sol.status == lp::LpStatus::Degenerate;
  const Matrix s = solve_rows(m, -c, tol.rank, out.rank_deficient);
  out.f = s.topRows(t);
  return out;
}

NewtonStep newton_step(const VbTheta& theta_k, const vb::VbResponse& response_k,
                       const TimeSeries& target, const lp::Tolerances& tol) {
  if (target.size() != response_k.esl_total.size())
    throw DimensionError("target and response lengths differ");
  NewtonStep out;
  out.info = sensitivity(theta_k, response_k, tol);
  out.f = out.info.f;
  // Inside the critical region the response is F theta, so solving for the
  // step and for theta directly agree when F has full column rank; the step
  // form leaves unidentifiable directions of theta unchanged.
  //
  // Components the step would push out of the valid set are pinned to their
  // bound and the remaining ones re-solved, rather than clipping afterwards.
  const Vector theta = theta_k.flat();
  const Vector residual = target.values() - out.f * theta;
  const Index k = theta.size();
  Vector step = Vector::Zero(k);
  std::vector<bool> pinned(static_cast<std::size_t>(k), false);
  for (Index round = 0; round <= k; ++round) {
    std::vector<Index> free;
    Vector r = residual;
    for (Index j = 0; j < k; ++j) {
      if (pinned[static_cast<std::size_t>(j)]) {
        step[j] = -theta[j];
        r -= out.f.col(j) * step[j];
      } else {
        free.push_back(j);
      }
    }
    if (free.empty()) break;
    Matrix sub(out.f.rows(), static_cast<Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) sub.col(static_cast<Index>(i)) = out.f.col(free[i]);
    const auto lsq = linalg::least_squares(sub, r, tol.rank);
    out.lsq_rank_deficient = lsq.rank_deficient;
    bool clipped = false;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const Index j = free[i];
      step[j] = lsq.value[static_cast<Index>(i)];
      const double next = theta[j] + step[j];
      // flat layout per battery: p_bar, e_bar >= 0; e_lower <= 0
      const bool lower = j % 3 == 2;
      if (lower ? next > 0.0 : next < 0.0) {
        pinned[static_cast<std::size_t>(j)] = true;
        clipped = true;
      }
    }
    if (!clipped) break;
  }
  out.theta_next = VbTheta::from_flat(theta + step).projected();
  return out;
}

NewtonStep newton_step(const VbTheta& theta_k, const TimeSeries& target, const TimeSeries& price,
                       const lp::Tolerances& tol) {
  const auto response = vb::vb_response(theta_k, price, tol);
  return newton_step(theta_k, response, target, tol);
}

namespace {

NewtonRecord record_of(const VbTheta& theta, const Evaluated& ev) {
  NewtonRecord r;
  r.theta = theta;
  r.loss = ev.loss;
  r.binding_count = static_cast<Index>(ev.response.binding_ineq.size());
  r.degenerate = ev.response.degenerate;
  return r;
}

}  // namespace

std::optional<VbTheta> probe_neighbourhood(const VbTheta& theta, const Evaluated& current,
                                           const TimeSeries& target, const TimeSeries& price,
                                           double min_gain, const lp::Tolerances& tol) {
  const Index t = target.size();
  const Index n = theta.num_batteries();
  if (current.response.per_battery.rows() != n || current.response.per_battery.cols() != t)
    throw DimensionError("probe: response does not match theta");
  const Matrix cum = vb::cumulative_operator(t);
  const Vector& total = current.response.esl_total.values();
  // One hour at the target's peak power sets the scale of every parameter.
  const double unit = std::max(target.values().cwiseAbs().maxCoeff(), 1e-9);

  const Vector base = theta.flat();
  Vector best_flat = base;
  double best_loss = current.loss - min_gain;
  bool found = false;
  for (Index j = 0; j < base.size(); ++j) {
    const Index k = j / 3;
    const Vector others = total - current.response.per_battery.row(k).transpose();
    const double scale = std::max(std::abs(base[j]), unit);
    for (double fraction : kProbeFractions) {
      for (double sign : {1.0, -1.0}) {
        Vector flat = base;
        flat[j] += sign * fraction * scale;
        const VbTheta trial = VbTheta::from_flat(flat).projected();
        if (trial.flat() == base) continue;
        const Vector r = vb::battery_response(trial.battery(k), price.values(), cum, tol);
        const double loss = residual_norm(others + r, target.values());
        if (loss < best_loss) {
          best_loss = loss;
          best_flat = trial.flat();
          found = true;
        }
      }
    }
  }
  if (!found) return std::nullopt;
  return VbTheta::from_flat(best_flat);
}

namespace {

struct Descent {
  VbTheta theta;
  Evaluated eval;
};

// Damped Newton iterations from one starting point, drawing on `steps_left`;
// records are appended to `trace` and the best accepted iterate is returned.
Descent descend(VbTheta theta, Evaluated current, const TimeSeries& target, const TimeSeries& price,
                const InverseConfig& cfg, int& steps_left, NewtonTrace& trace) {
  VbTheta best_theta = theta;
  Evaluated best = current;
  const double eps = cfg.loss_tol_rel * target.values().norm();

  for (; steps_left > 0; --steps_left) {
    const NewtonStep step = newton_step(theta, current.response, target, cfg.tol);
    VbTheta candidate = step.theta_next;
    Evaluated next = evaluate(candidate, target, price, cfg.tol);
    bool accepted = !cfg.damping_enabled || next.loss <= current.loss;
    bool damped = false;
    if (!accepted) {
      const Vector from = theta.flat();
      const Vector dir = step.theta_next.flat() - from;
      double eta = 0.5;
      for (int h = 0; h < cfg.max_halvings; ++h, eta *= 0.5) {
        VbTheta trial = VbTheta::from_flat(from + eta * dir).projected();
        Evaluated ev = evaluate(trial, target, price, cfg.tol);
        if (ev.loss <= current.loss) {
          candidate = std::move(trial);
          next = std::move(ev);
          accepted = true;
          damped = true;
          break;
        }
      }
    }

    NewtonRecord rec = record_of(candidate, next);
    rec.rank_deficient = step.info.rank_deficient || step.lsq_rank_deficient;
    rec.accepted = accepted;
    rec.damped = damped;
    trace.records.push_back(rec);
    if (!accepted) {
      --steps_left;
      break;
    }

    const double change = std::abs(next.loss - current.loss);
    theta = candidate;
    current = std::move(next);
    if (current.loss < best.loss) {
      best_theta = theta;
      best = current;
    }
    if (change <= eps) {
      --steps_left;
      break;
    }
  }
  return {std::move(best_theta), std::move(best)};
}

}  // namespace

Identification identify_esl(const TimeSeries& target, const TimeSeries& price, Index batteries,
                            const InverseConfig& cfg, const std::optional<VbTheta>& warm_start) {
  cfg.validate();
  if (target.size() < 3 * batteries)
    throw DimensionError("horizon too short: need T >= 3N for identification");

  VbTheta theta = grid_init(target, price, batteries, cfg);
  Evaluated current = evaluate(theta, target, price, cfg.tol);
  if (warm_start && warm_start->num_batteries() == batteries && warm_start->valid()) {
    Evaluated warm = evaluate(*warm_start, target, price, cfg.tol);
    if (warm.loss < current.loss) {
      theta = *warm_start;
      current = std::move(warm);
    }
  }

  NewtonTrace trace;
  trace.records.push_back(record_of(theta, current));
  // max_iter bounds the Newton steps over all restarts.
  int steps_left = cfg.max_iter;
  Descent d = descend(std::move(theta), std::move(current), target, price, cfg, steps_left, trace);
  const double eps = cfg.loss_tol_rel * target.values().norm();
  for (int round = 0; round < cfg.max_probe_rounds && steps_left > 0 && d.eval.loss > eps; ++round) {
    auto moved = probe_neighbourhood(d.theta, d.eval, target, price, eps, cfg.tol);
    if (!moved) break;
    Evaluated ev = evaluate(*moved, target, price, cfg.tol);
    if (!(ev.loss < d.eval.loss)) break;
    NewtonRecord rec = record_of(*moved, ev);
    rec.probe = true;
    trace.records.push_back(rec);
    d = descend(std::move(*moved), std::move(ev), target, price, cfg, steps_left, trace);
  }
  return Identification{std::move(d.theta), std::move(d.eval.response), d.eval.loss, std::move(trace)};
}

}  // namespace edci::inverse
