#pragma once

#include <optional>
#include <vector>

#include "edci/core_types.hpp"
#include "edci/lp.hpp"
#include "edci/physics.hpp"
#include "edci/vb_surrogate.hpp"

namespace edci::inverse {

struct InverseConfig {
  int max_iter = 30;           // K
  double loss_tol_rel = 1e-6;  // stopping tolerance relative to ||target||
  int grid_points_per_dim = 5;
  bool damping_enabled = true;
  int max_halvings = 10;
  /// Times a stalled descent may be restarted from a better coordinate probe.
  /// 0 turns probing off.
  int max_probe_rounds = 8;
  lp::Tolerances tol;

  void validate() const;
};

struct NewtonRecord {
  VbTheta theta;
  double loss = 0.0;
  Index binding_count = 0;
  bool degenerate = false;
  bool rank_deficient = false;
  bool accepted = true;
  bool damped = false;
  bool probe = false;
};

/// Record 0 is the grid initialization; later records are Newton steps and,
/// after a stall, the coordinate probe the descent restarted from.
struct NewtonTrace {
  std::vector<NewtonRecord> records;
};

/// Residual load attributed to the storage-like component:
/// total_load - pv - tcl - pl.
TimeSeries esl_target(const ScenarioData& scenario, double lambda_pv, double lambda_tcl,
                      const TimeSeries& pl, const TclParams& tcl_params);

/// Same, with precomputed PV and TCL regressors (pv_regressor * lambda_pv is
/// the PV component).
TimeSeries esl_target(const TimeSeries& total_load, const Vector& pv_regressor, double lambda_pv,
                      const Vector& g_tau, double lambda_tcl, const TimeSeries& pl);

/// ||vb_response(theta) - target||_2 together with the response.
struct Evaluated {
  double loss = 0.0;
  vb::VbResponse response;
};
Evaluated evaluate(const VbTheta& theta, const TimeSeries& target, const TimeSeries& price,
                   const lp::Tolerances& tol);

/// Candidate values per battery: p_bar in linspace(0, 1, g) * p_scale and
/// e_bar in {2^-(g-1), ..., 1/2, 1} * e_scale, where p_scale = max|target|
/// and e_scale = p_scale * D / 4. e_lower is -e_bar (start half full) or,
/// for g >= 2, also 0 (start empty). Battery n of N is scaled by a factor
/// spread over [0.9, 1.1] to break symmetry.
struct Lattice {
  std::vector<double> p_values;
  std::vector<double> e_values;
  std::vector<double> lower_fractions;  // e_lower = -fraction * e_bar
  std::vector<double> battery_factor;

  static Lattice make(const TimeSeries& target, Index batteries, int points_per_dim);
  Index points_per_battery() const {
    return static_cast<Index>(p_values.size() * e_values.size() * lower_fractions.size());
  }
  VirtualBattery battery(Index n, Index point) const;
};

/// Best lattice point by loss. Exhaustive over the per-battery lattice when
/// the combination count is small, otherwise coordinate descent over it.
VbTheta grid_init(const TimeSeries& target, const TimeSeries& price, Index batteries,
                  const InverseConfig& cfg);

/// Sensitivity of the optimal response to theta inside the current critical
/// region: the top block F of -[A_bar B_bar]^-1 C_bar.
struct Sensitivity {
  Matrix f;  // T x 3N
  Index binding_count = 0;
  bool degenerate = false;
  bool rank_deficient = false;
};

/// Exploits the block structure of the binding system: each battery's rows
/// form an independent T x T system.
Sensitivity sensitivity(const VbTheta& theta, const vb::VbResponse& response,
                        const lp::Tolerances& tol);

/// Builds the full binding system of the assembled LP and solves it with
/// solve_square. Slower; used as an independent cross-check.
Sensitivity assembled_sensitivity(const VbTheta& theta, const TimeSeries& price,
                                  const lp::Tolerances& tol);

struct NewtonStep {
  VbTheta theta_next;
  Matrix f;
  Sensitivity info;
  bool lsq_rank_deficient = false;
};

/// One Gauss-Newton update: linearize at theta_k, solve the least-squares
/// problem for the step (minimum-norm in unidentifiable directions), and
/// project onto the valid parameter set.
NewtonStep newton_step(const VbTheta& theta_k, const TimeSeries& target, const TimeSeries& price,
                       const lp::Tolerances& tol);
NewtonStep newton_step(const VbTheta& theta_k, const vb::VbResponse& response_k,
                       const TimeSeries& target, const lp::Tolerances& tol);

struct Identification {
  VbTheta theta;
  vb::VbResponse response;
  double loss = 0.0;
  NewtonTrace trace;
};

/// Moves one parameter at a time by a few fractions of its scale and returns
/// the best point if it lowers the loss by more than `min_gain`. Inside a
/// critical region the linearization cannot see a better neighbouring region
/// or the other side of a degenerate vertex; a finite move can.
std::optional<VbTheta> probe_neighbourhood(const VbTheta& theta, const Evaluated& current,
                                           const TimeSeries& target, const TimeSeries& price,
                                           double min_gain, const lp::Tolerances& tol);

/// Grid initialization followed by damped Newton iterations. When
/// `warm_start` is given and beats the lattice optimum it is used as the
/// starting point instead. A stalled descent is restarted from
/// probe_neighbourhood up to max_probe_rounds times.
Identification identify_esl(const TimeSeries& target, const TimeSeries& price, Index batteries,
                            const InverseConfig& cfg,
                            const std::optional<VbTheta>& warm_start = std::nullopt);

}  // namespace edci::inverse
