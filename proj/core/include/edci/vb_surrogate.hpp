#pragma once

#include <vector>

#include "edci/core_types.hpp"
#include "edci/lp.hpp"

namespace edci::vb {

/// Inequality-row families of one virtual battery, each T rows long.
enum class RowKind : int { PowerUpper = 0, PowerLower = 1, EnergyUpper = 2, EnergyLower = 3 };

/// The fleet LP at a fixed theta, in the form
///   min (price, 0).(P_esl, P_vb)
///   s.t. P_esl - sum_n P_n = 0
///        A P_esl + B P_vb + C theta <= 0.
/// Variables are ordered (P_esl, P_1, ..., P_N), each of length T.
/// Inequality row of battery n, family k, hour t is n*4T + k*T + t.
struct VbLp {
  lp::LinearProgram lp;
  Matrix a;  // 4NT x T (identically zero: P_esl only enters the coupling rows)
  Matrix b;  // 4NT x NT
  Matrix c;  // 4NT x 3N, exactly one nonzero per row
  Index horizon = 0;
  Index batteries = 0;

  static Index row(Index t_len, Index battery, RowKind kind, Index t) {
    return battery * 4 * t_len + static_cast<Index>(kind) * t_len + t;
  }
};

VbLp assemble_lp(const VbTheta& theta, const TimeSeries& price);

/// Unit lower-triangular cumulative-sum operator of size T.
Matrix cumulative_operator(Index t);

struct VbResponse {
  TimeSeries esl_total;
  Matrix per_battery;  // N x T
  /// Binding inequality rows of the assembled LP (VbLp row numbering).
  std::vector<Index> binding_ineq;
  bool degenerate = false;
  double objective = 0.0;

  /// Assembled decision vector (P_esl, P_1, ..., P_N).
  Vector stacked() const;
};

/// Optimal fleet response to `price`. The fleet LP separates by battery, so
/// each battery is solved as its own bounded LP and the results summed; the
/// optimum coincides with that of the assembled LP.
VbResponse vb_response(const VbTheta& theta, const TimeSeries& price, const lp::Tolerances& tol = {});

/// Optimal trajectory of a single battery (length T).
Vector battery_response(const VirtualBattery& battery, const Vector& price, const Matrix& cumsum,
                        const lp::Tolerances& tol);

/// Binding inequality rows of one battery, numbered 4T-locally.
std::vector<Index> battery_binding_rows(const VirtualBattery& battery, const Vector& trajectory,
                                        double tol_bind);

}  // namespace edci::vb
