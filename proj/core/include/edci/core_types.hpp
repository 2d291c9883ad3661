#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <vector>

#include "edci/errors.hpp"

namespace edci {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class Unit { MW, PricePerMWh, WattPerSquareMeter, Celsius, Dimensionless };

std::string_view unit_name(Unit unit);

/// Uniformly sampled signal. `period` is the number of samples per day.
///
/// Values are validated finite on construction and immutable afterwards.
class TimeSeries {
 public:
  TimeSeries(Vector values, Unit unit, int period);

  const Vector& values() const { return values_; }
  Unit unit() const { return unit_; }
  int period() const { return period_; }
  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

  bool whole_days() const { return values_.size() % period_ == 0; }
  /// Number of complete days. Throws DimensionError if the length is not a
  /// multiple of the period.
  Index days() const;

  /// Sub-series covering days [first_day, first_day + count).
  TimeSeries slice_days(Index first_day, Index count) const;

  TimeSeries with_values(Vector values) const { return {std::move(values), unit_, period_}; }

 private:
  Vector values_;
  Unit unit_;
  int period_;
};

/// Exogenous inputs plus the metered total load. All four series share
/// length and period.
struct ScenarioData {
  TimeSeries price;
  TimeSeries irradiance;
  TimeSeries temperature;
  TimeSeries total_load;

  ScenarioData(TimeSeries price, TimeSeries irradiance, TimeSeries temperature,
               TimeSeries total_load);

  Index size() const { return total_load.size(); }
  int period() const { return total_load.period(); }
  Index days() const { return total_load.days(); }
  ScenarioData slice_days(Index first_day, Index count) const;
};

/// The exogenous part of a scenario, i.e. what prediction needs.
struct Exogenous {
  TimeSeries price;
  TimeSeries irradiance;
  TimeSeries temperature;

  Exogenous(TimeSeries price, TimeSeries irradiance, TimeSeries temperature);
  static Exogenous of(const ScenarioData& scenario) {
    return {scenario.price, scenario.irradiance, scenario.temperature};
  }

  Index size() const { return price.size(); }
  int period() const { return price.period(); }
};

/// Parameters of one virtual battery: power limit and energy window relative
/// to a zero start-of-horizon datum.
struct VirtualBattery {
  double p_bar = 0.0;
  double e_bar = 0.0;
  double e_lower = 0.0;

  friend bool operator==(const VirtualBattery&, const VirtualBattery&) = default;
};

/// Surrogate parameter vector for a fleet of N virtual batteries, flattened as
/// (p_bar_1, e_bar_1, e_lower_1, ..., p_bar_N, e_bar_N, e_lower_N).
class VbTheta {
 public:
  VbTheta() = default;
  explicit VbTheta(std::vector<VirtualBattery> batteries) : batteries_(std::move(batteries)) {}

  static VbTheta from_flat(const Vector& flat);
  static VbTheta zeros(Index n) { return VbTheta(std::vector<VirtualBattery>(n)); }

  Vector flat() const;
  Index num_batteries() const { return static_cast<Index>(batteries_.size()); }
  Index dim() const { return 3 * num_batteries(); }
  const VirtualBattery& battery(Index n) const { return batteries_[n]; }
  const std::vector<VirtualBattery>& batteries() const { return batteries_; }

  /// p_bar >= 0 and e_lower <= 0 <= e_bar for every battery.
  bool valid() const;
  /// Clamp onto the valid set: p_bar, e_bar to >= 0 and e_lower to <= 0.
  VbTheta projected() const;

  friend bool operator==(const VbTheta&, const VbTheta&) = default;

 private:
  std::vector<VirtualBattery> batteries_;
};

/// Four component trajectories and the identified coefficients.
struct Decomposition {
  TimeSeries esl;
  TimeSeries pv;
  TimeSeries tcl;
  TimeSeries pl;
  double lambda_pv = 0.0;
  double lambda_tcl = 0.0;
  VbTheta theta;

  /// esl + pv + tcl + pl.
  Vector total() const;
  Decomposition slice_days(Index first_day, Index count) const;
};

/// Per-day sums of a series. Element m is the sum over day m.
Vector daily_cumulant(const TimeSeries& series);
Vector daily_cumulant(const Vector& values, int period);

/// Tiles a one-day profile over `length` samples.
TimeSeries periodic_extend(const Vector& day_profile, Index length, Unit unit = Unit::MW);

/// Slot-wise mean across days, i.e. the orthogonal projection onto the set of
/// period-D sequences, returned as a single day profile.
Vector day_mean_profile(const Vector& values, int period);

}  // namespace edci
