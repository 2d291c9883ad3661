#include "edci/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edci {

std::string_view unit_name(Unit unit) {
  switch (unit) {
    case Unit::MW:
      return "MW";
    case Unit::PricePerMWh:
      return "$/MWh";
    case Unit::WattPerSquareMeter:
      return "W/m2";
    case Unit::Celsius:
      return "degC";
    case Unit::Dimensionless:
      return "1";
  }
  return "?";
}

TimeSeries::TimeSeries(Vector values, Unit unit, int period)
    : values_(std::move(values)), unit_(unit), period_(period) {
  if (period_ <= 0) throw DimensionError("time series period must be positive");
  if (values_.size() < 1) throw DimensionError("time series must have at least one sample");
  for (Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw DataError("non-finite value at index " + std::to_string(i));
  }
}

Index TimeSeries::days() const {
  if (!whole_days())
    throw DimensionError("length " + std::to_string(size()) + " is not a multiple of period " +
                         std::to_string(period_));
  return size() / period_;
}

TimeSeries TimeSeries::slice_days(Index first_day, Index count) const {
  const Index total = days();
  if (first_day < 0 || count < 1 || first_day + count > total)
    throw DimensionError("day slice out of range");
  return {values_.segment(first_day * period_, count * period_), unit_, period_};
}

namespace {

void require_aligned(const TimeSeries& ref, const TimeSeries& other, const char* name) {
  if (other.size() != ref.size() || other.period() != ref.period())
    throw DimensionError(std::string("series '") + name + "' does not match length/period");
}

}  // namespace

ScenarioData::ScenarioData(TimeSeries price_, TimeSeries irradiance_, TimeSeries temperature_,
                           TimeSeries total_load_)
    : price(std::move(price_)),
      irradiance(std::move(irradiance_)),
      temperature(std::move(temperature_)),
      total_load(std::move(total_load_)) {
  require_aligned(total_load, price, "price");
  require_aligned(total_load, irradiance, "irradiance");
  require_aligned(total_load, temperature, "temperature");
}

ScenarioData ScenarioData::slice_days(Index first_day, Index count) const {
  return {price.slice_days(first_day, count), irradiance.slice_days(first_day, count),
          temperature.slice_days(first_day, count), total_load.slice_days(first_day, count)};
}

Exogenous::Exogenous(TimeSeries price_, TimeSeries irradiance_, TimeSeries temperature_)
    : price(std::move(price_)),
      irradiance(std::move(irradiance_)),
      temperature(std::move(temperature_)) {
  require_aligned(price, irradiance, "irradiance");
  require_aligned(price, temperature, "temperature");
}

VbTheta VbTheta::from_flat(const Vector& flat) {
  if (flat.size() % 3 != 0) throw DimensionError("theta length must be a multiple of 3");
  std::vector<VirtualBattery> b(static_cast<std::size_t>(flat.size() / 3));
  for (std::size_t n = 0; n < b.size(); ++n) {
    const auto k = static_cast<Index>(3 * n);
    b[n] = {flat[k], flat[k + 1], flat[k + 2]};
  }
  return VbTheta(std::move(b));
}

Vector VbTheta::flat() const {
  Vector v(dim());
  for (Index n = 0; n < num_batteries(); ++n) {
    v[3 * n] = batteries_[n].p_bar;
    v[3 * n + 1] = batteries_[n].e_bar;
    v[3 * n + 2] = batteries_[n].e_lower;
  }
  return v;
}

bool VbTheta::valid() const {
  for (const auto& b : batteries_) {
    if (!(b.p_bar >= 0.0 && b.e_bar >= 0.0 && b.e_lower <= 0.0)) return false;
  }
  return true;
}

VbTheta VbTheta::projected() const {
  auto b = batteries_;
  for (auto& x : b) {
    x.p_bar = std::max(x.p_bar, 0.0);
    x.e_bar = std::max(x.e_bar, 0.0);
    x.e_lower = std::min(x.e_lower, 0.0);
  }
  return VbTheta(std::move(b));
}

Vector Decomposition::total() const {
  return esl.values() + pv.values() + tcl.values() + pl.values();
}

Decomposition Decomposition::slice_days(Index first_day, Index count) const {
  return {esl.slice_days(first_day, count), pv.slice_days(first_day, count),
          tcl.slice_days(first_day, count), pl.slice_days(first_day, count),
          lambda_pv, lambda_tcl, theta};
}

Vector daily_cumulant(const Vector& values, int period) {
  if (period <= 0 || values.size() % period != 0)
    throw DimensionError("length " + std::to_string(values.size()) +
                         " is not a multiple of period " + std::to_string(period));
  const Index days = values.size() / period;
  Vector out(days);
  for (Index m = 0; m < days; ++m) out[m] = values.segment(m * period, period).sum();
  return out;
}

Vector daily_cumulant(const TimeSeries& series) {
  return daily_cumulant(series.values(), series.period());
}

TimeSeries periodic_extend(const Vector& day_profile, Index length, Unit unit) {
  const Index d = day_profile.size();
  if (d < 1 || length < 1 || length % d != 0)
    throw DimensionError("target length " + std::to_string(length) +
                         " is not a multiple of the profile length " + std::to_string(d));
  Vector out(length);
  for (Index k = 0; k < length / d; ++k) out.segment(k * d, d) = day_profile;
  return {std::move(out), unit, static_cast<int>(d)};
}

Vector day_mean_profile(const Vector& values, int period) {
  if (period <= 0 || values.size() % period != 0 || values.size() == 0)
    throw DimensionError("length is not a positive multiple of the period");
  const Index days = values.size() / period;
  Vector profile = Vector::Zero(period);
  for (Index m = 0; m < days; ++m) profile += values.segment(m * period, period);
  return profile / static_cast<double>(days);
}

}  // namespace edci
