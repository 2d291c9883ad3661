#include "edci/synth_bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "edci/io_ingest.hpp"

namespace edci::bench {

void BenchSpec::validate() const {
  if (n_devices < 1) throw ConfigError("bench.n_devices must be >= 1");
  if (!(device_p_max > 0.0)) throw ConfigError("bench.device_p_max must be > 0");
  if (!(device_e_range.first > 0.0) || device_e_range.first > device_e_range.second)
    throw ConfigError("bench.device_e_range must satisfy 0 < low <= high");
  if (!(pl_noise_std >= 0.0)) throw ConfigError("bench.pl_noise_std must be >= 0");
  if (pl_day_profile.size() < 1) throw ConfigError("bench.pl_day_profile must not be empty");
  if (!std::isfinite(lambda_pv_true) || !std::isfinite(lambda_tcl_true))
    throw ConfigError("bench lambdas must be finite");
  tcl_params.validate();
}

Vector default_pl_profile(int period) {
  Vector p(period);
  for (int i = 0; i < period; ++i) {
    const double h = 24.0 * i / period;
    const double rise = 1.0 / (1.0 + std::exp(-(h - 7.5)));
    const double fall = 1.0 / (1.0 + std::exp(h - 20.5));
    p[i] = 300.0 + 100.0 * rise * fall;
  }
  return p;
}

BenchSpec BenchSpec::heterogeneous_fleet(int period) {
  BenchSpec s;
  s.pl_day_profile = default_pl_profile(period);
  s.pl_noise_std = 8.0;
  return s;
}

BenchSpec BenchSpec::representable(int period) {
  BenchSpec s;
  s.n_devices = 2;
  s.device_p_max = 40.0;
  s.device_e_range = {80.0, 240.0};
  s.pl_day_profile = Vector::Constant(period, 350.0);
  s.pl_noise_std = 0.0;
  s.energy_datum = EnergyDatum::EmptyStart;
  return s;
}

void ExogenousSpec::validate() const {
  if (days < 1) throw ConfigError("bench.exogenous.days must be >= 1");
  if (period < 1) throw ConfigError("period must be >= 1");
}

namespace {

constexpr double kPi = std::numbers::pi;

// Day shape for the single-cycle profile. The hump centre and width move
// from day to day so storage dispatch is not a fixed daily pattern.
struct Hump {
  double height, centre, width;
};

double single_cycle_price(double h, const Hump& hump) {
  // Night runs 20:00 -> 04:00 strictly downhill, then climbs until 08:00.
  if (h >= 20.0 || h < 4.0) {
    const double s = h >= 20.0 ? h - 20.0 : h + 4.0;
    return 30.0 - 2.0 * s - 0.05 * s * s;
  }
  if (h < 8.0) {
    const double s = h - 4.0;
    return 10.8 + 2.5 * s + 0.1 * s * s;
  }
  // The hump never dips below the 20:00 price, so holding energy overnight
  // never pays. A small tilt keeps it free of exact ties.
  const double z = (h - hump.centre) / hump.width;
  return 31.0 + hump.height * std::exp(-0.5 * z * z) + 0.013 * h;
}

struct DayDraw {
  double level, cloud, mean_temp;
  Hump single, peak;
};

// Value at hour `h` of day `m` from per-day parameters that sit at noon,
// linearly interpolated so the series has no jump at midnight.
double noon_interp(const std::vector<DayDraw>& days, Index m, double h, double DayDraw::*field) {
  const auto last = static_cast<Index>(days.size()) - 1;
  const Index other = h < 12.0 ? std::max<Index>(m - 1, 0) : std::min(m + 1, last);
  const double w = std::abs(h - 12.0) / 24.0;
  return (1.0 - w) * days[static_cast<std::size_t>(m)].*field + w * days[static_cast<std::size_t>(other)].*field;
}

// Summer day-ahead shape: a shallow pre-dawn trough and one afternoon or
// evening peak whose hour, width and height change from day to day. Peaks
// and troughs of neighbouring days spill across midnight.
double realistic_price(const std::vector<DayDraw>& days, Index m, double h) {
  double price = 45.0 * noon_interp(days, m, h, &DayDraw::level);
  const auto count = static_cast<Index>(days.size());
  for (Index n = std::max<Index>(m - 1, 0); n <= std::min(m + 1, count - 1); ++n) {
    const double x = h + 24.0 * static_cast<double>(m - n);
    const DayDraw& day = days[static_cast<std::size_t>(n)];
    const double z = (x - day.peak.centre) / day.peak.width;
    price += -12.0 * std::exp(-(x - 4.0) * (x - 4.0) / 8.0) +
             day.level * day.peak.height * std::exp(-0.5 * z * z);
  }
  return price;
}

}  // namespace

Exogenous synthesize_exogenous(const ExogenousSpec& spec) {
  spec.validate();
  const int d = spec.period;
  const Index t = spec.days * d;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<DayDraw> days;
  for (Index m = 0; m < spec.days; ++m) {
    DayDraw day{};
    day.level = 0.8 + 0.5 * unit(rng);
    const double hump = 10.0 + 20.0 * unit(rng);
    day.cloud = 0.4 + 0.6 * unit(rng);
    day.mean_temp = 22.0 + 8.0 * unit(rng);
    day.single = {hump, 10.5 + 6.0 * unit(rng), 1.5 + 2.0 * unit(rng)};
    day.peak = {15.0 + 1.5 * hump, 16.0 + 3.0 * unit(rng), 2.0 + 1.5 * unit(rng)};
    days.push_back(day);
  }

  Vector price(t), irr(t), temp(t);
  for (Index m = 0; m < spec.days; ++m) {
    const DayDraw& day = days[static_cast<std::size_t>(m)];
    for (int i = 0; i < d; ++i) {
      const Index k = m * d + i;
      const double h = 24.0 * i / d;
      if (spec.price_shape == PriceShape::SingleCycle) {
        price[k] = single_cycle_price(h, day.single);
      } else {
        price[k] = realistic_price(days, m, h) + 0.8 * gauss(rng);
      }
      const double sun = h > 5.0 && h < 20.0 ? std::pow(std::sin(kPi * (h - 5.0) / 15.0), 1.5) : 0.0;
      irr[k] = 900.0 * day.cloud * sun * (0.95 + 0.1 * unit(rng));
      temp[k] = noon_interp(days, m, h, &DayDraw::mean_temp) + 5.0 * std::cos(2.0 * kPi * (h - 15.0) / 24.0) +
                0.5 * gauss(rng);
    }
  }
  return {TimeSeries(std::move(price), Unit::PricePerMWh, d),
          TimeSeries(std::move(irr), Unit::WattPerSquareMeter, d),
          TimeSeries(std::move(temp), Unit::Celsius, d)};
}

namespace {

// Device energies come first from the seeded stream, PL noise after them.
std::vector<EslDevice> draw_fleet(const BenchSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> energy(spec.device_e_range.first, spec.device_e_range.second);
  std::vector<EslDevice> devices;
  devices.reserve(static_cast<std::size_t>(spec.n_devices));
  for (Index n = 0; n < spec.n_devices; ++n) {
    const double e = spec.device_e_range.first == spec.device_e_range.second
                         ? spec.device_e_range.first
                         : energy(rng);
    EslDevice dev;
    dev.p_max = spec.device_p_max;
    dev.daily_cyclic = true;
    if (spec.energy_datum == EnergyDatum::Symmetric) {
      dev.e_max = 0.5 * e;
      dev.e_min = -0.5 * e;
    } else {
      dev.e_max = e;
      dev.e_min = 0.0;
    }
    devices.push_back(dev);
  }
  return devices;
}

}  // namespace

std::vector<EslDevice> draw_devices(const BenchSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  return draw_fleet(spec, rng);
}

GroundTruth generate(const BenchSpec& spec, const Exogenous& exo) {
  spec.validate();
  const int d = exo.period();
  const Index t = exo.size();
  if (spec.pl_day_profile.size() != d)
    throw DimensionError("PL day profile has " + std::to_string(spec.pl_day_profile.size()) +
                         " samples but the period is " + std::to_string(d));

  std::mt19937_64 rng(spec.seed);
  auto devices = draw_fleet(spec, rng);

  Vector esl = Vector::Zero(t);
  for (const auto& dev : devices) esl += esl_device_dispatch(dev, exo.price).net.values();

  Vector pl = periodic_extend(spec.pl_day_profile, t).values();
  if (spec.pl_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.pl_noise_std);
    for (Index i = 0; i < t; ++i) pl[i] += noise(rng);
  }

  TimeSeries esl_s(std::move(esl), Unit::MW, d);
  TimeSeries pv_s = pv_response(spec.lambda_pv_true, exo.irradiance);
  TimeSeries tcl_s = tcl_response(spec.lambda_tcl_true, spec.tcl_params, exo.temperature);
  TimeSeries pl_s(std::move(pl), Unit::MW, d);
  Vector total = esl_s.values() + pv_s.values() + tcl_s.values() + pl_s.values();

  Decomposition comps{std::move(esl_s), std::move(pv_s), std::move(tcl_s), std::move(pl_s),
                      spec.lambda_pv_true, spec.lambda_tcl_true, VbTheta{}};
  ScenarioData scenario(exo.price, exo.irradiance, exo.temperature,
                        TimeSeries(std::move(total), Unit::MW, d));
  return {std::move(scenario), std::move(comps), std::move(devices)};
}

std::vector<Window> windows(const ScenarioData& scenario, Index train_days, Index test_days) {
  if (train_days < 1 || test_days < 1) throw ConfigError("train and test days must be >= 1");
  const Index days = scenario.days();
  const Index span = train_days + test_days;
  if (span > days)
    throw DimensionError("insufficient days: windows of " + std::to_string(span) + " days need at least " +
                         std::to_string(span) + ", data has " + std::to_string(days));
  std::vector<Window> out;
  for (Index i = 0; i + span <= days; ++i)
    out.push_back({i, i, scenario.slice_days(i, train_days), scenario.slice_days(i + train_days, test_days)});
  return out;
}

void export_csv(const GroundTruth& truth, const std::filesystem::path& dir) {
  io::write_scenario(dir, truth.scenario);
  io::write_truth_csv(dir / "truth.csv", truth.components);
}

}  // namespace edci::bench
