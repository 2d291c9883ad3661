#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edci/core_types.hpp"
#include "edci/edci_solver.hpp"
#include "edci/synth_bench.hpp"

namespace edci::io {

/// 2022-07-01T00:00:00, the first timestamp of exported series.
inline constexpr std::int64_t kDefaultStart = 1656633600;

/// Seconds since the Unix epoch for "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may
/// replace the T). No time zone arithmetic is done. Throws DataError.
std::int64_t parse_timestamp(std::string_view text);
/// "YYYY-MM-DDTHH:MM:SS".
std::string format_timestamp(std::int64_t epoch_seconds);

/// Round-trip-safe decimal text for a double.
std::string format_number(double value);

struct CsvSeries {
  std::vector<std::int64_t> timestamps;
  Vector values;
};

/// Reads a two-column `timestamp,value` file with a header row. Timestamps
/// must be strictly increasing with spacing 86400 / period seconds.
CsvSeries read_series_csv(const std::filesystem::path& path, int period);
void write_series_csv(const std::filesystem::path& path, const TimeSeries& series,
                      std::int64_t start = kDefaultStart);

/// `timestamp,esl,pv,tcl,pl,total`.
void write_truth_csv(const std::filesystem::path& path, const Decomposition& truth,
                     std::int64_t start = kDefaultStart);
/// Component series of a truth file. Coefficients and theta are left zero.
Decomposition read_truth_csv(const std::filesystem::path& path, int period);

enum class TemperatureUnit { Celsius, Fahrenheit };

struct DataFiles {
  std::filesystem::path price;
  std::filesystem::path irradiance;
  std::filesystem::path temperature;
  std::filesystem::path total_load;
  std::optional<std::filesystem::path> truth;

  /// The standard file names inside `dir`; truth.csv only if present.
  static DataFiles in_dir(const std::filesystem::path& dir);
};

struct RunConfig {
  std::optional<DataFiles> data;
  int period = 24;
  TemperatureUnit temperature_unit = TemperatureUnit::Celsius;
  EdciConfig edci;
  Index train_days = 6;
  Index test_days = 3;
  std::optional<bench::BenchSpec> bench;
  bench::ExogenousSpec bench_exogenous;

  void validate() const;
};

/// Parses a JSON config. Relative data paths resolve against `base_dir`.
/// Unknown keys and out-of-range values raise ConfigError naming the field.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included, as pretty-printed JSON that
/// parse_config accepts.
std::string config_to_json(const RunConfig& config);

/// Loads the four aligned signals. Fahrenheit temperatures are converted.
ScenarioData load_scenario(const DataFiles& files, int period,
                           TemperatureUnit temperature_unit = TemperatureUnit::Celsius);
ScenarioData load_scenario(const RunConfig& config);
/// Price, irradiance and temperature only.
Exogenous load_exogenous(const DataFiles& files, int period,
                         TemperatureUnit temperature_unit = TemperatureUnit::Celsius);

/// price.csv, irradiance.csv, temperature.csv, total_load.csv in `dir`.
void write_scenario(const std::filesystem::path& dir, const ScenarioData& scenario,
                    std::int64_t start = kDefaultStart);

void write_model(const std::filesystem::path& path, const IdentifiedModel& model);
IdentifiedModel read_model(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace edci::io
