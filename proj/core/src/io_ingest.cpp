#include "edci/io_ingest.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace edci::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const std::string_view s = trim(text);
  auto fail = [&]() -> std::int64_t { throw DataError("bad timestamp '" + std::string(s) + "'"); };
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
    return fail();
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
      !parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi))
    return fail();
  std::string_view rest = s.substr(16);
  if (!rest.empty() && rest[0] == ':') {
    if (rest.size() < 3 || !parse_int(rest.substr(1, 2), se)) return fail();
    rest.remove_prefix(3);
  }
  if (!(rest.empty() || rest == "Z")) return fail();
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return fail();
  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
  return duration_cast<seconds>(tp.time_since_epoch()).count();
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const auto dp = floor<days>(tp);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{tp - dp};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::int64_t step_seconds(int period) {
  if (period < 1 || 86400 % period != 0)
    throw ConfigError("period: " + std::to_string(period) + " does not divide a day into whole seconds");
  return 86400 / period;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Rows of a CSV with a header. Each row keeps its 1-based line number.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

CsvTable read_table(const fs::path& path) {
  CsvTable t;
  const std::string text = read_text(path);
  std::string_view all = text;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!all.empty()) {
    const auto nl = all.find('\n');
    std::string_view line = all.substr(0, nl);
    all = nl == std::string_view::npos ? std::string_view{} : all.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      for (auto f : fields) t.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " columns, found " + std::to_string(fields.size()));
    t.rows.emplace_back(line_no, std::vector<std::string>(fields.begin(), fields.end()));
  }
  if (!have_header) throw DataError(path.string() + ": missing header row");
  if (t.header.empty() || t.header[0] != "timestamp")
    throw DataError(path.string() + ": line 1, column 1: header must start with 'timestamp'");
  return t;
}

std::vector<std::int64_t> checked_timestamps(const fs::path& path, const CsvTable& t, int period) {
  const std::int64_t step = step_seconds(period);
  std::vector<std::int64_t> ts;
  ts.reserve(t.rows.size());
  for (const auto& [line, fields] : t.rows) {
    std::int64_t v = 0;
    try {
      v = parse_timestamp(fields[0]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": line " + std::to_string(line) + ", column 1: " + e.what());
    }
    if (!ts.empty()) {
      const std::int64_t diff = v - ts.back();
      if (diff > step && diff % step == 0)
        throw DataError(path.string() + ": gap: missing timestamp " + format_timestamp(ts.back() + step) +
                        " (line " + std::to_string(line) + " jumps to " + format_timestamp(v) + ")");
      if (diff != step)
        throw DataError(path.string() + ": line " + std::to_string(line) + ", column 1: timestamp " +
                        format_timestamp(v) + " is not " + std::to_string(step) + " s after the previous one");
    }
    ts.push_back(v);
  }
  return ts;
}

double cell(const fs::path& path, std::size_t line, std::size_t col, std::string_view text) {
  double v = 0.0;
  if (!parse_double(text, v) || !std::isfinite(v))
    throw DataError(path.string() + ": line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                    ": not a finite number: '" + std::string(text) + "'");
  return v;
}

}  // namespace

CsvSeries read_series_csv(const fs::path& path, int period) {
  const CsvTable t = read_table(path);
  if (t.header.size() != 2)
    throw DataError(path.string() + ": line 1: expected header 'timestamp,value'");
  if (t.rows.empty()) throw DataError(path.string() + ": no data rows");
  CsvSeries out;
  out.timestamps = checked_timestamps(path, t, period);
  out.values.resize(static_cast<Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    out.values[static_cast<Index>(i)] = cell(path, t.rows[i].first, 1, t.rows[i].second[1]);
  return out;
}

void write_series_csv(const fs::path& path, const TimeSeries& series, std::int64_t start) {
  const std::int64_t step = step_seconds(series.period());
  std::string s = "timestamp,value\n";
  for (Index i = 0; i < series.size(); ++i)
    s += format_timestamp(start + i * step) + "," + format_number(series[i]) + "\n";
  write_text(path, s);
}

void write_truth_csv(const fs::path& path, const Decomposition& truth, std::int64_t start) {
  const std::int64_t step = step_seconds(truth.esl.period());
  const Vector total = truth.total();
  std::string s = "timestamp,esl,pv,tcl,pl,total\n";
  for (Index i = 0; i < truth.esl.size(); ++i) {
    s += format_timestamp(start + i * step);
    for (double v : {truth.esl[i], truth.pv[i], truth.tcl[i], truth.pl[i], total[i]}) s += "," + format_number(v);
    s += "\n";
  }
  write_text(path, s);
}

Decomposition read_truth_csv(const fs::path& path, int period) {
  const CsvTable t = read_table(path);
  const std::vector<std::string> expected{"timestamp", "esl", "pv", "tcl", "pl", "total"};
  if (t.header != expected) throw DataError(path.string() + ": line 1: expected header timestamp,esl,pv,tcl,pl,total");
  if (t.rows.empty()) throw DataError(path.string() + ": no data rows");
  checked_timestamps(path, t, period);
  const auto n = static_cast<Index>(t.rows.size());
  Matrix cols(n, 4);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 4; ++c)
      cols(i, c) = cell(path, t.rows[static_cast<std::size_t>(i)].first, static_cast<std::size_t>(c + 1),
                        t.rows[static_cast<std::size_t>(i)].second[static_cast<std::size_t>(c + 1)]);
  auto col = [&](Index c) { return TimeSeries(cols.col(c), Unit::MW, period); };
  return {col(0), col(1), col(2), col(3), 0.0, 0.0, VbTheta{}};
}

DataFiles DataFiles::in_dir(const fs::path& dir) {
  DataFiles f{dir / "price.csv", dir / "irradiance.csv", dir / "temperature.csv", dir / "total_load.csv",
              std::nullopt};
  if (fs::exists(dir / "truth.csv")) f.truth = dir / "truth.csv";
  return f;
}

namespace {

struct Loaded {
  fs::path path;
  CsvSeries series;
};

void require_same_grid(const Loaded& ref, const Loaded& other) {
  const auto& a = ref.series.timestamps;
  const auto& b = other.series.timestamps;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i])
      throw DataError("misaligned: " + other.path.string() + " has " + format_timestamp(b[i]) + " where " +
                      ref.path.string() + " has " + format_timestamp(a[i]));
  }
  if (a.size() != b.size()) {
    const auto& longer = a.size() > b.size() ? ref : other;
    throw DataError("misaligned: " + longer.path.string() + " continues past the others at " +
                    format_timestamp(longer.series.timestamps[n]));
  }
}

TimeSeries temperature_series(const Vector& raw, int period, TemperatureUnit unit) {
  Vector v = raw;
  if (unit == TemperatureUnit::Fahrenheit) v = (raw.array() - 32.0) * (5.0 / 9.0);
  return {std::move(v), Unit::Celsius, period};
}

}  // namespace

ScenarioData load_scenario(const DataFiles& files, int period, TemperatureUnit temperature_unit) {
  Loaded load{files.total_load, read_series_csv(files.total_load, period)};
  Loaded price{files.price, read_series_csv(files.price, period)};
  Loaded irr{files.irradiance, read_series_csv(files.irradiance, period)};
  Loaded temp{files.temperature, read_series_csv(files.temperature, period)};
  for (const Loaded* other : {&price, &irr, &temp}) require_same_grid(load, *other);
  return {TimeSeries(price.series.values, Unit::PricePerMWh, period),
          TimeSeries(irr.series.values, Unit::WattPerSquareMeter, period),
          temperature_series(temp.series.values, period, temperature_unit),
          TimeSeries(load.series.values, Unit::MW, period)};
}

ScenarioData load_scenario(const RunConfig& config) {
  if (!config.data) throw ConfigError("data: no data files configured");
  return load_scenario(*config.data, config.period, config.temperature_unit);
}

Exogenous load_exogenous(const DataFiles& files, int period, TemperatureUnit temperature_unit) {
  Loaded price{files.price, read_series_csv(files.price, period)};
  Loaded irr{files.irradiance, read_series_csv(files.irradiance, period)};
  Loaded temp{files.temperature, read_series_csv(files.temperature, period)};
  require_same_grid(price, irr);
  require_same_grid(price, temp);
  return {TimeSeries(price.series.values, Unit::PricePerMWh, period),
          TimeSeries(irr.series.values, Unit::WattPerSquareMeter, period),
          temperature_series(temp.series.values, period, temperature_unit)};
}

void write_scenario(const fs::path& dir, const ScenarioData& scenario, std::int64_t start) {
  write_series_csv(dir / "price.csv", scenario.price, start);
  write_series_csv(dir / "irradiance.csv", scenario.irradiance, start);
  write_series_csv(dir / "temperature.csv", scenario.temperature, start);
  write_series_csv(dir / "total_load.csv", scenario.total_load, start);
}

// ---- JSON config ----

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads fields out of one JSON object, rejecting unknown keys.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? "<root>" : path_) + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw ConfigError(join(path_, k) + ": unknown field");
    }
  }

  const json* find(const char* key) const {
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  std::string path(const char* key) const { return join(path_, key); }

  void number(const char* key, double& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(path(key) + ": must be finite");
    }
  }
  template <typename I>
  void integer(const char* key, I& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
      out = static_cast<I>(v->get<std::int64_t>());
    }
  }
  void boolean(const char* key, bool& out) const {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  std::optional<std::string> string(const char* key) const {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
      return v->get<std::string>();
    }
    return std::nullopt;
  }
  std::optional<Fields> object(const char* key) const {
    if (const json* v = find(key)) return Fields(*v, path(key));
    return std::nullopt;
  }
  std::optional<std::vector<double>> numbers(const char* key) const {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) throw ConfigError(path(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

void read_tcl(const Fields& f, TclParams& p) {
  f.allow({"a", "b", "c", "d", "e", "r", "c_th", "tau_in"});
  f.number("a", p.a);
  f.number("b", p.b);
  f.number("c", p.c);
  f.number("d", p.d);
  f.number("e", p.e);
  f.number("r", p.r);
  f.number("c_th", p.c_th);
  f.number("tau_in", p.tau_in);
}

json tcl_json(const TclParams& p) {
  return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"e", p.e}, {"r", p.r}, {"c_th", p.c_th}, {"tau_in", p.tau_in}};
}

void read_tolerances(const Fields& f, lp::Tolerances& t) {
  f.allow({"feasibility", "binding", "rank"});
  f.number("feasibility", t.feas);
  f.number("binding", t.bind);
  f.number("rank", t.rank);
}

json tolerances_json(const lp::Tolerances& t) {
  return {{"feasibility", t.feas}, {"binding", t.bind}, {"rank", t.rank}};
}

PvSign parse_pv_sign(const std::string& s, const std::string& path) {
  if (s == "consumption_negative") return PvSign::ConsumptionNegative;
  if (s == "generation_positive") return PvSign::GenerationPositive;
  throw ConfigError(path + ": expected 'consumption_negative' or 'generation_positive'");
}

const char* pv_sign_name(PvSign s) {
  return s == PvSign::ConsumptionNegative ? "consumption_negative" : "generation_positive";
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_relative() && !base.empty() ? base / path : path).lexically_normal();
}

// Wraps domain errors raised by nested validate() calls so the field path
// is kept even when the thrower was not a ConfigError.
template <typename F>
void validated(const std::string& path, F&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  step_seconds(period);
  edci.validate();
  if (train_days < 2) throw ConfigError("windows.train_days must be >= 2");
  if (test_days < 1) throw ConfigError("windows.test_days must be >= 1");
  if (bench) {
    bench->validate();
    bench_exogenous.validate();
    if (bench->pl_day_profile.size() != period)
      throw ConfigError("bench.pl_day_profile: length must equal period");
    if (bench_exogenous.period != period) throw ConfigError("bench.exogenous: period differs from the run period");
  }
}

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
  const Fields top(root, "");
  top.allow({"period", "temperature_unit", "data", "edci", "inverse", "tolerances", "tcl", "windows", "bench"});

  RunConfig cfg;
  top.integer("period", cfg.period);
  if (cfg.period < 1) throw ConfigError("period: must be >= 1");
  if (auto u = top.string("temperature_unit")) {
    if (*u == "C" || *u == "celsius") cfg.temperature_unit = TemperatureUnit::Celsius;
    else if (*u == "F" || *u == "fahrenheit") cfg.temperature_unit = TemperatureUnit::Fahrenheit;
    else throw ConfigError("temperature_unit: expected 'C' or 'F'");
  }

  if (auto d = top.object("data")) {
    d->allow({"dir", "price", "irradiance", "temperature", "total_load", "truth"});
    const fs::path dir = resolve(base_dir, d->string("dir").value_or("."));
    DataFiles files = DataFiles::in_dir(dir);
    if (auto p = d->string("price")) files.price = resolve(dir, *p);
    if (auto p = d->string("irradiance")) files.irradiance = resolve(dir, *p);
    if (auto p = d->string("temperature")) files.temperature = resolve(dir, *p);
    if (auto p = d->string("total_load")) files.total_load = resolve(dir, *p);
    if (auto p = d->string("truth")) files.truth = resolve(dir, *p);
    cfg.data = files;
  }

  if (auto e = top.object("edci")) {
    e->allow({"n_batteries", "outer_max", "conv_tol", "warm_start", "pv_sign"});
    e->integer("n_batteries", cfg.edci.n_batteries);
    e->integer("outer_max", cfg.edci.outer_max);
    e->number("conv_tol", cfg.edci.conv_tol);
    e->boolean("warm_start", cfg.edci.warm_start);
    if (auto s = e->string("pv_sign")) cfg.edci.pv_sign = parse_pv_sign(*s, e->path("pv_sign"));
  }
  if (auto in = top.object("inverse")) {
    in->allow({"max_iter", "loss_tol_rel", "grid_points_per_dim", "damping", "max_halvings", "max_probe_rounds"});
    auto& ic = cfg.edci.inverse;
    in->integer("max_iter", ic.max_iter);
    in->number("loss_tol_rel", ic.loss_tol_rel);
    in->integer("grid_points_per_dim", ic.grid_points_per_dim);
    in->boolean("damping", ic.damping_enabled);
    in->integer("max_halvings", ic.max_halvings);
    in->integer("max_probe_rounds", ic.max_probe_rounds);
  }
  if (auto t = top.object("tolerances")) read_tolerances(*t, cfg.edci.inverse.tol);
  if (auto t = top.object("tcl")) read_tcl(*t, cfg.edci.tcl);
  if (auto w = top.object("windows")) {
    w->allow({"train_days", "test_days"});
    w->integer("train_days", cfg.train_days);
    w->integer("test_days", cfg.test_days);
  }

  if (auto b = top.object("bench")) {
    b->allow({"preset", "n_devices", "device_p_max", "device_e_range", "lambda_pv_true", "lambda_tcl_true",
              "pl_day_profile", "pl_noise_std", "seed", "energy_datum", "exogenous"});
    const std::string preset = b->string("preset").value_or("heterogeneous_fleet");
    bench::BenchSpec spec;
    if (preset == "heterogeneous_fleet") {
      spec = bench::BenchSpec::heterogeneous_fleet(cfg.period);
    } else if (preset == "representable") {
      spec = bench::BenchSpec::representable(cfg.period);
      cfg.bench_exogenous.price_shape = bench::PriceShape::SingleCycle;
    } else {
      throw ConfigError("bench.preset: expected 'heterogeneous_fleet' or 'representable'");
    }
    spec.tcl_params = cfg.edci.tcl;
    b->integer("n_devices", spec.n_devices);
    b->number("device_p_max", spec.device_p_max);
    if (auto r = b->numbers("device_e_range")) {
      if (r->size() != 2) throw ConfigError("bench.device_e_range: expected [low, high]");
      spec.device_e_range = {(*r)[0], (*r)[1]};
    }
    b->number("lambda_pv_true", spec.lambda_pv_true);
    b->number("lambda_tcl_true", spec.lambda_tcl_true);
    if (auto p = b->numbers("pl_day_profile")) spec.pl_day_profile = Eigen::Map<const Vector>(p->data(), static_cast<Index>(p->size()));
    b->number("pl_noise_std", spec.pl_noise_std);
    b->integer("seed", spec.seed);
    if (auto d = b->string("energy_datum")) {
      if (*d == "symmetric") spec.energy_datum = bench::EnergyDatum::Symmetric;
      else if (*d == "empty_start") spec.energy_datum = bench::EnergyDatum::EmptyStart;
      else throw ConfigError("bench.energy_datum: expected 'symmetric' or 'empty_start'");
    }
    cfg.bench_exogenous.period = cfg.period;
    if (auto x = b->object("exogenous")) {
      x->allow({"days", "seed", "price_shape"});
      x->integer("days", cfg.bench_exogenous.days);
      x->integer("seed", cfg.bench_exogenous.seed);
      if (auto s = x->string("price_shape")) {
        if (*s == "realistic") cfg.bench_exogenous.price_shape = bench::PriceShape::Realistic;
        else if (*s == "single_cycle") cfg.bench_exogenous.price_shape = bench::PriceShape::SingleCycle;
        else throw ConfigError("bench.exogenous.price_shape: expected 'realistic' or 'single_cycle'");
      }
    }
    cfg.bench = std::move(spec);
  }

  validated("config", [&] { cfg.validate(); });
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path.string());
  return parse_config(read_text(path), path.parent_path());
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["period"] = cfg.period;
  j["temperature_unit"] = cfg.temperature_unit == TemperatureUnit::Celsius ? "C" : "F";
  if (cfg.data) {
    json d{{"price", cfg.data->price.string()},
           {"irradiance", cfg.data->irradiance.string()},
           {"temperature", cfg.data->temperature.string()},
           {"total_load", cfg.data->total_load.string()}};
    if (cfg.data->truth) d["truth"] = cfg.data->truth->string();
    j["data"] = d;
  }
  const auto& e = cfg.edci;
  j["edci"] = {{"n_batteries", e.n_batteries},
               {"outer_max", e.outer_max},
               {"conv_tol", e.conv_tol},
               {"warm_start", e.warm_start},
               {"pv_sign", pv_sign_name(e.pv_sign)}};
  j["inverse"] = {{"max_iter", e.inverse.max_iter},
                  {"loss_tol_rel", e.inverse.loss_tol_rel},
                  {"grid_points_per_dim", e.inverse.grid_points_per_dim},
                  {"damping", e.inverse.damping_enabled},
                  {"max_halvings", e.inverse.max_halvings},
                  {"max_probe_rounds", e.inverse.max_probe_rounds}};
  j["tolerances"] = tolerances_json(e.inverse.tol);
  j["tcl"] = tcl_json(e.tcl);
  j["windows"] = {{"train_days", cfg.train_days}, {"test_days", cfg.test_days}};
  if (cfg.bench) {
    const auto& b = *cfg.bench;
    j["bench"] = {{"n_devices", b.n_devices},
                  {"device_p_max", b.device_p_max},
                  {"device_e_range", {b.device_e_range.first, b.device_e_range.second}},
                  {"lambda_pv_true", b.lambda_pv_true},
                  {"lambda_tcl_true", b.lambda_tcl_true},
                  {"pl_day_profile", std::vector<double>(b.pl_day_profile.begin(), b.pl_day_profile.end())},
                  {"pl_noise_std", b.pl_noise_std},
                  {"seed", b.seed},
                  {"energy_datum", b.energy_datum == bench::EnergyDatum::Symmetric ? "symmetric" : "empty_start"},
                  {"exogenous",
                   {{"days", cfg.bench_exogenous.days},
                    {"seed", cfg.bench_exogenous.seed},
                    {"price_shape", cfg.bench_exogenous.price_shape == bench::PriceShape::Realistic
                                        ? "realistic"
                                        : "single_cycle"}}}};
  }
  return j.dump(2) + "\n";
}

// ---- identified model ----

void write_model(const fs::path& path, const IdentifiedModel& m) {
  json theta = json::array();
  for (const auto& b : m.theta.batteries()) theta.push_back({b.p_bar, b.e_bar, b.e_lower});
  json j{{"theta", theta},
         {"lambda_pv", m.lambda_pv},
         {"lambda_tcl", m.lambda_tcl},
         {"pl_profile", std::vector<double>(m.pl_profile.begin(), m.pl_profile.end())},
         {"tcl", tcl_json(m.tcl)},
         {"pv_sign", pv_sign_name(m.pv_sign)},
         {"tolerances", tolerances_json(m.tol)}};
  write_text(path, j.dump(2) + "\n");
}

IdentifiedModel read_model(const fs::path& path) {
  json root;
  try {
    root = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  const Fields f(root, "");
  f.allow({"theta", "lambda_pv", "lambda_tcl", "pl_profile", "tcl", "pv_sign", "tolerances"});
  IdentifiedModel m;
  const json* theta = f.find("theta");
  if (!theta || !theta->is_array()) throw ConfigError("theta: expected an array of [p_bar, e_bar, e_lower]");
  std::vector<VirtualBattery> bats;
  for (std::size_t i = 0; i < theta->size(); ++i) {
    const json& row = (*theta)[i];
    if (!row.is_array() || row.size() != 3 || !row[0].is_number() || !row[1].is_number() || !row[2].is_number())
      throw ConfigError("theta[" + std::to_string(i) + "]: expected [p_bar, e_bar, e_lower]");
    bats.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
  }
  m.theta = VbTheta(std::move(bats));
  if (!m.theta.valid()) throw ConfigError("theta: violates p_bar >= 0, e_lower <= 0 <= e_bar");
  f.number("lambda_pv", m.lambda_pv);
  f.number("lambda_tcl", m.lambda_tcl);
  auto profile = f.numbers("pl_profile");
  if (!profile || profile->empty()) throw ConfigError("pl_profile: expected a non-empty array");
  m.pl_profile = Eigen::Map<const Vector>(profile->data(), static_cast<Index>(profile->size()));
  if (auto t = f.object("tcl")) read_tcl(*t, m.tcl);
  if (auto s = f.string("pv_sign")) m.pv_sign = parse_pv_sign(*s, "pv_sign");
  if (auto t = f.object("tolerances")) read_tolerances(*t, m.tol);
  validated("tcl", [&] { m.tcl.validate(); });
  return m;
}

}  // namespace edci::io
