#include "edci_cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "edci/edci_solver.hpp"
#include "edci/io_ingest.hpp"
#include "edci/metrics_report.hpp"
#include "edci/synth_bench.hpp"

namespace edci::cli {

namespace fs = std::filesystem;

namespace {

// Wrong flags or a config that lacks what the subcommand needs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Data {
  ScenarioData scenario;
  std::optional<Decomposition> truth;
};

io::RunConfig read_config(const std::string& path) {
  return path.empty() ? io::RunConfig{} : io::load_config(path);
}

Data read_data_dir(const fs::path& dir, const io::RunConfig& cfg) {
  if (!fs::is_directory(dir)) throw IoError("cannot read data directory " + dir.string());
  const auto files = io::DataFiles::in_dir(dir);
  Data d{io::load_scenario(files, cfg.period, cfg.temperature_unit), std::nullopt};
  if (files.truth) d.truth = io::read_truth_csv(*files.truth, cfg.period);
  return d;
}

bench::GroundTruth generate_truth(const io::RunConfig& cfg) {
  if (!cfg.bench) throw UsageError("config has no \"bench\" section to generate from");
  auto exo_spec = cfg.bench_exogenous;
  exo_spec.period = cfg.period;
  return bench::generate(*cfg.bench, bench::synthesize_exogenous(exo_spec));
}

// --data-dir first, then the config's data files, then a generated bench.
Data resolve_data(const std::string& data_dir, const io::RunConfig& cfg, std::ostream& err) {
  if (!data_dir.empty()) return read_data_dir(data_dir, cfg);
  if (cfg.data) {
    Data d{io::load_scenario(cfg), std::nullopt};
    if (cfg.data->truth) d.truth = io::read_truth_csv(*cfg.data->truth, cfg.period);
    return d;
  }
  if (cfg.bench) {
    err << "no data given; generating the configured bench (seed " << cfg.bench->seed << ")\n";
    auto truth = generate_truth(cfg);
    return {std::move(truth.scenario), std::move(truth.components)};
  }
  throw UsageError("no data: pass --data-dir or configure \"data\" or \"bench\"");
}

void write_config(const fs::path& out, const io::RunConfig& cfg) {
  fs::create_directories(out);
  io::write_text(out / "config.json", io::config_to_json(cfg));
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "     -";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << std::setw(6) << *v;
  return s.str();
}

void print_scores(std::ostream& out, const metrics::ComponentScores& train,
                  const std::optional<metrics::ComponentScores>& test) {
  out << "component  train%" << (test ? "   test%" : "") << "\n";
  for (auto c : metrics::kComponents) {
    out << std::left << std::setw(9) << metrics::component_name(c) << std::right << "  " << percent(train[c]);
    if (test) out << "  " << percent((*test)[c]);
    out << "\n";
  }
}

metrics::WindowReport identify_window(int id, const ScenarioData& train, const std::optional<ScenarioData>& test,
                                      const Decomposition* train_truth, const Decomposition* test_truth,
                                      const io::RunConfig& cfg) {
  metrics::WindowReport rep{id, run_edci(train, cfg.edci), train.total_load.values(), {}};
  rep.scores.push_back(metrics::score_run(rep.result, train, train_truth, metrics::Split::Train, id));
  if (test) rep.scores.push_back(metrics::score_run(rep.result, *test, test_truth, metrics::Split::Test, id));
  return rep;
}

std::vector<metrics::WindowReport> evaluate_windows(const Data& data, const io::RunConfig& cfg, std::ostream& err) {
  const auto ws = bench::windows(data.scenario, cfg.train_days, cfg.test_days);
  std::vector<metrics::WindowReport> reports;
  for (const auto& w : ws) {
    const auto start = std::chrono::steady_clock::now();
    std::optional<Decomposition> tr, te;
    if (data.truth) {
      tr = data.truth->slice_days(w.first_day, cfg.train_days);
      te = data.truth->slice_days(w.first_day + cfg.train_days, cfg.test_days);
    }
    reports.push_back(identify_window(static_cast<int>(w.index), w.train, w.test, tr ? &*tr : nullptr,
                                      te ? &*te : nullptr, cfg));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "window " << w.index + 1 << "/" << ws.size() << " done in " << std::fixed << std::setprecision(1)
        << secs << " s\n";
  }
  return reports;
}

std::pair<metrics::ComponentScores, metrics::ComponentScores> means(
    const std::vector<metrics::WindowReport>& reports) {
  std::vector<metrics::ComponentScores> train, test;
  for (const auto& r : reports) {
    for (const auto& s : r.scores) (s.split == metrics::Split::Train ? train : test).push_back(s);
  }
  return {metrics::mean_scores(train, metrics::Split::Train), metrics::mean_scores(test, metrics::Split::Test)};
}

int parse_int(std::string_view text, const std::string& what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) throw UsageError("bad " + what + " '" + std::string(text) + "'");
  return v;
}

// "N=a..b" or "N=a".
std::pair<int, int> parse_range(const std::string& spec) {
  if (!spec.starts_with("N=")) throw UsageError("--param must look like N=1..8");
  const std::string_view body = std::string_view(spec).substr(2);
  const auto dots = body.find("..");
  const int lo = parse_int(body.substr(0, dots), "range start");
  const int hi = dots == std::string_view::npos ? lo : parse_int(body.substr(dots + 2), "range end");
  if (lo < 1 || hi < lo) throw UsageError("invalid range '" + spec + "': need 1 <= start <= end");
  return {lo, hi};
}

struct Options {
  std::string config, out, data_dir, params_file, exogenous_dir, param = "N=1..8";
};

int cmd_generate(const Options& o, std::ostream& out) {
  const auto cfg = read_config(o.config);
  const auto truth = generate_truth(cfg);
  bench::export_csv(truth, o.out);
  write_config(o.out, cfg);
  out << "seed " << cfg.bench->seed << ": " << cfg.bench->n_devices << " devices, " << truth.scenario.days()
      << " days of " << cfg.period << " samples, exogenous seed " << cfg.bench_exogenous.seed << "\n";
  return 0;
}

int cmd_identify(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = read_config(o.config);
  const Data data = resolve_data(o.data_dir, cfg, err);
  if (data.scenario.days() < cfg.train_days)
    throw DimensionError("insufficient days: identification needs " + std::to_string(cfg.train_days) +
                         ", data has " + std::to_string(data.scenario.days()));
  const auto train = data.scenario.slice_days(0, cfg.train_days);
  std::optional<Decomposition> tr;
  if (data.truth) tr = data.truth->slice_days(0, cfg.train_days);
  const auto rep = identify_window(0, train, std::nullopt, tr ? &*tr : nullptr, nullptr, cfg);
  metrics::emit_bundle({rep}, o.out);
  write_config(o.out, cfg);
  out << "outer iterations " << rep.result.outer_trace.size() << (rep.result.converged ? " (converged)" : "")
      << "\n";
  print_scores(out, rep.scores.front(), std::nullopt);
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto cfg = read_config(o.config);
  if (!fs::is_directory(o.exogenous_dir)) throw IoError("cannot read exogenous directory " + o.exogenous_dir);
  const auto model = io::read_model(o.params_file);
  const auto exo = io::load_exogenous(io::DataFiles::in_dir(o.exogenous_dir), cfg.period, cfg.temperature_unit);
  const auto pred = predict(model, exo);
  fs::create_directories(o.out);
  io::write_truth_csv(fs::path(o.out) / "prediction.csv", pred);
  write_config(o.out, cfg);
  out << "predicted " << exo.size() << " samples\n";
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = read_config(o.config);
  const Data data = resolve_data(o.data_dir, cfg, err);
  const auto reports = evaluate_windows(data, cfg, err);
  metrics::emit_bundle(reports, o.out);
  write_config(o.out, cfg);
  const auto [train, test] = means(reports);
  out << reports.size() << " windows, mean NRMSE\n";
  print_scores(out, train, test);
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto [lo, hi] = parse_range(o.param);
  auto cfg = read_config(o.config);
  const Data data = resolve_data(o.data_dir, cfg, err);
  std::string table = "n_batteries";
  for (auto split : {metrics::Split::Train, metrics::Split::Test})
    for (auto c : metrics::kComponents)
      table += "," + std::string(metrics::split_name(split)) + "_" + std::string(metrics::component_name(c));
  table += "\n";
  out << "N   train_tl%  test_tl%\n";
  for (int n = lo; n <= hi; ++n) {
    cfg.edci.n_batteries = n;
    err << "N = " << n << "\n";
    const auto reports = evaluate_windows(data, cfg, err);
    metrics::emit_bundle(reports, fs::path(o.out) / ("n" + std::to_string(n)));
    const auto [train, test] = means(reports);
    table += std::to_string(n);
    for (const auto* s : {&train, &test})
      for (auto c : metrics::kComponents) table += "," + ((*s)[c] ? io::format_number(*(*s)[c]) : std::string());
    table += "\n";
    out << std::left << std::setw(3) << n << std::right << " " << percent(train[metrics::Component::TL]) << "    "
        << percent(test[metrics::Component::TL]) << "\n";
  }
  cfg.edci.n_batteries = lo;
  write_config(o.out, cfg);
  io::write_text(fs::path(o.out) / "sweep.csv", table);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Environment-dependent component identification of total load"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "Write a synthetic scenario and its true components");
  gen->add_option("--config", o.config, "JSON run config with a bench section")->required();
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* ident = app.add_subcommand("identify", "Identify components on the training days");
  ident->add_option("--config", o.config, "JSON run config");
  ident->add_option("--data-dir", o.data_dir, "Directory with price/irradiance/temperature/total_load CSVs");
  ident->add_option("--out", o.out, "Result bundle directory")->required();

  auto* pred = app.add_subcommand("predict", "Apply an identified model to new exogenous data");
  pred->add_option("--config", o.config, "JSON run config (period, temperature unit)");
  pred->add_option("--params-file", o.params_file, "params_w<id>.json from a bundle")->required();
  pred->add_option("--exogenous-dir", o.exogenous_dir, "Directory with price/irradiance/temperature CSVs")
      ->required();
  pred->add_option("--out", o.out, "Output directory")->required();

  auto* eval = app.add_subcommand("evaluate", "Rolling-window identification and scoring");
  eval->add_option("--config", o.config, "JSON run config");
  eval->add_option("--data-dir", o.data_dir, "Data directory");
  eval->add_option("--out", o.out, "Result bundle directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Repeat evaluate over a range of battery counts");
  sweep->add_option("--config", o.config, "JSON run config");
  sweep->add_option("--data-dir", o.data_dir, "Data directory");
  sweep->add_option("--param", o.param, "Battery count range, e.g. N=1..8")->capture_default_str();
  sweep->add_option("--out", o.out, "Output directory")->required();

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (ident->parsed()) return cmd_identify(o, out, err);
    if (pred->parsed()) return cmd_predict(o, out);
    if (eval->parsed()) return cmd_evaluate(o, out, err);
    return cmd_sweep(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace edci::cli
