#include "edci/metrics_report.hpp"

#include <cmath>
#include <string>

#include "edci/io_ingest.hpp"

namespace edci::metrics {

namespace fs = std::filesystem;

double nrmse(const Vector& actual, const Vector& estimated) {
  if (actual.size() == 0) throw DimensionError("nrmse of an empty series");
  if (actual.size() != estimated.size())
    throw DimensionError("nrmse: lengths differ (" + std::to_string(actual.size()) + " vs " +
                         std::to_string(estimated.size()) + ")");
  const double peak = actual.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw DomainError("nrmse: max|actual| is zero");
  const double rmse = std::sqrt((estimated - actual).squaredNorm() / static_cast<double>(actual.size()));
  return 100.0 * rmse / peak;
}

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  throw DataError("unknown split '" + std::string(text) + "'");
}

std::string_view component_name(Component c) {
  switch (c) {
    case Component::TL:
      return "tl";
    case Component::PL:
      return "pl";
    case Component::ESL:
      return "esl";
    case Component::PV:
      return "pv";
    case Component::TCL:
      return "tcl";
  }
  return "?";
}

namespace {

std::optional<double> score_if_nonzero(const TimeSeries& truth, const TimeSeries& estimate) {
  if (truth.values().cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
  return nrmse(truth.values(), estimate.values());
}

}  // namespace

ComponentScores score_decomposition(const Decomposition& est, const Vector& measured_total,
                                    const Decomposition* truth, Split split, int window_id) {
  ComponentScores s;
  s.window_id = window_id;
  s.split = split;
  s[Component::TL] = nrmse(measured_total, est.total());
  if (truth) {
    if (truth->esl.size() != est.esl.size()) throw DimensionError("truth and estimate lengths differ");
    s[Component::PL] = score_if_nonzero(truth->pl, est.pl);
    s[Component::ESL] = score_if_nonzero(truth->esl, est.esl);
    s[Component::PV] = score_if_nonzero(truth->pv, est.pv);
    s[Component::TCL] = score_if_nonzero(truth->tcl, est.tcl);
  }
  return s;
}

ComponentScores score_run(const EdciResult& result, const ScenarioData& data, const Decomposition* truth,
                          Split split, int window_id) {
  if (split == Split::Train) {
    if (result.decomposition.esl.size() != data.size())
      throw DimensionError("training data does not match the identified horizon");
    return score_decomposition(result.decomposition, data.total_load.values(), truth, split, window_id);
  }
  const Decomposition pred = predict(result, Exogenous::of(data));
  return score_decomposition(pred, data.total_load.values(), truth, split, window_id);
}

ComponentScores mean_scores(const std::vector<ComponentScores>& scores, Split split) {
  ComponentScores out;
  out.window_id = -1;
  out.split = split;
  for (const Component c : kComponents) {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : scores) {
      if (s.split == split && s[c]) {
        sum += *s[c];
        ++n;
      }
    }
    if (n > 0) out[c] = sum / n;
  }
  return out;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? io::format_number(*v) : std::string{}; }

std::string score_row(const ComponentScores& s, bool with_window) {
  std::string row = with_window ? std::to_string(s.window_id) + "," : std::string{};
  row += std::string(split_name(s.split));
  for (const Component c : kComponents) row += "," + cell(s[c]);
  return row + "\n";
}

std::string csv(const std::vector<std::string>& header, const Matrix& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c) out += (c ? "," : "") + io::format_number(rows(r, c));
    out += "\n";
  }
  return out;
}

// Writes `name`.csv and `name`.svg; column 0 is the x axis, `plotted` picks
// the plotted columns.
void write_table(const fs::path& dir, const std::string& name, std::string_view title,
                 const std::vector<std::string>& header, const Matrix& rows, const std::vector<Index>& plotted) {
  io::write_text(dir / (name + ".csv"), csv(header, rows));
  Matrix ys(rows.rows(), static_cast<Index>(plotted.size()));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < plotted.size(); ++i) {
    ys.col(static_cast<Index>(i)) = rows.col(plotted[i]);
    labels.push_back(header[static_cast<std::size_t>(plotted[i])]);
  }
  io::write_text(dir / (name + ".svg"), svg_line_plot(title, rows.col(0), ys, labels));
}

void emit_window(const fs::path& dir, const WindowReport& w) {
  const std::string id = std::to_string(w.window_id);
  const auto& dec = w.result.decomposition;
  const Index t = dec.esl.size();
  if (w.measured.size() != t) throw DimensionError("window " + id + ": measured load length differs");

  Matrix traj(t, 7);
  const Vector fit = dec.total();
  for (Index i = 0; i < t; ++i)
    traj.row(i) << static_cast<double>(i), w.measured[i], fit[i], dec.esl[i], dec.pv[i], dec.tcl[i], dec.pl[i];
  write_table(dir, "trajectory_w" + id, "Components, window " + id,
              {"t", "measured", "fit", "esl", "pv", "tcl", "pl"}, traj, {1, 2, 3, 4, 5, 6});

  const auto& outer = w.result.outer_trace;
  Matrix conv(static_cast<Index>(outer.size()), 8);
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const auto& r = outer[i];
    conv.row(static_cast<Index>(i)) << r.iteration, r.lambda_pv, r.lambda_tcl, r.loss_g, r.loss_o, r.pl_change,
        r.tl_nrmse, r.accepted ? 1.0 : 0.0;
  }
  write_table(dir, "convergence_w" + id, "Outer iterations, window " + id,
              {"iteration", "lambda_pv", "lambda_tcl", "loss_g", "loss_o", "pl_change", "tl_nrmse", "accepted"},
              conv, {6});

  Index n_inner = 0;
  for (const auto& tr : w.result.newton_traces) n_inner += static_cast<Index>(tr.records.size());
  Matrix inner(n_inner, 10);
  Index row = 0;
  for (std::size_t o = 0; o < w.result.newton_traces.size(); ++o) {
    const auto& recs = w.result.newton_traces[o].records;
    for (std::size_t k = 0; k < recs.size(); ++k, ++row) {
      const auto& r = recs[k];
      inner.row(row) << static_cast<double>(row), static_cast<double>(o), static_cast<double>(k), r.loss,
          static_cast<double>(r.binding_count), r.degenerate ? 1.0 : 0.0, r.rank_deficient ? 1.0 : 0.0,
          r.accepted ? 1.0 : 0.0, r.damped ? 1.0 : 0.0, r.probe ? 1.0 : 0.0;
    }
  }
  write_table(dir, "inner_w" + id, "Inner-loop loss, window " + id,
              {"step", "outer", "k", "loss", "binding", "degenerate", "rank_deficient", "accepted", "damped",
               "probe"},
              inner, {3});

  io::write_model(dir / ("params_w" + id + ".json"), model_of(w.result));
}

}  // namespace

void emit_bundle(const std::vector<WindowReport>& reports, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create directory " + out_dir.string());

  std::vector<ComponentScores> all;
  std::string table = "window_id,split,tl,pl,esl,pv,tcl\n";
  for (const auto& w : reports) {
    for (const auto& s : w.scores) {
      table += score_row(s, true);
      all.push_back(s);
    }
  }
  io::write_text(out_dir / "scores.csv", table);

  std::string means = "split,tl,pl,esl,pv,tcl\n";
  for (const Split split : {Split::Train, Split::Test}) {
    bool any = false;
    for (const auto& s : all) any = any || s.split == split;
    if (any) means += score_row(mean_scores(all, split), false);
  }
  io::write_text(out_dir / "scores_mean.csv", means);

  for (const auto& w : reports) emit_window(out_dir, w);
}

std::vector<ComponentScores> read_scores(const fs::path& path) {
  const std::string text = io::read_text(path);
  std::vector<ComponentScores> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "window_id,split,tl,pl,esl,pv,tcl") throw DataError(path.string() + ": unexpected header");
      continue;
    }
    std::vector<std::string> f;
    std::size_t s = 0;
    for (;;) {
      const auto c = line.find(',', s);
      f.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
      if (c == std::string::npos) break;
      s = c + 1;
    }
    if (f.size() != 7) throw DataError(path.string() + ": line " + std::to_string(line_no) + ": expected 7 columns");
    ComponentScores sc;
    try {
      sc.window_id = std::stoi(f[0]);
      sc.split = parse_split(f[1]);
      for (std::size_t i = 0; i < 5; ++i)
        if (!f[i + 2].empty()) sc.nrmse[i] = std::stod(f[i + 2]);
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": malformed number");
    }
    out.push_back(sc);
  }
  return out;
}

std::string svg_line_plot(std::string_view title, const Vector& x, const Matrix& ys,
                          const std::vector<std::string>& labels) {
  constexpr double kW = 720, kH = 360, kLeft = 60, kRight = 130, kTop = 30, kBottom = 30;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  auto esc = [](std::string_view s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  };

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x.size() > 0) {
    x0 = x.minCoeff();
    x1 = x.maxCoeff();
  }
  if (ys.size() > 0) {
    y0 = ys.minCoeff();
    y1 = ys.maxCoeff();
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * ph; };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return std::string(b);
  };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"360\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kLeft) + "\" y=\"18\" font-size=\"13\">" + esc(title) + "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"#888\"/>\n";
  s += "<text x=\"4\" y=\"" + num(kTop + 4) + "\">" + num(y1) + "</text>\n";
  s += "<text x=\"4\" y=\"" + num(kTop + ph) + "\">" + num(y0) + "</text>\n";
  s += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kH - 10) + "\">" + num(x0) + "</text>\n";
  s += "<text x=\"" + num(kLeft + pw - 30) + "\" y=\"" + num(kH - 10) + "\">" + num(x1) + "</text>\n";
  for (Index c = 0; c < ys.cols(); ++c) {
    const char* color = kColors[c % 7];
    s += "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" + std::string(color) + "\" points=\"";
    for (Index i = 0; i < ys.rows(); ++i) s += (i ? " " : "") + num(px(x[i])) + "," + num(py(ys(i, c)));
    s += "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(c + 1);
    const std::string label = static_cast<std::size_t>(c) < labels.size() ? labels[static_cast<std::size_t>(c)] : "";
    s += "<text x=\"" + num(kW - kRight + 10) + "\" y=\"" + num(ly) + "\" fill=\"" + color + "\">" + esc(label) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace edci::metrics
