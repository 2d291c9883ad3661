#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "edci/core_types.hpp"
#include "edci/edci_solver.hpp"

namespace edci::metrics {

/// 100 * RMSE(estimated - actual) / max|actual|, in percent. Throws
/// DimensionError on empty or mismatched input and DomainError when
/// max|actual| is zero.
double nrmse(const Vector& actual, const Vector& estimated);

enum class Split { Train, Test };
enum class Component { TL, PL, ESL, PV, TCL };

inline constexpr std::array<Component, 5> kComponents{Component::TL, Component::PL, Component::ESL,
                                                      Component::PV, Component::TCL};

std::string_view split_name(Split split);
Split parse_split(std::string_view text);
/// Lower-case column name: tl, pl, esl, pv, tcl.
std::string_view component_name(Component component);

struct ComponentScores {
  int window_id = 0;
  Split split = Split::Train;
  /// Empty where no reference exists: no truth supplied, or the true
  /// component is identically zero.
  std::array<std::optional<double>, 5> nrmse;

  std::optional<double>& operator[](Component c) { return nrmse[static_cast<std::size_t>(c)]; }
  const std::optional<double>& operator[](Component c) const { return nrmse[static_cast<std::size_t>(c)]; }
};

/// TL is scored as estimate.total() against `measured_total`; the other
/// components against `truth` when given.
ComponentScores score_decomposition(const Decomposition& estimate, const Vector& measured_total,
                                    const Decomposition* truth, Split split, int window_id);

/// Train: the identified decomposition against `data`. Test: predict() on
/// the exogenous part of `data`, then scored the same way. `truth` must be
/// aligned with `data`.
ComponentScores score_run(const EdciResult& result, const ScenarioData& data, const Decomposition* truth,
                          Split split, int window_id);

/// Per-component mean over the windows of one split. Components missing in
/// every window stay empty.
ComponentScores mean_scores(const std::vector<ComponentScores>& scores, Split split);

struct WindowReport {
  int window_id = 0;
  EdciResult result;
  Vector measured;  // training total load
  std::vector<ComponentScores> scores;
};

/// Writes into `out_dir`:
///   scores.csv            window_id,split,tl,pl,esl,pv,tcl (one row per window and split)
///   scores_mean.csv       split,tl,pl,esl,pv,tcl
///   trajectory_w<id>.csv  t,measured,fit,esl,pv,tcl,pl over the training window
///   convergence_w<id>.csv one row per outer iteration
///   inner_w<id>.csv       one row per inner-loop record, all outer iterations
///   params_w<id>.json     the identified model
/// plus an SVG line plot next to each per-window CSV.
void emit_bundle(const std::vector<WindowReport>& reports, const std::filesystem::path& out_dir);

/// Reads a scores.csv back.
std::vector<ComponentScores> read_scores(const std::filesystem::path& path);

/// Minimal SVG line chart, one polyline per column of `ys`.
std::string svg_line_plot(std::string_view title, const Vector& x, const Matrix& ys,
                          const std::vector<std::string>& labels);

}  // namespace edci::metrics
