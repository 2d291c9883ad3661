#pragma once

#include <vector>

#include "edci/core_types.hpp"

namespace edci::linalg {

/// Solution of a square or least-squares system. `rank_deficient` is a flag,
/// not a failure: the minimum-norm least-squares solution is still returned.
template <typename T>
struct Solved {
  T value;
  bool rank_deficient = false;
  Index rank = 0;
};

/// Solves M X = rhs. Falls back to the minimum-norm least-squares solution
/// when M is singular within `tol_rank` (relative to the largest pivot).
Solved<Matrix> solve_square(const Matrix& m, const Matrix& rhs, double tol_rank);

/// argmin ||F theta - r||_2; minimum-norm when F has dependent columns.
Solved<Vector> least_squares(const Matrix& f, const Vector& r, double tol_rank);

/// Picks a maximal linearly independent subset of `candidates` (rows of
/// `rows`), always keeping the rows listed in `forced` first. The remaining
/// rows are chosen by column-pivoted QR after projecting out the span of the
/// forced rows. Returned indices refer to rows of `rows`, forced ones first.
std::vector<Index> independent_rows(const Matrix& rows, const std::vector<Index>& forced,
                                    const std::vector<Index>& candidates, double tol_rank);

}  // namespace edci::linalg
