#include "edci/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace edci::linalg {

namespace {

// Number of diagonal entries of a pivoted R factor above `threshold`.
template <typename Qr>
Index count_rank(const Qr& qr, double threshold) {
  const auto& r = qr.matrixR();
  const Index k = std::min(r.rows(), r.cols());
  Index rank = 0;
  for (Index i = 0; i < k; ++i) {
    if (std::abs(r(i, i)) > threshold) ++rank;
  }
  return rank;
}

}  // namespace

Solved<Matrix> solve_square(const Matrix& m, const Matrix& rhs, double tol_rank) {
  if (m.rows() != m.cols()) throw DimensionError("solve_square: matrix is not square");
  if (rhs.rows() != m.rows()) throw DimensionError("solve_square: rhs row count mismatch");
  const Index n = m.rows();
  if (n == 0) return {Matrix(0, rhs.cols()), false, 0};

  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(tol_rank);
  const Index rank = qr.rank();
  if (rank == n) return {qr.solve(rhs), false, rank};

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  cod.setThreshold(tol_rank);
  return {cod.solve(rhs), true, cod.rank()};
}

Solved<Vector> least_squares(const Matrix& f, const Vector& r, double tol_rank) {
  if (f.rows() != r.size()) throw DimensionError("least_squares: row count mismatch");
  if (f.cols() == 0) return {Vector(0), false, 0};
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(f);
  cod.setThreshold(tol_rank);
  const Index rank = cod.rank();
  return {cod.solve(r), rank < f.cols(), rank};
}

std::vector<Index> independent_rows(const Matrix& rows, const std::vector<Index>& forced,
                                    const std::vector<Index>& candidates, double tol_rank) {
  const Index n = rows.cols();
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(n));

  double scale = 1.0;
  for (Index i = 0; i < rows.rows(); ++i) scale = std::max(scale, rows.row(i).norm());
  const double threshold = tol_rank * scale;

  Matrix basis(n, 0);
  if (!forced.empty()) {
    Matrix ft(n, static_cast<Index>(forced.size()));
    for (std::size_t k = 0; k < forced.size(); ++k) ft.col(static_cast<Index>(k)) = rows.row(forced[k]).transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(ft);
    const Index rank = count_rank(qr, threshold);
    std::vector<Index> picked;
    for (Index k = 0; k < rank; ++k) picked.push_back(forced[static_cast<std::size_t>(qr.colsPermutation().indices()[k])]);
    std::sort(picked.begin(), picked.end());
    chosen = picked;
    Matrix q = qr.householderQ();
    basis = q.leftCols(rank);
  }

  const Index room = n - static_cast<Index>(chosen.size());
  if (room <= 0 || candidates.empty()) return chosen;

  Matrix ct(n, static_cast<Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) ct.col(static_cast<Index>(k)) = rows.row(candidates[k]).transpose();
  if (basis.cols() > 0) ct -= basis * (basis.transpose() * ct);

  Eigen::ColPivHouseholderQR<Matrix> qr(ct);
  const Index rank = std::min(count_rank(qr, threshold), room);
  for (Index k = 0; k < rank; ++k)
    chosen.push_back(candidates[static_cast<std::size_t>(qr.colsPermutation().indices()[k])]);
  return chosen;
}

}  // namespace edci::linalg
