#pragma once

// Brute-force LP minimum over every basic feasible point:
//   min c.x  s.t.  G x <= h,  E x = f.
// Each candidate vertex is the solution of the equality rows plus a subset
// of n - |E| inequality rows taken as equalities.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "oracles/dense_gauss.hpp"

namespace oracle {

struct LpCase {
  std::vector<double> c;
  Rows g;
  std::vector<double> h;
  Rows e;
  std::vector<double> f;
};

struct VertexMin {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> x;
  std::size_t vertices = 0;  // feasible vertices seen
};

namespace detail {

inline void for_each_subset(std::size_t m, std::size_t k, std::vector<std::size_t>& cur, std::size_t start,
                            const auto& fn) {
  if (cur.size() == k) {
    fn(cur);
    return;
  }
  for (std::size_t i = start; i + (k - cur.size()) <= m; ++i) {
    cur.push_back(i);
    for_each_subset(m, k, cur, i + 1, fn);
    cur.pop_back();
  }
}

}  // namespace detail

inline VertexMin vertex_minimum(const LpCase& lp, double feas_tol = 1e-9) {
  const std::size_t n = lp.c.size();
  const std::size_t me = lp.e.size();
  VertexMin best;
  if (me > n) return best;
  std::vector<std::size_t> cur;
  detail::for_each_subset(lp.g.size(), n - me, cur, 0, [&](const std::vector<std::size_t>& rows) {
    Rows a = lp.e;
    std::vector<double> b = lp.f;
    for (std::size_t r : rows) {
      a.push_back(lp.g[r]);
      b.push_back(lp.h[r]);
    }
    auto x = gauss_solve(a, b, 1e-10);
    if (!x) return;
    for (std::size_t i = 0; i < lp.g.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lp.g[i][j] * (*x)[j];
      if (s > lp.h[i] + feas_tol * std::max(1.0, std::abs(lp.h[i]))) return;
    }
    ++best.vertices;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.c[j] * (*x)[j];
    if (obj < best.objective) {
      best.objective = obj;
      best.x = *x;
    }
  });
  return best;
}

}  // namespace oracle
