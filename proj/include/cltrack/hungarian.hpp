#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace cltrack
{

/// Minimum-cost perfect assignment on a square cost matrix (row-major, n x n),
/// shortest augmenting path with potentials, O(n^3). Returns the column
/// assigned to each row.
inline std::vector<std::size_t> solve_assignment(const std::vector<double> & cost, std::size_t n)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based internals; index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

/// Maximum-weight matching on a rectangular rows x cols similarity matrix where
/// only pairs with `allowed` set may match. Maximizes the number of matched
/// pairs first, then their total similarity. Returns the matched column per row.
inline std::vector<std::optional<std::size_t>> max_weight_matching(
  const std::vector<double> & similarity, const std::vector<bool> & allowed, std::size_t rows,
  std::size_t cols)
{
  const std::size_t n = std::max(rows, cols);
  std::vector<std::optional<std::size_t>> out(rows);
  if (n == 0) {
    return out;
  }
  double max_sim = 0.0;
  for (std::size_t k = 0; k < similarity.size(); ++k) {
    if (allowed[k]) max_sim = std::max(max_sim, similarity[k]);
  }
  // Any allowed pair costs less than one forbidden/padding cell, so the
  // optimum uses as many allowed pairs as possible.
  const double forbidden = (max_sim + 1.0) * static_cast<double>(n + 1);
  std::vector<double> cost(n * n, forbidden);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (allowed[i * cols + j]) {
        cost[i * n + j] = max_sim - similarity[i * cols + j];
      }
    }
  }
  const auto assignment = solve_assignment(cost, n);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t j = assignment[i];
    if (j < cols && allowed[i * cols + j]) {
      out[i] = j;
    }
  }
  return out;
}

}  // namespace cltrack
