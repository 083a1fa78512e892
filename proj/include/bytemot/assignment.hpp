#pragma once

// Gated optimal bipartite matching between detections (rows) and tracklets
// (columns).
//
// A pair (i, j) is admissible when sim(i, j) >= gate_i. Among all partial
// matchings made of admissible pairs the solver returns one maximizing
//
//     sum over matched (i, j) of  sim(i, j) - gate_i
//
// i.e. every admissible pair is worth its margin over the gate and leaving a
// row or column unmatched is worth zero. The problem splits into independent
// connected components of the admissibility graph; each component is solved
// with the Hungarian method on a rectangular cost matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bytemot/geometry.hpp"

namespace bytemot {

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (row, col), sorted by row
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_tracklets;
};

namespace detail {

// Minimum-cost assignment of every row of an n x m cost matrix (n <= m).
// Returns the column chosen for each row.
inline std::vector<std::size_t> hungarian_rows(std::size_t n, std::size_t m,
                                               std::span<const double> cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Solves the gated assignment with a separate gate per row.
inline Assignment solve_assignment(const SimilarityMatrix& sim, std::span<const double> row_gates) {
  if (row_gates.size() != sim.rows) {
    throw std::invalid_argument("one gate per similarity row is required");
  }
  const std::size_t m = sim.rows;
  const std::size_t n = sim.cols;
  auto admissible = [&](std::size_t i, std::size_t j) {
    const double s = sim(i, j);
    return std::isfinite(s) && s >= row_gates[i];
  };

  // Rows occupy [0, m), columns [m, m + n).
  detail::DisjointSets sets(m + n);
  std::vector<char> row_has_edge(m, 0), col_has_edge(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (admissible(i, j)) {
        sets.unite(i, m + j);
        row_has_edge[i] = col_has_edge[j] = 1;
      }
    }
  }

  std::vector<std::vector<std::size_t>> comp_rows(m + n), comp_cols(m + n);
  for (std::size_t i = 0; i < m; ++i) {
    if (row_has_edge[i]) comp_rows[sets.find(i)].push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_has_edge[j]) comp_cols[sets.find(m + j)].push_back(j);
  }

  std::vector<std::size_t> row_match(m, n);  // n marks unmatched
  std::vector<char> col_matched(n, 0);
  std::vector<double> cost;
  for (std::size_t c = 0; c < m + n; ++c) {
    const auto& rows = comp_rows[c];
    const auto& cols = comp_cols[c];
    if (rows.empty() || cols.empty()) continue;
    if (rows.size() == 1 && cols.size() == 1) {
      row_match[rows[0]] = cols[0];
      col_matched[cols[0]] = 1;
      continue;
    }
    // Admissible pairs cost their negated margin; the rest cost zero, the
    // same as staying unmatched, and are dropped afterwards.
    auto margin = [&](std::size_t i, std::size_t j) {
      return admissible(i, j) ? -(sim(i, j) - row_gates[i]) : 0.0;
    };
    const bool rows_first = rows.size() <= cols.size();
    const std::size_t a = rows_first ? rows.size() : cols.size();
    const std::size_t b = rows_first ? cols.size() : rows.size();
    cost.assign(a * b, 0.0);
    for (std::size_t x = 0; x < a; ++x) {
      for (std::size_t y = 0; y < b; ++y) {
        cost[x * b + y] = rows_first ? margin(rows[x], cols[y]) : margin(rows[y], cols[x]);
      }
    }
    const auto chosen = detail::hungarian_rows(a, b, cost);
    for (std::size_t x = 0; x < a; ++x) {
      const std::size_t i = rows_first ? rows[x] : rows[chosen[x]];
      const std::size_t j = rows_first ? cols[chosen[x]] : cols[x];
      if (admissible(i, j)) {
        row_match[i] = j;
        col_matched[j] = 1;
      }
    }
  }

  Assignment out;
  for (std::size_t i = 0; i < m; ++i) {
    if (row_match[i] < n) {
      out.matches.emplace_back(i, row_match[i]);
    } else {
      out.unmatched_detections.push_back(i);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!col_matched[j]) out.unmatched_tracklets.push_back(j);
  }
  return out;
}

inline Assignment solve_assignment(const SimilarityMatrix& sim, double gate) {
  const std::vector<double> gates(sim.rows, gate);
  return solve_assignment(sim, std::span<const double>(gates));
}

/// Total gate margin of a matching, summed in row order.
inline double assignment_objective(const SimilarityMatrix& sim, std::span<const double> row_gates,
                                   const Assignment& a) {
  double total = 0.0;
  for (const auto& [i, j] : a.matches) total += sim(i, j) - row_gates[i];
  return total;
}

inline double assignment_objective(const SimilarityMatrix& sim, double gate, const Assignment& a) {
  double total = 0.0;
  for (const auto& [i, j] : a.matches) total += sim(i, j) - gate;
  return total;
}

}  // namespace bytemot
