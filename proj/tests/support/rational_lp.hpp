#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lddflow::testing {

using Rational = boost::multiprecision::cpp_rational;

/// Exact two-phase simplex with Bland's rule for
///   min c^T x  subject to  A x = b,  x >= 0.
/// Rows of A must be linearly independent. Returns the optimal value, or
/// nothing when infeasible. Unbounded problems are not supported.
inline std::optional<Rational> solve_standard_lp(std::vector<std::vector<Rational>> A,
                                                 std::vector<Rational> b,
                                                 const std::vector<Rational> &c) {
  const std::size_t rows = A.size(), cols = c.size();
  for (std::size_t i = 0; i < rows; ++i) {
    if (b[i] < 0) {
      for (auto &a : A[i]) a = -a;
      b[i] = -b[i];
    }
  }
  // Tableau columns: original, artificial, rhs.
  const std::size_t total = cols + rows;
  std::vector<std::vector<Rational>> T(rows, std::vector<Rational>(total + 1));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) T[i][j] = A[i][j];
    T[i][cols + i] = 1;
    T[i][total] = b[i];
    basis[i] = cols + i;
  }

  auto pivot = [&](std::size_t r, std::size_t col) {
    const Rational p = T[r][col];
    for (auto &v : T[r]) v /= p;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || T[i][col] == 0) continue;
      const Rational f = T[i][col];
      for (std::size_t j = 0; j <= total; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };

  auto optimize = [&](const std::vector<Rational> &cost, std::size_t allowed) {
    while (true) {
      std::size_t enter = total;
      for (std::size_t j = 0; j < allowed && enter == total; ++j) {
        Rational reduced = cost[j];
        for (std::size_t i = 0; i < rows; ++i) reduced -= cost[basis[i]] * T[i][j];
        if (reduced < 0) enter = j;
      }
      if (enter == total) return;
      std::size_t leave = rows;
      Rational best;
      for (std::size_t i = 0; i < rows; ++i) {
        if (T[i][enter] <= 0) continue;
        const Rational ratio = T[i][total] / T[i][enter];
        if (leave == rows || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == rows) throw std::runtime_error("unbounded LP");
      pivot(leave, enter);
    }
  };

  std::vector<Rational> phase1(total, 0);
  for (std::size_t j = cols; j < total; ++j) phase1[j] = 1;
  optimize(phase1, total);
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] >= cols && T[i][total] != 0) return std::nullopt;
  // Drive remaining artificials out of the basis.
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < cols) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      if (T[i][j] != 0) {
        pivot(i, j);
        break;
      }
    }
  }
  std::vector<Rational> phase2(total, 0);
  for (std::size_t j = 0; j < cols; ++j) phase2[j] = c[j];
  optimize(phase2, cols);
  Rational value = 0;
  for (std::size_t i = 0; i < rows; ++i) value += phase2[basis[i]] * T[i][total];
  return value;
}

} // namespace lddflow::testing
