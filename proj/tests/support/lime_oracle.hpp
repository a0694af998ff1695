#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace testing {

// Weighted ridge with an unpenalized intercept, solved from the augmented
// normal equations by Gaussian elimination. Returns {intercept, coefficients}.
inline std::pair<double, std::vector<double>> ridge_oracle(const std::vector<std::vector<double>>& x,
                                                           const std::vector<double>& y, const std::vector<double>& w,
                                                           double lambda) {
  const std::size_t k = x.front().size(), m = k + 1;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t s = 0; s < x.size(); ++s) {
    std::vector<double> row{1.0};
    row.insert(row.end(), x[s].begin(), x[s].end());
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) a[i][j] += w[s] * row[i] * row[j];
      a[i][m] += w[s] * row[i] * y[s];
    }
  }
  for (std::size_t i = 1; i < m; ++i) a[i][i] += lambda;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= m; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> beta(k);
  for (std::size_t i = 0; i < k; ++i) beta[i] = a[i + 1][m] / a[i + 1][i + 1];
  return {a[0][m] / a[0][0], beta};
}

}  // namespace testing
