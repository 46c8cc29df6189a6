#pragma once
// Reference computations used only by tests. Nothing here calls into the
// library's numerical code paths.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>


namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix transpose(const Matrix& a) {
  if (a.empty()) return {};
  Matrix t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

inline std::vector<double> apply(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

/// Gaussian elimination with partial pivoting on a square system. Returns
/// nullopt when a pivot falls below `singular_tol` relative to the row scale.
inline std::optional<std::vector<double>> solve_dense(Matrix a, std::vector<double> b,
                                                      double singular_tol = 1e-10) {
  const std::size_t n = a.size();
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) <= singular_tol * std::max(scale, 1.0)) return std::nullopt;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Least squares via the normal equations, for well-conditioned tall systems.
inline std::optional<std::vector<double>> least_squares(const Matrix& a,
                                                        const std::vector<double>& y) {
  const Matrix at = transpose(a);
  const Matrix ata = multiply(at, a);
  return solve_dense(ata, oracle::apply(at, y));
}

/// Exact rank over GF(p), p = 2^31 - 1. Full rank mod p implies full rank
/// over the rationals.
inline std::size_t rank_mod_prime(std::vector<std::vector<std::int64_t>> a) {
  constexpr std::int64_t p = 2147483647;
  auto pow_mod = [](std::int64_t b, std::int64_t e) {
    std::int64_t r = 1;
    b %= p;
    while (e > 0) {
      if (e & 1) r = static_cast<std::int64_t>((__int128)r * b % p);
      b = static_cast<std::int64_t>((__int128)b * b % p);
      e >>= 1;
    }
    return r;
  };
  for (auto& row : a) {
    for (auto& v : row) v = ((v % p) + p) % p;
  }
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[rank], a[piv]);
    const std::int64_t inv = pow_mod(a[rank][c], p - 2);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || a[r][c] == 0) continue;
      const std::int64_t f = static_cast<std::int64_t>((__int128)a[r][c] * inv % p);
      for (std::size_t j = c; j < cols; ++j) {
        a[r][j] = static_cast<std::int64_t>(((__int128)a[r][j] - (__int128)f * a[rank][j]) % p);
        if (a[r][j] < 0) a[r][j] += p;
      }
    }
    ++rank;
  }
  return rank;
}

/// Sum of absolute first differences, written out independently.
inline double temporal_tv(const std::vector<double>& x) {
  double tv = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) tv += std::fabs(x[k] - x[k - 1]);
  return tv;
}

inline double tv_objective(const Matrix& phi, const std::vector<double>& y,
                           const std::vector<double>& x, double lambda) {
  const auto pred = oracle::apply(phi, x);
  double data = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) data += (y[i] - pred[i]) * (y[i] - pred[i]);
  return 0.5 * data + lambda * temporal_tv(x);
}

/// ADMM for min 1/2 ||y - Phi x||^2 + lambda ||D x||_1 with the split z = D x.
/// x-updates are exact dense solves; used as an independent optimum reference.
inline std::vector<double> admm_tv(const Matrix& phi, const std::vector<double>& y,
                                   double lambda, std::size_t iters = 20000,
                                   double rho = 1.0) {
  const std::size_t k = phi[0].size();
  const std::size_t d = k - 1;
  Matrix lhs = multiply(transpose(phi), phi);
  for (std::size_t i = 0; i < d; ++i) {
    lhs[i][i] += rho;
    lhs[i + 1][i + 1] += rho;
    lhs[i][i + 1] -= rho;
    lhs[i + 1][i] -= rho;
  }
  const auto aty = oracle::apply(transpose(phi), y);
  std::vector<double> x(k, 0.0), z(d, 0.0), u(d, 0.0);
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<double> rhs = aty;
    for (std::size_t i = 0; i < d; ++i) {
      const double w = rho * (z[i] - u[i]);
      rhs[i] -= w;
      rhs[i + 1] += w;
    }
    x = *solve_dense(lhs, rhs, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      const double v = x[i + 1] - x[i] + u[i];
      const double t = lambda / rho;
      z[i] = v > t ? v - t : (v < -t ? v + t : 0.0);
      u[i] += x[i + 1] - x[i] - z[i];
    }
  }
  return x;
}

inline Matrix random_binary(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  Matrix a(rows, std::vector<double>(cols));
  for (auto& row : a) {
    for (double& v : row) v = static_cast<double>(gen() & 1u);
  }
  return a;
}

}  // namespace oracle
