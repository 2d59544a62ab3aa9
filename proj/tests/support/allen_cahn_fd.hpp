#pragma once

// Finite-difference reference for u_t = eps^2 u_xx + u - u^3 on [-1, 1] with u(+-1) = -0.5,
// stepped with the same frozen-cubic implicit Euler as the library:
//   (1 - dt + dt u_n^2) u_{n+1} - dt eps^2 D2 u_{n+1} = u_n.
// Second-order central differences on a uniform grid, one tridiagonal solve per step.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct FdSolution {
  std::vector<double> x;
  std::vector<double> u;

  /// Piecewise-linear interpolation on the grid.
  double at(double p) const {
    const double h = x[1] - x[0];
    const auto n = x.size() - 1;
    auto i = static_cast<std::size_t>(std::floor((p - x[0]) / h));
    if (i >= n) i = n - 1;
    const double t = (p - x[i]) / h;
    return (1 - t) * u[i] + t * u[i + 1];
  }
};

/// Thomas algorithm; a is the sub-diagonal, c the super-diagonal, both length n.
inline void thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

inline FdSolution allen_cahn_fd(int cells, double dt, double t_end, double eps = 0.01, double edge = -0.5) {
  FdSolution s;
  const double h = 2.0 / cells;
  for (int i = 0; i <= cells; ++i) {
    const double x = -1.0 + i * h;
    s.x.push_back(x);
    s.u.push_back(x * x * std::cos(std::numbers::pi * x));
  }
  s.u.front() = s.u.back() = edge;
  const std::size_t m = static_cast<std::size_t>(cells - 1);
  const double k = dt * eps * eps / (h * h);
  const int steps = static_cast<int>(std::lround(t_end / dt));
  std::vector<double> a(m, -k), c(m, -k), b(m), d(m);
  for (int n = 0; n < steps; ++n) {
    for (std::size_t i = 0; i < m; ++i) {
      const double ui = s.u[i + 1];
      b[i] = 1 - dt + dt * ui * ui + 2 * k;
      d[i] = ui;
    }
    d.front() += k * edge;
    d.back() += k * edge;
    thomas(a, b, c, d);
    for (std::size_t i = 0; i < m; ++i) s.u[i + 1] = d[i];
  }
  return s;
}

}  // namespace oracle
