#pragma once

#include "deepoly/geometry.hpp"
#include "deepoly/pde.hpp"

#include <cstdint>
#include <random>

namespace deepoly {

/// `count` points drawn uniformly from the domain (dim x count).
inline Eigen::MatrixXd uniform_points(const Domain<double>& domain, Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(domain.dim(), count);
  for (Index j = 0; j < count; ++j)
    for (Index i = 0; i < domain.dim(); ++i) x(i, j) = domain.lo()[i] + u(rng) * (domain.hi()[i] - domain.lo()[i]);
  return x;
}

/// Points on the faces flagged in `faces` (2 * dim flags, lower/upper per axis; empty means all).
/// Faces are chosen in proportion to their measure. In 1D the selected endpoints are returned once each.
inline Eigen::MatrixXd boundary_points(const Domain<double>& domain, Index count, std::uint64_t seed,
                                       const std::vector<bool>& faces = {}) {
  const Index dim = domain.dim();
  std::vector<Index> axes;
  std::vector<bool> upper;
  std::vector<double> measure;
  for (Index a = 0; a < dim; ++a) {
    for (int side = 0; side < 2; ++side) {
      if (!faces.empty() && !faces.at(static_cast<std::size_t>(2 * a + side))) continue;
      axes.push_back(a);
      upper.push_back(side == 1);
      measure.push_back(domain.volume() / domain.lengths()[a]);
    }
  }
  if (axes.empty()) return Eigen::MatrixXd(dim, 0);
  if (dim == 1) {
    Eigen::MatrixXd x(1, static_cast<Index>(axes.size()));
    for (std::size_t k = 0; k < axes.size(); ++k) x(0, static_cast<Index>(k)) = upper[k] ? domain.hi()[0] : domain.lo()[0];
    return x;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::discrete_distribution<std::size_t> pick(measure.begin(), measure.end());
  Eigen::MatrixXd x(dim, count);
  for (Index j = 0; j < count; ++j) {
    const std::size_t f = pick(rng);
    for (Index i = 0; i < dim; ++i) x(i, j) = domain.lo()[i] + u(rng) * (domain.hi()[i] - domain.lo()[i]);
    x(axes[f], j) = upper[f] ? domain.hi()[axes[f]] : domain.lo()[axes[f]];
  }
  return x;
}

inline Eigen::MatrixXd boundary_points(const Domain<double>& domain, Index count, std::uint64_t seed,
                                       const PdeDescriptor& pde) {
  return boundary_points(domain, count, seed, pde.dirichlet_faces);
}

/// Tensor grid with `counts[i]` equispaced nodes per axis including both ends, lexicographic
/// order with the first axis most significant.
inline Eigen::MatrixXd grid_points(const Domain<double>& domain, const std::vector<int>& counts) {
  const Index dim = domain.dim();
  if (static_cast<Index>(counts.size()) != dim) throw InvalidArgument("grid_points: one count per axis required");
  Index total = 1;
  for (int c : counts) {
    if (c < 2) throw InvalidArgument("grid_points: need at least two nodes per axis");
    total *= c;
  }
  Eigen::MatrixXd x(dim, total);
  for (Index j = 0; j < total; ++j) {
    Index rem = j;
    for (Index i = dim; i-- > 0;) {
      const int c = counts[static_cast<std::size_t>(i)];
      const Index k = rem % c;
      rem /= c;
      x(i, j) = k == c - 1 ? domain.hi()[i]
                           : domain.lo()[i] + (domain.hi()[i] - domain.lo()[i]) * static_cast<double>(k) / (c - 1);
    }
  }
  return x;
}

}  // namespace deepoly
