#pragma once

#include <Eigen/Dense>

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepoly {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-coordinate derivative orders, one entry per input dimension.
using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex& alpha) {
  return std::accumulate(alpha.begin(), alpha.end(), 0);
}

inline MultiIndex zero_index(Index dim) { return MultiIndex(static_cast<std::size_t>(dim), 0); }

inline MultiIndex unit_index(Index dim, Index axis, int order = 1) {
  MultiIndex alpha = zero_index(dim);
  alpha[static_cast<std::size_t>(axis)] = order;
  return alpha;
}

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfSegment : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class OutOfDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace deepoly
