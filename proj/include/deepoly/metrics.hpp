#pragma once

#include "deepoly/common.hpp"

#include <cmath>
#include <optional>

namespace deepoly {

struct Metrics {
  double mse = 0;
  double mae = 0;
  double max_err = 0;
};

inline Metrics metrics(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("metrics: length mismatch");
  if (pred.size() == 0) throw InvalidArgument("metrics: empty input");
  const Eigen::ArrayXd e = (pred - truth).array().abs();
  return {e.square().mean(), e.mean(), e.maxCoeff()};
}

/// order_k = ln(E_{k-1} / E_k) / ln(s_k / s_{k-1}) with s the per-axis section count.
/// The first entry is always empty.
inline std::vector<std::optional<double>> convergence_order(const std::vector<double>& errors,
                                                            const std::vector<double>& sections) {
  if (errors.size() != sections.size()) throw InvalidArgument("convergence_order: lists must be aligned");
  for (double e : errors) {
    if (!(e > 0)) throw InvalidArgument("convergence_order: errors must be positive");
  }
  std::vector<std::optional<double>> orders(errors.size());
  for (std::size_t k = 1; k < errors.size(); ++k) {
    orders[k] = std::log(errors[k - 1] / errors[k]) / std::log(sections[k] / sections[k - 1]);
  }
  return orders;
}

}  // namespace deepoly
