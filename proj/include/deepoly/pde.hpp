#pragma once

#include "deepoly/common.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace deepoly {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// One operator term `scale * c(x) * U(x)^state_power * D^deriv u(x)`.
/// With state_power > 0 the factor U is the frozen state when the descriptor carries one
/// (linearized form, e.g. U^n dU^{n+1}/dx); otherwise it is the unknown itself, which only
/// the network residual loss can handle.
struct OperatorTerm {
  OperatorTerm() = default;
  OperatorTerm(MultiIndex d, double s = 1.0, ScalarField c = {}, int power = 0)
      : deriv(std::move(d)), scale(s), coefficient(std::move(c)), state_power(power) {}

  MultiIndex deriv;
  double scale = 1.0;
  ScalarField coefficient;  // empty means 1
  int state_power = 0;

  double coefficient_at(const Eigen::VectorXd& x) const { return coefficient ? scale * coefficient(x) : scale; }
};

/// Linear(ized) operator equation sum_terms(u) = source on the interior, u = boundary on the
/// faces of the domain flagged in `dirichlet_faces` (2 * dim flags: lower/upper per axis).
struct PdeDescriptor {
  Index dim = 0;
  std::vector<OperatorTerm> terms;
  ScalarField source;    // empty means 0
  ScalarField boundary;  // empty means 0
  ScalarField frozen_state;
  std::vector<bool> dirichlet_faces;  // empty means every face

  int max_order() const {
    int order = 0;
    for (const auto& t : terms) order = std::max(order, total_order(t.deriv));
    return order;
  }

  /// Continuity across segment faces is enforced one order below the highest derivative.
  int continuity_order() const { return std::max(0, max_order() - 1); }

  bool has_state_terms() const {
    return std::any_of(terms.begin(), terms.end(), [](const OperatorTerm& t) { return t.state_power > 0; });
  }

  bool face_is_dirichlet(Index axis, bool upper) const {
    if (dirichlet_faces.empty()) return true;
    return dirichlet_faces.at(static_cast<std::size_t>(2 * axis + (upper ? 1 : 0)));
  }

  double source_at(const Eigen::VectorXd& x) const { return source ? source(x) : 0.0; }
  double boundary_at(const Eigen::VectorXd& x) const { return boundary ? boundary(x) : 0.0; }

  void validate() const {
    if (dim < 1) throw InvalidArgument("pde: dimension must be positive");
    if (terms.empty()) throw InvalidArgument("pde: at least one operator term required");
    for (const auto& t : terms) {
      if (static_cast<Index>(t.deriv.size()) != dim) throw InvalidArgument("pde: term multi-index dimension mismatch");
      if (total_order(t.deriv) > 3) throw InvalidArgument("pde: derivative order beyond jet support");
      if (t.state_power < 0) throw InvalidArgument("pde: negative state power");
    }
    if (!dirichlet_faces.empty() && static_cast<Index>(dirichlet_faces.size()) != 2 * dim) {
      throw InvalidArgument("pde: dirichlet_faces needs two flags per axis");
    }
  }
};

}  // namespace deepoly
