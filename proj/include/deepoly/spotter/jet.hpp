#pragma once

#include "deepoly/spotter/mlp.hpp"

#include <algorithm>
#include <array>

namespace deepoly::spotter {

/// One directional derivative contribution: `weight * D_v^order` along plan direction `direction`.
/// Order 0 is the plain value and ignores the direction.
struct DirectionalTerm {
  int direction = 0;
  int order = 0;
  double weight = 1.0;
};

/// Maps requested multi-indices onto a small set of directional Taylor jets. Pure
/// derivatives use a coordinate direction; mixed second derivatives are recovered by
/// polarization, d_i d_j f = (D^2_{e_i+e_j} f - D^2_{e_i} f - D^2_{e_j} f) / 2.
struct JetPlan {
  Index dim = 0;
  int order = 0;
  std::vector<Eigen::VectorXd> directions;
  std::vector<std::vector<DirectionalTerm>> combos;
};

inline bool jet_supports(const MultiIndex& alpha) {
  const int total = total_order(alpha);
  const auto nonzero = std::count_if(alpha.begin(), alpha.end(), [](int k) { return k != 0; });
  if (std::any_of(alpha.begin(), alpha.end(), [](int k) { return k < 0; })) return false;
  if (total > 3) return false;
  if (nonzero <= 1) return true;
  return nonzero == 2 && total == 2;
}

inline JetPlan make_jet_plan(Index dim, const std::vector<MultiIndex>& requests) {
  JetPlan plan;
  plan.dim = dim;
  auto direction_of = [&](const Eigen::VectorXd& v) {
    for (std::size_t i = 0; i < plan.directions.size(); ++i) {
      if (plan.directions[i] == v) return static_cast<int>(i);
    }
    plan.directions.push_back(v);
    return static_cast<int>(plan.directions.size() - 1);
  };
  for (const auto& alpha : requests) {
    if (static_cast<Index>(alpha.size()) != dim) throw InvalidArgument("jet plan: multi-index dimension mismatch");
    if (!jet_supports(alpha)) throw InvalidArgument("jet plan: derivative order beyond jet support");
    std::vector<DirectionalTerm> combo;
    const int total = total_order(alpha);
    std::vector<Index> axes;
    for (Index i = 0; i < dim; ++i) {
      if (alpha[static_cast<std::size_t>(i)] != 0) axes.push_back(i);
    }
    if (total == 0) {
      combo.push_back({0, 0, 1.0});
    } else if (axes.size() == 1) {
      combo.push_back({direction_of(Eigen::VectorXd::Unit(dim, axes[0])), total, 1.0});
    } else {
      const Eigen::VectorXd ei = Eigen::VectorXd::Unit(dim, axes[0]);
      const Eigen::VectorXd ej = Eigen::VectorXd::Unit(dim, axes[1]);
      combo.push_back({direction_of(ei + ej), 2, 0.5});
      combo.push_back({direction_of(ei), 2, -0.5});
      combo.push_back({direction_of(ej), 2, -0.5});
    }
    plan.order = std::max(plan.order, total);
    plan.combos.push_back(std::move(combo));
  }
  return plan;
}

/// Forward Taylor propagation of directional derivatives through the network, kept in
/// memory so that parameter adjoints can be pulled back through the same recurrence.
///
/// For h = tanh(a), s = 1 - h^2, along a direction with derivatives a', a'', a''':
///   h'   = s a'
///   h''  = s a'' - 2 h h' a'
///   h''' = s a''' - 4 h h' a'' - 2 h'^2 a' - 2 h h'' a'
template <typename Scalar>
class JetTape {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  template <typename Derived>
  JetTape(const Mlp<Scalar>& model, const JetPlan& plan, const Eigen::MatrixBase<Derived>& x)
      : model_(&model), plan_(&plan) {
    if (x.rows() != model.input_dim()) throw InvalidArgument("jet: input dimension mismatch");
    if (plan.dim != model.input_dim()) throw InvalidArgument("jet: plan dimension mismatch");
    const Index points = x.cols();
    const Index hidden = model.hidden_count();
    const int order = plan.order;
    const std::size_t ndir = plan.directions.size();

    input_ = model.transform_inputs(x);
    input_dirs_.resize(ndir);
    for (std::size_t d = 0; d < ndir; ++d) {
      input_dirs_[d] = plan.directions[d].template cast<Scalar>().cwiseProduct(model.input_scale());
    }

    h0_.resize(static_cast<std::size_t>(hidden));
    a_.assign(static_cast<std::size_t>(hidden), std::vector<std::array<Mat, 3>>(ndir));
    h_.assign(static_cast<std::size_t>(hidden), std::vector<std::array<Mat, 3>>(ndir));

    for (Index l = 0; l < hidden; ++l) {
      const auto L = static_cast<std::size_t>(l);
      const Mat& W = model.weight(l);
      Mat a0 = W * (l == 0 ? input_ : h0_[L - 1]);
      a0.colwise() += model.bias(l);
      h0_[L] = a0.array().tanh().matrix();
      const auto h0 = h0_[L].array();
      const auto s = (Scalar(1) - h0.square()).eval();

      for (std::size_t d = 0; d < ndir; ++d) {
        auto& a = a_[L][d];
        auto& h = h_[L][d];
        for (int k = 1; k <= order; ++k) {
          if (l == 0) {
            if (k == 1) {
              a[0] = (W * input_dirs_[d]).replicate(1, points);
            } else {
              a[static_cast<std::size_t>(k - 1)] = Mat::Zero(W.rows(), points);
            }
          } else {
            a[static_cast<std::size_t>(k - 1)] = W * h_[L - 1][d][static_cast<std::size_t>(k - 1)];
          }
        }
        if (order >= 1) h[0] = (s * a[0].array()).matrix();
        if (order >= 2) {
          h[1] = (s * a[1].array() - Scalar(2) * h0 * h[0].array() * a[0].array()).matrix();
        }
        if (order >= 3) {
          h[2] = (s * a[2].array() - Scalar(4) * h0 * h[0].array() * a[1].array() -
                  Scalar(2) * h[0].array().square() * a[0].array() -
                  Scalar(2) * h0 * h[1].array() * a[0].array())
                     .matrix();
        }
      }
    }
  }

  Index points() const { return input_.cols(); }
  const JetPlan& plan() const { return *plan_; }

  /// Last-hidden-layer derivative D^order along a plan direction (order 0: values).
  const Mat& feature_directional(int direction, int order) const {
    if (order == 0) return h0_.back();
    return h_.back()[static_cast<std::size_t>(direction)][static_cast<std::size_t>(order - 1)];
  }

  /// Derivative of the features for the plan's `request`-th multi-index (N x P).
  Mat features(std::size_t request) const {
    const auto& combo = plan_->combos.at(request);
    Mat out = Mat::Zero(h0_.back().rows(), points());
    for (const auto& t : combo) out += Scalar(t.weight) * feature_directional(t.direction, t.order);
    return out;
  }

  /// Derivative of the network output for the `request`-th multi-index (d_out x P).
  Mat output(std::size_t request) const {
    Mat out = model_->output_weight() * features(request);
    if (total_order_of(request) == 0) out.colwise() += model_->output_bias();
    return out;
  }

  /// Pulls adjoints of the requested output derivatives back to a flat parameter gradient
  /// (layout of Mlp::parameters()). `seeds[r]` is d_out x P or empty for no contribution.
  Vec backward(const std::vector<Mat>& seeds) const {
    const Mlp<Scalar>& model = *model_;
    const Index hidden = model.hidden_count();
    const std::size_t ndir = plan_->directions.size();
    const int order = plan_->order;
    const Index P = points();

    // Seeds per directional slot.
    Mat gy0 = Mat::Zero(model.output_dim(), P);
    std::vector<std::array<Mat, 3>> gy(ndir);
    for (auto& arr : gy)
      for (int k = 0; k < order; ++k) arr[static_cast<std::size_t>(k)] = Mat::Zero(model.output_dim(), P);
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      if (seeds[r].size() == 0) continue;
      for (const auto& t : plan_->combos.at(r)) {
        if (t.order == 0) {
          gy0 += Scalar(t.weight) * seeds[r];
        } else {
          gy[static_cast<std::size_t>(t.direction)][static_cast<std::size_t>(t.order - 1)] += Scalar(t.weight) * seeds[r];
        }
      }
    }

    std::vector<Mat> gW(static_cast<std::size_t>(model.layer_count()));
    std::vector<Vec> gb(static_cast<std::size_t>(model.layer_count()));

    // Output layer.
    const Mat& Wo = model.output_weight();
    const auto last = static_cast<std::size_t>(hidden - 1);
    gW.back() = gy0 * h0_[last].transpose();
    gb.back() = gy0.rowwise().sum();
    Mat G0 = Wo.transpose() * gy0;
    std::vector<std::array<Mat, 3>> G(ndir);
    for (std::size_t d = 0; d < ndir; ++d) {
      for (int k = 0; k < order; ++k) {
        const auto K = static_cast<std::size_t>(k);
        gW.back() += gy[d][K] * h_[last][d][K].transpose();
        G[d][K] = Wo.transpose() * gy[d][K];
      }
    }

    for (Index l = hidden - 1; l >= 0; --l) {
      const auto L = static_cast<std::size_t>(l);
      const auto h0 = h0_[L].array();
      const auto s = (Scalar(1) - h0.square()).eval();
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> gh0 = G0.array();
      std::vector<std::array<Mat, 3>> gA(ndir);

      for (std::size_t d = 0; d < ndir; ++d) {
        const auto& a = a_[L][d];
        const auto& h = h_[L][d];
        Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> gs =
            Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(h0.rows(), h0.cols());
        std::array<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>, 3> Gk;
        std::array<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>, 3> gAk;
        for (int k = 0; k < order; ++k) {
          Gk[static_cast<std::size_t>(k)] = G[d][static_cast<std::size_t>(k)].array();
          gAk[static_cast<std::size_t>(k)].setZero(h0.rows(), h0.cols());
        }
        if (order >= 3) {
          const auto& G3 = Gk[2];
          const auto a1 = a[0].array(), a2 = a[1].array(), a3 = a[2].array();
          const auto h1 = h[0].array(), h2 = h[1].array();
          gs += G3 * a3;
          gAk[2] += G3 * s;
          gh0 += G3 * (Scalar(-4) * h1 * a2 - Scalar(2) * h2 * a1);
          Gk[0] += G3 * (Scalar(-4) * h0 * a2 - Scalar(4) * h1 * a1);
          gAk[1] += G3 * (Scalar(-4) * h0 * h1);
          gAk[0] += G3 * (Scalar(-2) * h1.square() - Scalar(2) * h0 * h2);
          Gk[1] += G3 * (Scalar(-2) * h0 * a1);
        }
        if (order >= 2) {
          const auto& G2 = Gk[1];
          const auto a1 = a[0].array(), a2 = a[1].array();
          const auto h1 = h[0].array();
          gs += G2 * a2;
          gAk[1] += G2 * s;
          gh0 += G2 * (Scalar(-2) * h1 * a1);
          Gk[0] += G2 * (Scalar(-2) * h0 * a1);
          gAk[0] += G2 * (Scalar(-2) * h0 * h1);
        }
        if (order >= 1) {
          gs += Gk[0] * a[0].array();
          gAk[0] += Gk[0] * s;
        }
        gh0 += Scalar(-2) * h0 * gs;
        for (int k = 0; k < order; ++k) gA[d][static_cast<std::size_t>(k)] = gAk[static_cast<std::size_t>(k)].matrix();
      }
      const Mat gA0 = (gh0 * s).matrix();

      const Mat& W = model.weight(l);
      if (l == 0) {
        gW[L] = gA0 * input_.transpose();
        for (std::size_t d = 0; d < ndir; ++d) {
          if (order >= 1) gW[L] += gA[d][0].rowwise().sum() * input_dirs_[d].transpose();
        }
      } else {
        gW[L] = gA0 * h0_[L - 1].transpose();
        for (std::size_t d = 0; d < ndir; ++d)
          for (int k = 0; k < order; ++k)
            gW[L] += gA[d][static_cast<std::size_t>(k)] * h_[L - 1][d][static_cast<std::size_t>(k)].transpose();
      }
      gb[L] = gA0.rowwise().sum();

      if (l > 0) {
        G0 = W.transpose() * gA0;
        for (std::size_t d = 0; d < ndir; ++d)
          for (int k = 0; k < order; ++k)
            G[d][static_cast<std::size_t>(k)] = W.transpose() * gA[d][static_cast<std::size_t>(k)];
      }
    }

    Vec grad(model.parameter_count());
    Index at = 0;
    for (std::size_t l = 0; l < gW.size(); ++l) {
      grad.segment(at, gW[l].size()) = gW[l].reshaped();
      at += gW[l].size();
      grad.segment(at, gb[l].size()) = gb[l];
      at += gb[l].size();
    }
    return grad;
  }

 private:
  int total_order_of(std::size_t request) const {
    int order = 0;
    for (const auto& t : plan_->combos.at(request)) order = std::max(order, t.order);
    return order;
  }

  const Mlp<Scalar>* model_;
  const JetPlan* plan_;
  Mat input_;
  std::vector<Vec> input_dirs_;
  std::vector<Mat> h0_;
  std::vector<std::vector<std::array<Mat, 3>>> a_;
  std::vector<std::vector<std::array<Mat, 3>>> h_;
};

/// Feature derivatives at a single point: pure orders up to 3 per axis, plus mixed
/// second derivatives for axis pairs i < j in lexicographic order.
template <typename Scalar>
struct FeatureJet {
  int max_order = 0;
  Vector<Scalar> values;
  Matrix<Scalar> first;   // N x dim
  Matrix<Scalar> second;  // N x dim
  Matrix<Scalar> third;   // N x dim
  Matrix<Scalar> mixed;   // N x dim(dim-1)/2
};

template <typename Scalar, typename Derived>
FeatureJet<Scalar> feature_jet(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& x, int max_order,
                               bool mixed) {
  if (max_order < 0 || max_order > 3) throw InvalidArgument("feature_jet: max_order must be in 0..3");
  if (x.cols() != 1) throw InvalidArgument("feature_jet: expected a single point");
  const Index dim = model.input_dim();
  std::vector<MultiIndex> requests{zero_index(dim)};
  for (int k = 1; k <= max_order; ++k)
    for (Index i = 0; i < dim; ++i) requests.push_back(unit_index(dim, i, k));
  if (mixed) {
    for (Index i = 0; i < dim; ++i)
      for (Index j = i + 1; j < dim; ++j) {
        MultiIndex alpha = zero_index(dim);
        alpha[static_cast<std::size_t>(i)] = alpha[static_cast<std::size_t>(j)] = 1;
        requests.push_back(alpha);
      }
  }
  const JetPlan plan = make_jet_plan(dim, requests);
  const JetTape<Scalar> tape(model, plan, x);
  const Index n = model.feature_count();

  FeatureJet<Scalar> jet;
  jet.max_order = max_order;
  jet.values = tape.features(0).col(0);
  std::array<Matrix<Scalar>*, 3> slots{&jet.first, &jet.second, &jet.third};
  std::size_t r = 1;
  for (int k = 1; k <= 3; ++k) {
    slots[static_cast<std::size_t>(k - 1)]->setZero(n, k <= max_order ? dim : 0);
  }
  for (int k = 1; k <= max_order; ++k)
    for (Index i = 0; i < dim; ++i) slots[static_cast<std::size_t>(k - 1)]->col(i) = tape.features(r++).col(0);
  jet.mixed.setZero(n, mixed ? dim * (dim - 1) / 2 : 0);
  for (Index c = 0; c < jet.mixed.cols(); ++c) jet.mixed.col(c) = tape.features(r++).col(0);
  return jet;
}

/// Derivatives of the features for each requested multi-index over a batch (N x P each).
template <typename Scalar, typename Derived>
std::vector<Matrix<Scalar>> feature_derivatives(const Mlp<Scalar>& model, const std::vector<MultiIndex>& requests,
                                                const Eigen::MatrixBase<Derived>& x) {
  const JetPlan plan = make_jet_plan(model.input_dim(), requests);
  const JetTape<Scalar> tape(model, plan, x);
  std::vector<Matrix<Scalar>> out;
  out.reserve(requests.size());
  for (std::size_t r = 0; r < requests.size(); ++r) out.push_back(tape.features(r));
  return out;
}

}  // namespace deepoly::spotter
