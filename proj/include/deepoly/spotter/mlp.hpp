#pragma once

#include "deepoly/common.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace deepoly::spotter {

/// Fully connected network: tanh on hidden layers, identity on the output layer.
/// Inputs pass through a fixed affine map z = (x - offset) * scale before the first layer.
template <typename Scalar>
class Mlp {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  Mlp() = default;

  explicit Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 3) throw InvalidArgument("mlp: need input, at least one hidden, and output widths");
    for (int w : widths_) {
      if (w < 1) throw InvalidArgument("mlp: layer widths must be positive");
    }
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      weights_.push_back(Mat::Zero(widths_[l + 1], widths_[l]));
      biases_.push_back(Vec::Zero(widths_[l + 1]));
    }
    input_offset_ = Vec::Zero(widths_.front());
    input_scale_ = Vec::Ones(widths_.front());
  }

  /// Glorot-uniform weights, zero biases.
  static Mlp glorot(std::vector<int> widths, std::uint64_t seed) {
    Mlp m(std::move(widths));
    m.seed_ = seed;
    std::mt19937_64 rng(seed);
    for (auto& w : m.weights_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Index c = 0; c < w.cols(); ++c)
        for (Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(dist(rng));
    }
    return m;
  }

  const std::vector<int>& widths() const { return widths_; }
  Index input_dim() const { return widths_.front(); }
  Index output_dim() const { return widths_.back(); }
  Index feature_count() const { return widths_[widths_.size() - 2]; }
  /// Number of affine maps (hidden layers + output layer).
  Index layer_count() const { return static_cast<Index>(weights_.size()); }
  Index hidden_count() const { return layer_count() - 1; }

  Mat& weight(Index l) { return weights_.at(static_cast<std::size_t>(l)); }
  const Mat& weight(Index l) const { return weights_.at(static_cast<std::size_t>(l)); }
  Vec& bias(Index l) { return biases_.at(static_cast<std::size_t>(l)); }
  const Vec& bias(Index l) const { return biases_.at(static_cast<std::size_t>(l)); }
  const Mat& output_weight() const { return weights_.back(); }
  const Vec& output_bias() const { return biases_.back(); }

  const Vec& input_offset() const { return input_offset_; }
  const Vec& input_scale() const { return input_scale_; }
  void set_input_transform(Vec offset, Vec scale) {
    if (offset.size() != input_dim() || scale.size() != input_dim()) {
      throw InvalidArgument("mlp: input transform dimension mismatch");
    }
    input_offset_ = std::move(offset);
    input_scale_ = std::move(scale);
  }

  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  Index parameter_count() const {
    Index n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
  }

  /// Flat layout: per layer, the weight matrix in column-major order followed by the bias.
  Vec parameters() const {
    Vec p(parameter_count());
    Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      p.segment(at, weights_[l].size()) = weights_[l].reshaped();
      at += weights_[l].size();
      p.segment(at, biases_[l].size()) = biases_[l];
      at += biases_[l].size();
    }
    return p;
  }

  void set_parameters(const Eigen::Ref<const Vec>& p) {
    if (p.size() != parameter_count()) throw InvalidArgument("mlp: parameter vector length mismatch");
    Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      weights_[l].reshaped() = p.segment(at, weights_[l].size());
      at += weights_[l].size();
      biases_[l] = p.segment(at, biases_[l].size());
      at += biases_[l].size();
    }
  }

  template <typename NewScalar>
  Mlp<NewScalar> cast() const {
    Mlp<NewScalar> m(widths_);
    for (Index l = 0; l < layer_count(); ++l) {
      m.weight(l) = weight(l).template cast<NewScalar>();
      m.bias(l) = bias(l).template cast<NewScalar>();
    }
    m.set_input_transform(input_offset_.template cast<NewScalar>(), input_scale_.template cast<NewScalar>());
    m.set_seed(seed_);
    return m;
  }

  /// Applies the input transform to a batch of points stored as columns.
  template <typename Derived>
  Mat transform_inputs(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.template cast<Scalar>().colwise() - input_offset_).array().colwise() * input_scale_.array()).matrix();
  }

 private:
  std::vector<int> widths_;
  std::vector<Mat> weights_;
  std::vector<Vec> biases_;
  Vec input_offset_;
  Vec input_scale_;
  std::uint64_t seed_ = 0;
};

using MlpModel = Mlp<double>;

template <typename Scalar>
struct ForwardResult {
  Matrix<Scalar> features;  // N x P, last hidden activations
  Matrix<Scalar> output;    // d_out x P
};

/// Batched evaluation; points are columns of `x`.
template <typename Scalar, typename Derived>
ForwardResult<Scalar> forward_batch(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != model.input_dim()) throw InvalidArgument("forward: input dimension mismatch");
  Matrix<Scalar> h = model.transform_inputs(x);
  for (Index l = 0; l < model.hidden_count(); ++l) {
    Matrix<Scalar> a = model.weight(l) * h;
    a.colwise() += model.bias(l);
    h = a.array().tanh().matrix();
  }
  Matrix<Scalar> out = model.output_weight() * h;
  out.colwise() += model.output_bias();
  return {std::move(h), std::move(out)};
}

template <typename Scalar>
struct PointForward {
  Vector<Scalar> features;
  Vector<Scalar> output;
};

template <typename Scalar, typename Derived>
PointForward<Scalar> forward_features(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1) throw InvalidArgument("forward_features: expected a single point");
  auto r = forward_batch(model, x);
  return {r.features.col(0), r.output.col(0)};
}

}  // namespace deepoly::spotter
