#pragma once

#include "deepoly/pde.hpp"
#include "deepoly/spotter/jet.hpp"

#include <cstdint>
#include <string>

namespace deepoly::spotter {

enum class Optimizer { adam, lbfgs };
enum class LossKind { fit_mse, pinn_residual };

inline std::string to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "lbfgs"; }
inline std::string to_string(LossKind k) { return k == LossKind::fit_mse ? "fit-mse" : "pinn-residual"; }

struct TrainSpec {
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  int max_epochs = 30000;
  double target_loss = 2e-5;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::fit_mse;
  double bc_weight = 10.0;
  int lbfgs_history = 10;

  void validate() const {
    if (!(target_loss > 0)) throw InvalidArgument("train spec: target_loss must be positive");
    if (max_epochs < 1) throw InvalidArgument("train spec: max_epochs must be >= 1");
    if (!(learning_rate > 0)) throw InvalidArgument("train spec: learning_rate must be positive");
    if (bc_weight < 0) throw InvalidArgument("train spec: bc_weight must be non-negative");
    if (lbfgs_history < 1) throw InvalidArgument("train spec: lbfgs_history must be >= 1");
  }
};

/// Training data with everything that does not depend on the network precomputed.
template <typename Scalar>
struct TrainBatch {
  LossKind kind = LossKind::fit_mse;
  Matrix<Scalar> inputs;  // d x P: fit points or interior collocation points
  Vector<Scalar> targets;

  // Residual loss only.
  JetPlan plan;                  // request 0 is the value
  Matrix<Scalar> term_factors;   // T x P: coefficient times frozen-state power
  std::vector<std::size_t> term_request;
  std::vector<int> term_network_power;
  Vector<Scalar> source;
  Matrix<Scalar> boundary;  // d x B
  Vector<Scalar> boundary_values;

  Index size() const { return inputs.cols(); }
};

template <typename Scalar>
TrainBatch<Scalar> make_fit_batch(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  if (inputs.cols() != targets.size()) throw InvalidArgument("fit batch: point/target count mismatch");
  TrainBatch<Scalar> b;
  b.kind = LossKind::fit_mse;
  b.inputs = inputs.cast<Scalar>();
  b.targets = targets.cast<Scalar>();
  b.plan = make_jet_plan(inputs.rows(), {zero_index(inputs.rows())});
  return b;
}

template <typename Scalar>
TrainBatch<Scalar> make_pinn_batch(const PdeDescriptor& pde, const Eigen::MatrixXd& interior,
                                   const Eigen::MatrixXd& boundary) {
  pde.validate();
  if (interior.rows() != pde.dim || (boundary.cols() > 0 && boundary.rows() != pde.dim)) {
    throw InvalidArgument("pinn batch: point dimension mismatch");
  }
  TrainBatch<Scalar> b;
  b.kind = LossKind::pinn_residual;
  b.inputs = interior.cast<Scalar>();

  std::vector<MultiIndex> requests{zero_index(pde.dim)};
  for (const auto& t : pde.terms) {
    auto it = std::find(requests.begin(), requests.end(), t.deriv);
    b.term_request.push_back(static_cast<std::size_t>(it - requests.begin()));
    if (it == requests.end()) requests.push_back(t.deriv);
  }
  b.plan = make_jet_plan(pde.dim, requests);

  const Index P = interior.cols();
  const auto T = static_cast<Index>(pde.terms.size());
  b.term_factors.resize(T, P);
  b.source.resize(P);
  for (Index p = 0; p < P; ++p) {
    const Eigen::VectorXd x = interior.col(p);
    const double state = pde.frozen_state ? pde.frozen_state(x) : 0.0;
    for (Index t = 0; t < T; ++t) {
      const auto& term = pde.terms[static_cast<std::size_t>(t)];
      double f = term.coefficient_at(x);
      if (term.state_power > 0 && pde.frozen_state) f *= std::pow(state, term.state_power);
      b.term_factors(t, p) = static_cast<Scalar>(f);
    }
    b.source[p] = static_cast<Scalar>(pde.source_at(x));
  }
  for (const auto& term : pde.terms) {
    b.term_network_power.push_back(pde.frozen_state ? 0 : term.state_power);
  }
  b.boundary = boundary.cast<Scalar>();
  b.boundary_values.resize(boundary.cols());
  for (Index p = 0; p < boundary.cols(); ++p) {
    b.boundary_values[p] = static_cast<Scalar>(pde.boundary_at(boundary.col(p)));
  }
  return b;
}

template <typename Scalar>
struct LossGrad {
  Scalar loss = 0;
  Vector<Scalar> grad;
};

/// Residual of the network against the batch's PDE at the interior points.
template <typename Scalar>
Vector<Scalar> pinn_residual(const JetTape<Scalar>& tape, const TrainBatch<Scalar>& batch) {
  const Vector<Scalar> u = tape.output(0).row(0).transpose();
  Vector<Scalar> r = -batch.source;
  for (std::size_t t = 0; t < batch.term_request.size(); ++t) {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> contrib =
        batch.term_factors.row(static_cast<Index>(t)).transpose().array() *
        tape.output(batch.term_request[t]).row(0).transpose().array();
    if (batch.term_network_power[t] > 0) contrib *= u.array().pow(Scalar(batch.term_network_power[t]));
    r += contrib.matrix();
  }
  return r;
}

/// Training loss and its gradient with respect to Mlp::parameters().
///  fit-mse:        mean (u - t)^2
///  pinn-residual:  mean r^2 + bc_weight * mean (u - g)^2 on the boundary points
template <typename Scalar>
LossGrad<Scalar> loss_and_grad(const Mlp<Scalar>& model, const TrainSpec& spec, const TrainBatch<Scalar>& batch) {
  if (batch.size() == 0) throw InvalidArgument("loss_and_grad: empty batch");
  if (model.output_dim() != 1) throw InvalidArgument("loss_and_grad: scalar-output networks only");
  if (batch.kind != spec.loss) throw InvalidArgument("loss_and_grad: batch kind does not match the loss kind");
  const Scalar P = static_cast<Scalar>(batch.size());
  LossGrad<Scalar> out;

  if (batch.kind == LossKind::fit_mse) {
    const JetTape<Scalar> tape(model, batch.plan, batch.inputs);
    const Matrix<Scalar> r = tape.output(0) - batch.targets.transpose();
    out.loss = r.squaredNorm() / P;
    out.grad = tape.backward({(Scalar(2) / P) * r});
    return out;
  }

  const JetTape<Scalar> tape(model, batch.plan, batch.inputs);
  const Vector<Scalar> r = pinn_residual(tape, batch);
  out.loss = r.squaredNorm() / P;
  const Vector<Scalar> dr = (Scalar(2) / P) * r;
  const Vector<Scalar> u = tape.output(0).row(0).transpose();

  std::vector<Matrix<Scalar>> seeds(batch.plan.combos.size());
  auto add_seed = [&](std::size_t req, const Vector<Scalar>& v) {
    if (seeds[req].size() == 0) seeds[req] = Matrix<Scalar>::Zero(1, batch.size());
    seeds[req].row(0) += v.transpose();
  };
  for (std::size_t t = 0; t < batch.term_request.size(); ++t) {
    const auto factor = batch.term_factors.row(static_cast<Index>(t)).transpose().array();
    const int p = batch.term_network_power[t];
    if (p == 0) {
      add_seed(batch.term_request[t], (dr.array() * factor).matrix());
    } else {
      const Vector<Scalar> deriv = tape.output(batch.term_request[t]).row(0).transpose();
      add_seed(batch.term_request[t], (dr.array() * factor * u.array().pow(Scalar(p))).matrix());
      add_seed(0, (dr.array() * factor * Scalar(p) * u.array().pow(Scalar(p - 1)) * deriv.array()).matrix());
    }
  }
  out.grad = tape.backward(seeds);

  if (batch.boundary.cols() > 0 && spec.bc_weight > 0) {
    const JetPlan value_plan = make_jet_plan(model.input_dim(), {zero_index(model.input_dim())});
    const JetTape<Scalar> btape(model, value_plan, batch.boundary);
    const Scalar B = static_cast<Scalar>(batch.boundary.cols());
    const Scalar w = static_cast<Scalar>(spec.bc_weight);
    const Matrix<Scalar> rb = btape.output(0) - batch.boundary_values.transpose();
    out.loss += w * rb.squaredNorm() / B;
    out.grad += btape.backward({(Scalar(2) * w / B) * rb});
  }
  return out;
}

}  // namespace deepoly::spotter
