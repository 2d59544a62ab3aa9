#pragma once

#include "deepoly/spotter/loss.hpp"

#include <cmath>
#include <deque>
#include <functional>

namespace deepoly::spotter {

template <typename Scalar>
struct TrainResult {
  Mlp<Scalar> model;
  std::vector<double> loss_history;  // loss at the start of each epoch
  int epochs = 0;
  double final_loss = 0;
  bool reached_target = false;
  bool diverged = false;
  bool stalled = false;  // L-BFGS line search could not make progress
};

template <typename Scalar>
using Objective = std::function<LossGrad<Scalar>(const Vector<Scalar>&)>;

namespace detail {

template <typename Scalar>
bool finite(const LossGrad<Scalar>& lg) {
  return std::isfinite(static_cast<double>(lg.loss)) && lg.grad.allFinite();
}

template <typename Scalar>
void run_adam(Vector<Scalar>& theta, const Objective<Scalar>& objective, const TrainSpec& spec,
              TrainResult<Scalar>& result) {
  const Scalar beta1 = Scalar(0.9), beta2 = Scalar(0.999), eps = Scalar(1e-8);
  const Scalar lr = static_cast<Scalar>(spec.learning_rate);
  Vector<Scalar> m = Vector<Scalar>::Zero(theta.size());
  Vector<Scalar> v = Vector<Scalar>::Zero(theta.size());
  Vector<Scalar> best = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  Scalar b1t = 1, b2t = 1;
  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    const LossGrad<Scalar> lg = objective(theta);
    result.epochs = epoch;
    if (!finite(lg)) {
      result.diverged = true;
      theta = best;
      result.final_loss = best_loss;
      return;
    }
    const double loss = static_cast<double>(lg.loss);
    result.loss_history.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = theta;
    }
    result.final_loss = loss;
    if (loss <= spec.target_loss) {
      result.reached_target = true;
      return;
    }
    b1t *= beta1;
    b2t *= beta2;
    m = beta1 * m + (Scalar(1) - beta1) * lg.grad;
    v = beta2 * v + (Scalar(1) - beta2) * lg.grad.cwiseAbs2();
    const Scalar step = lr / (Scalar(1) - b1t);
    const Scalar vcorr = Scalar(1) / (Scalar(1) - b2t);
    theta.array() -= step * m.array() / ((v.array() * vcorr).sqrt() + eps);
  }
  // Keep the final iterate but report its loss.
  const LossGrad<Scalar> lg = objective(theta);
  if (finite(lg) && static_cast<double>(lg.loss) <= best_loss) {
    result.final_loss = static_cast<double>(lg.loss);
  } else {
    theta = best;
    result.final_loss = best_loss;
  }
  result.reached_target = result.final_loss <= spec.target_loss;
}

/// L-BFGS with two-loop recursion and backtracking line search (Armijo, c1 = 1e-4).
template <typename Scalar>
void run_lbfgs(Vector<Scalar>& theta, const Objective<Scalar>& objective, const TrainSpec& spec,
               TrainResult<Scalar>& result) {
  const Scalar c1 = Scalar(1e-4);
  const auto history = static_cast<std::size_t>(spec.lbfgs_history);
  std::deque<Vector<Scalar>> s_hist, y_hist;
  std::deque<Scalar> rho_hist;

  LossGrad<Scalar> cur = objective(theta);
  if (!finite(cur)) {
    result.diverged = true;
    return;
  }
  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    result.epochs = epoch;
    const double loss = static_cast<double>(cur.loss);
    result.loss_history.push_back(loss);
    result.final_loss = loss;
    if (loss <= spec.target_loss) {
      result.reached_target = true;
      return;
    }

    // Two-loop recursion.
    Vector<Scalar> q = cur.grad;
    std::vector<Scalar> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    Scalar gamma = 1;
    if (!s_hist.empty()) {
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      gamma = Scalar(1) / std::max(Scalar(1), cur.grad.template lpNorm<Eigen::Infinity>());
    }
    Vector<Scalar> dir = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const Scalar beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += s_hist[i] * (alpha[i] - beta);
    }
    dir = -dir;
    Scalar slope = cur.grad.dot(dir);
    if (!(slope < 0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -cur.grad / std::max(Scalar(1), cur.grad.template lpNorm<Eigen::Infinity>());
      slope = cur.grad.dot(dir);
    }

    Scalar t = 1;
    bool accepted = false;
    LossGrad<Scalar> next;
    for (int ls = 0; ls < 40; ++ls) {
      next = objective(theta + t * dir);
      if (finite(next) && next.loss <= cur.loss + c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= Scalar(0.5);
    }
    if (!accepted) {
      if (s_hist.empty()) {
        result.stalled = true;
        return;
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    const Vector<Scalar> s = t * dir;
    const Vector<Scalar> y = next.grad - cur.grad;
    const Scalar sy = s.dot(y);
    theta += s;
    cur = std::move(next);
    if (sy > Scalar(1e-10) * y.squaredNorm() && sy > 0) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(Scalar(1) / sy);
      if (s_hist.size() > history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  result.final_loss = static_cast<double>(cur.loss);
  result.reached_target = result.final_loss <= spec.target_loss;
}

}  // namespace detail

/// Full-batch training. Stops at the first epoch whose loss is at or below target_loss,
/// or after max_epochs. A non-finite loss marks the run as diverged and keeps the best
/// parameters seen so far.
template <typename Scalar>
TrainResult<Scalar> train(Mlp<Scalar> model, const TrainSpec& spec, const TrainBatch<Scalar>& batch) {
  spec.validate();
  if (batch.size() == 0) throw InvalidArgument("train: empty batch");
  TrainResult<Scalar> result;
  Vector<Scalar> theta = model.parameters();
  Mlp<Scalar> scratch = model;
  const Objective<Scalar> objective = [&](const Vector<Scalar>& p) {
    scratch.set_parameters(p);
    return loss_and_grad(scratch, spec, batch);
  };
  if (spec.optimizer == Optimizer::adam) {
    detail::run_adam(theta, objective, spec, result);
  } else {
    detail::run_lbfgs(theta, objective, spec, result);
  }
  model.set_parameters(theta);
  result.model = std::move(model);
  return result;
}

}  // namespace deepoly::spotter
