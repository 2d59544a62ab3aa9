#include "doctest.h"

#include "deepoly/spotter/train.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace deepoly;
using namespace deepoly::spotter;

namespace {

using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

MlpModel random_model(std::vector<int> widths, std::uint64_t seed) {
  MlpModel m = MlpModel::glorot(std::move(widths), seed);
  std::mt19937_64 rng(seed + 99);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Index l = 0; l < m.layer_count(); ++l)
    for (Index i = 0; i < m.bias(l).size(); ++i) m.bias(l)[i] = u(rng);
  return m;
}

Eigen::MatrixXd random_points(Index dim, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(dim, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < dim; ++i) x(i, j) = u(rng);
  return x;
}

}  // namespace

TEST_CASE("forward_features closed forms") {
  MlpModel zero({2, 3, 4, 1});
  const auto r = forward_features(zero, Eigen::Vector2d(0.3, -0.7));
  CHECK(r.features.isZero());
  CHECK(r.output.isZero());

  MlpModel unit({1, 1, 1});
  unit.weight(0)(0, 0) = 1.0;
  unit.weight(1)(0, 0) = 1.0;
  const auto s = forward_features(unit, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(s.features[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(s.output[0] == doctest::Approx(0.46211715726000974).epsilon(1e-15));

  CHECK_THROWS_AS(forward_features(unit, Eigen::Vector2d(0.1, 0.2)), InvalidArgument);
}

TEST_CASE("forward_features matches a straight-line evaluation") {
  MlpModel m = random_model({2, 12, 32, 32, 25, 1}, 5);
  m.set_input_transform(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(2.0, 2.0));
  const Eigen::MatrixXd pts = random_points(2, 10, 11);
  for (Index j = 0; j < pts.cols(); ++j) {
    Eigen::VectorXd feat;
    const double y = oracle::mlp_output<double>(m, pts.col(j), &feat);
    const auto r = forward_features(m, pts.col(j));
    CHECK(std::abs(r.output[0] - y) <= 1e-14 * std::max(1.0, std::abs(y)));
    CHECK((r.features - feat).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("output layer is linear in the features") {
  MlpModel m = random_model({1, 6, 5, 1}, 3);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.37);
  const auto before = forward_features(m, x);
  m.weight(m.layer_count() - 1).setRandom();
  const auto after = forward_features(m, x);
  CHECK(before.features == after.features);
  const double expect = m.output_weight().row(0).dot(after.features) + m.output_bias()[0];
  CHECK(after.output[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("feature_jet closed forms") {
  MlpModel unit({1, 1, 1});
  unit.weight(0)(0, 0) = 2.0;
  const auto jet = feature_jet(unit, Eigen::VectorXd::Zero(1), 3, false);
  CHECK(jet.first(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(jet.second(0, 0) == doctest::Approx(0.0));
  CHECK(jet.third(0, 0) == doctest::Approx(-16.0).epsilon(1e-14));  // d3/dx3 tanh(2x) at 0 = -2 * 2^3

  // A coordinate the first layer ignores has identically zero derivatives.
  MlpModel m = random_model({3, 8, 6, 1}, 21);
  m.weight(0).col(1).setZero();
  const auto j2 = feature_jet(m, Eigen::Vector3d(0.2, -0.4, 0.1), 3, true);
  CHECK(j2.first.col(1).isZero());
  CHECK(j2.second.col(1).isZero());
  CHECK(j2.third.col(1).isZero());
  CHECK(j2.mixed.col(0).isZero());  // (0,1)
  CHECK(j2.mixed.col(2).isZero());  // (1,2)
  CHECK_FALSE(j2.mixed.col(1).isZero());

  CHECK_THROWS_AS(feature_jet(m, Eigen::Vector3d::Zero(), 4, false), InvalidArgument);
}

TEST_CASE("feature_jet order-0 slot equals the forward features") {
  const MlpModel m = random_model({2, 7, 9, 1}, 8);
  const Eigen::Vector2d x(0.11, 0.83);
  CHECK(feature_jet(m, x, 2, true).values == forward_features(m, x).features);
}

TEST_CASE("feature_jet against finite differences") {
  MlpModel m = random_model({2, 12, 32, 32, 25, 1}, 17);
  m.set_input_transform(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(2.0, 2.0));
  const Eigen::MatrixXd pts = random_points(2, 6, 4);
  const std::function<LVec(const LVec&)> feats = [&](const LVec& x) {
    LVec f;
    oracle::mlp_output<long double>(m, x, &f);
    return f;
  };
  for (Index j = 0; j < pts.cols(); ++j) {
    const Eigen::VectorXd x = pts.col(j);
    const LVec xl = x.cast<long double>();
    const auto jet = feature_jet(m, x, 3, true);
    for (Index i = 0; i < 2; ++i) {
      const LVec e = LVec::Unit(2, i);
      const Eigen::VectorXd d1 = oracle::directional_fd<long double>(feats, xl, e, 1, 1e-5L).cast<double>();
      const Eigen::VectorXd d2 = oracle::directional_fd<long double>(feats, xl, e, 2, 1e-4L).cast<double>();
      const Eigen::VectorXd d3 = oracle::directional_fd<long double>(feats, xl, e, 3, 1e-4L).cast<double>();
      CHECK(oracle::rel_err(jet.first.col(i), d1) <= 1e-6);
      CHECK(oracle::rel_err(jet.second.col(i), d2) <= 1e-4);
      CHECK(oracle::rel_err(jet.third.col(i), d3) <= 1e-4);
    }
    const Eigen::VectorXd dxy = oracle::mixed_fd<long double>(feats, xl, 0, 1, 1e-4L).cast<double>();
    CHECK(oracle::rel_err(jet.mixed.col(0), dxy) <= 1e-4);
  }
}

TEST_CASE("make_jet_plan rejects unsupported multi-indices") {
  CHECK_THROWS_AS(make_jet_plan(2, {{2, 1}}), InvalidArgument);
  CHECK_THROWS_AS(make_jet_plan(1, {{4}}), InvalidArgument);
  CHECK_THROWS_AS(make_jet_plan(2, {{1}}), InvalidArgument);
  CHECK_NOTHROW(make_jet_plan(3, {{0, 1, 1}, {3, 0, 0}}));
}

TEST_CASE("fit-mse loss and gradient") {
  SUBCASE("exact targets give zero loss and gradient") {
    const MlpModel m = random_model({1, 4, 1}, 2);
    const Eigen::MatrixXd x = random_points(1, 20, 3);
    Eigen::VectorXd t(x.cols());
    for (Index j = 0; j < x.cols(); ++j) t[j] = forward_features(m, x.col(j)).output[0];
    TrainSpec spec;
    const auto lg = loss_and_grad(m, spec, make_fit_batch<double>(x, t));
    CHECK(lg.loss <= 1e-30);
    CHECK(lg.grad.norm() <= 1e-14);
  }
  SUBCASE("gradient matches finite differences on a 30-parameter model") {
    const MlpModel m = random_model({2, 3, 4, 1}, 12);
    REQUIRE(m.parameter_count() == 30);
    const Eigen::MatrixXd x = random_points(2, 25, 8);
    Eigen::VectorXd t(x.cols());
    for (Index j = 0; j < x.cols(); ++j) t[j] = std::sin(3 * x(0, j)) * x(1, j);
    TrainSpec spec;
    const auto batch = make_fit_batch<double>(x, t);
    const auto lg = loss_and_grad(m, spec, batch);
    MlpModel scratch = m;
    const auto fd = oracle::gradient_fd(
        [&](const Eigen::VectorXd& p) {
          scratch.set_parameters(p);
          return loss_and_grad(scratch, spec, batch).loss;
        },
        m.parameters(), 1e-6);
    CHECK(oracle::rel_err(lg.grad, fd) <= 1e-6);
  }
  SUBCASE("empty batch") {
    const MlpModel m({1, 2, 1});
    CHECK_THROWS_AS(loss_and_grad(m, TrainSpec{}, make_fit_batch<double>(Eigen::MatrixXd(1, 0), Eigen::VectorXd(0))),
                    InvalidArgument);
  }
}

TEST_CASE("pinn-residual loss and gradient") {
  // u_xx + 0.5 u_yy + 0.3 u_xy + x u u_x - u^3 ... exercises pure, mixed and state-power terms.
  PdeDescriptor pde;
  pde.dim = 2;
  pde.terms = {{{2, 0}, 1.0, {}, 0},
               {{0, 2}, 0.5, {}, 0},
               {{1, 1}, 0.3, {}, 0},
               {{1, 0}, 1.0, [](const Eigen::VectorXd& x) { return x[0]; }, 1},
               {{0, 0}, -1.0, {}, 2},
               {{0, 3}, 0.1, {}, 0}};
  pde.source = [](const Eigen::VectorXd& x) { return std::cos(x[0] + x[1]); };
  pde.boundary = [](const Eigen::VectorXd& x) { return x[0] * x[1]; };

  const MlpModel m = random_model({2, 3, 4, 1}, 31);
  const Eigen::MatrixXd interior = random_points(2, 30, 5);
  const Eigen::MatrixXd boundary = random_points(2, 12, 6);

  for (double w : {0.0, 10.0}) {
    TrainSpec spec;
    spec.loss = LossKind::pinn_residual;
    spec.bc_weight = w;
    const auto batch = make_pinn_batch<double>(pde, interior, boundary);
    const auto lg = loss_and_grad(m, spec, batch);
    MlpModel scratch = m;
    const auto fd = oracle::gradient_fd(
        [&](const Eigen::VectorXd& p) {
          scratch.set_parameters(p);
          return loss_and_grad(scratch, spec, batch).loss;
        },
        m.parameters(), 1e-6);
    CHECK(oracle::rel_err(lg.grad, fd) <= 1e-6);
  }

  SUBCASE("zero boundary weight leaves only the interior residual") {
    TrainSpec spec;
    spec.loss = LossKind::pinn_residual;
    spec.bc_weight = 0.0;
    const double with_bc = loss_and_grad(m, spec, make_pinn_batch<double>(pde, interior, boundary)).loss;
    const double without = loss_and_grad(m, spec, make_pinn_batch<double>(pde, interior, Eigen::MatrixXd(2, 0))).loss;
    CHECK(with_bc == without);
  }

  SUBCASE("residual matches finite differences of the network") {
    PdeDescriptor lap;
    lap.dim = 2;
    lap.terms = {{{2, 0}, 1.0, {}, 0}, {{0, 2}, 1.0, {}, 0}};
    TrainSpec spec;
    spec.loss = LossKind::pinn_residual;
    spec.bc_weight = 0.0;
    const Eigen::MatrixXd one = random_points(2, 1, 77);
    const double loss = loss_and_grad(m, spec, make_pinn_batch<double>(lap, one, Eigen::MatrixXd(2, 0))).loss;
    const std::function<LVec(const LVec&)> u = [&](const LVec& x) {
      return LVec::Constant(1, oracle::mlp_output<long double>(m, x));
    };
    const LVec xl = one.col(0).cast<long double>();
    const long double lapu = oracle::directional_fd<long double>(u, xl, LVec::Unit(2, 0), 2, 1e-4L)[0] +
                             oracle::directional_fd<long double>(u, xl, LVec::Unit(2, 1), 2, 1e-4L)[0];
    CHECK(std::sqrt(loss) == doctest::Approx(std::abs(static_cast<double>(lapu))).epsilon(1e-6));
  }
}

TEST_CASE("train stopping rules and determinism") {
  SUBCASE("zero target with a zero model stops at the first epoch") {
    const MlpModel m({1, 4, 4, 1});
    const Eigen::MatrixXd x = random_points(1, 50, 1);
    TrainSpec spec;
    const auto r = train(m, spec, make_fit_batch<double>(x, Eigen::VectorXd::Zero(50)));
    CHECK(r.epochs == 1);
    CHECK(r.final_loss == 0.0);
    CHECK(r.reached_target);
  }
  SUBCASE("identical inputs give bitwise-identical histories") {
    const Eigen::MatrixXd x = random_points(1, 64, 2);
    Eigen::VectorXd t = x.row(0).transpose().array().sin();
    for (Optimizer opt : {Optimizer::adam, Optimizer::lbfgs}) {
      TrainSpec spec;
      spec.optimizer = opt;
      spec.max_epochs = 60;
      spec.target_loss = 1e-30;
      const auto a = train(MlpModel::glorot({1, 5, 5, 1}, 4), spec, make_fit_batch<double>(x, t));
      const auto b = train(MlpModel::glorot({1, 5, 5, 1}, 4), spec, make_fit_batch<double>(x, t));
      CHECK(a.loss_history == b.loss_history);
      CHECK(a.model.parameters() == b.model.parameters());
      CHECK(a.loss_history.back() < a.loss_history.front());
    }
  }
  SUBCASE("invalid specs are rejected") {
    TrainSpec spec;
    spec.target_loss = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = TrainSpec{};
    spec.max_epochs = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  }
  SUBCASE("L-BFGS reduces a smooth fit well below Adam's early loss") {
    const Eigen::MatrixXd x = random_points(1, 128, 9);
    Eigen::VectorXd t = (3.0 * x.row(0).transpose().array()).sin();
    TrainSpec spec;
    spec.optimizer = Optimizer::lbfgs;
    spec.max_epochs = 400;
    spec.target_loss = 1e-8;
    const auto r = train(MlpModel::glorot({1, 8, 8, 1}, 1), spec, make_fit_batch<double>(x, t));
    CHECK(r.final_loss <= 1e-5);
  }
}

TEST_CASE("single precision training path") {
  const Eigen::MatrixXd x = random_points(1, 32, 2);
  const Eigen::VectorXd t = x.row(0).transpose();
  TrainSpec spec;
  spec.max_epochs = 50;
  spec.target_loss = 1e-12;
  const auto r = train(Mlp<float>::glorot({1, 2, 1}, 3), spec, make_fit_batch<float>(x, t));
  CHECK(r.epochs == 50);
  CHECK(r.final_loss < r.loss_history.front());
}
