#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sbnn/net.hpp"
#include "sbnn/rng.hpp"

using namespace sbnn;

TEST_CASE("arch validation") {
  Arch ok{{5, 3, 1}, Activation::kTanh, Task::kRegression};
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.param_count() == 5 * 3 + 3 + 3 * 1 + 1);

  CHECK_THROWS_AS((Arch{{5, 1}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((Arch{{5, 3, 2}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((Arch{{5, 0, 1}}).validate(), std::invalid_argument);
}

TEST_CASE("init respects glorot bounds for tanh") {
  Arch arch{{2000, 6, 4, 3, 1}, Activation::kTanh, Task::kRegression};
  const ParamVector p = init_params(arch, 1);
  const double bound = std::sqrt(6.0 / (2000 + 6));
  CHECK(p.w[0].cwiseAbs().maxCoeff() <= bound);
  CHECK(p.w[0].cwiseAbs().maxCoeff() > 0.5 * bound);  // actually spread out
  CHECK(p.b[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.b[2].cwiseAbs().maxCoeff() == 0.0);

  const ParamVector q = init_params(arch, 1);
  CHECK(p == q);
  const ParamVector r = init_params(arch, 2);
  CHECK_FALSE(p == r);
}

TEST_CASE("init relu bound is 1/sqrt(fan_in)") {
  Arch arch{{1, 1, 1}, Activation::kRelu, Task::kRegression};
  const ParamVector p = init_params(arch, 7);
  CHECK(std::abs(p.w[0](0, 0)) <= 1.0);
  CHECK(std::abs(p.b[0][0]) <= 1.0);  // relu scheme randomizes biases too

  Arch wide{{16, 4, 1}, Activation::kRelu, Task::kRegression};
  const ParamVector q = init_params(wide, 7);
  CHECK(q.w[0].cwiseAbs().maxCoeff() <= 0.25);
}

TEST_CASE("forward on tiny networks") {
  Arch arch{{1, 1, 1}, Activation::kTanh, Task::kRegression};
  ParamVector beta = ParamVector::zeros(arch);
  RowMatrixXd x(2, 1);
  x << 0.0, 1.0;

  SUBCASE("all-zero parameters give mu = 0") {
    const Eigen::VectorXd mu = forward(arch, beta, x);
    CHECK(mu[0] == 0.0);
    CHECK(mu[1] == 0.0);
  }

  SUBCASE("scalar composition") {
    beta.w[0](0, 0) = 1.0;
    beta.b[0][0] = 0.0;
    beta.w[1](0, 0) = 2.0;
    beta.b[1][0] = 0.5;
    const Eigen::VectorXd mu = forward(arch, beta, x);
    CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-15));
    const double expected = 2.0 * std::tanh(1.0) + 0.5;  // 2.0231883119...
    CHECK(mu[1] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(2.023188311911530).epsilon(1e-12));
  }
}

TEST_CASE("loglik reference values") {
  SUBCASE("regression, perfect fit") {
    Arch arch{{2, 2, 1}, Activation::kTanh, Task::kRegression};
    const ParamVector beta = ParamVector::zeros(arch);
    const RowMatrixXd X = oracles::random_matrix(10, 2, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(10);  // mu = 0 = y
    const double v = loglik(arch, beta, Mask::full(arch), X, y);
    CHECK(v == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
  }

  SUBCASE("classification, mu = 0, y = 1") {
    Arch arch{{2, 2, 1}, Activation::kTanh, Task::kBinaryClassification};
    const ParamVector beta = ParamVector::zeros(arch);
    const RowMatrixXd X = oracles::random_matrix(4, 2, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
    const double v = loglik(arch, beta, Mask::full(arch), X, y);
    CHECK(v == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  }

  SUBCASE("non-binary labels rejected") {
    Arch arch{{2, 2, 1}, Activation::kTanh, Task::kBinaryClassification};
    const ParamVector beta = ParamVector::zeros(arch);
    const RowMatrixXd X = oracles::random_matrix(3, 2, 3);
    Eigen::VectorXd y(3);
    y << 0.0, 1.0, 0.5;
    CHECK_THROWS_AS(loglik(arch, beta, Mask::full(arch), X, y),
                    std::invalid_argument);
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    for (Task task : {Task::kRegression, Task::kBinaryClassification}) {
      Arch arch{{5, 3, 2, 1}, act, task};
      ParamVector beta;
      RowMatrixXd X;
      // For relu, keep preactivations away from the kink.
      std::uint64_t seed = 11;
      for (;;) {
        beta = oracles::random_params(arch, seed, 0.8);
        X = oracles::random_matrix(20, 5, seed + 100);
        if (act == Activation::kTanh ||
            oracles::min_abs_preactivation(arch, beta, X) > 1e-3)
          break;
        ++seed;
      }
      Eigen::VectorXd y(20);
      Rng rng(55);
      for (int i = 0; i < 20; ++i)
        y[i] = task == Task::kRegression ? rng.normal()
                                         : (rng.uniform() < 0.5 ? 0.0 : 1.0);

      const Mask full = Mask::full(arch);
      const LoglikResult res = loglik_grad(arch, beta, full, X, y);
      const auto f = [&](const Eigen::VectorXd& flat) {
        return loglik(arch, ParamVector::unflatten(arch, flat), full, X, y);
      };
      const Eigen::VectorXd fd =
          oracles::fd_gradient(f, beta.flatten(), 1e-5);
      CHECK(oracles::max_rel_err(res.grad.flatten(), fd) < 1e-5);
    }
  }
}

TEST_CASE("masked gradient is zero outside gamma") {
  Arch arch{{4, 3, 1}, Activation::kTanh, Task::kRegression};
  const ParamVector beta = oracles::random_params(arch, 5, 0.5);
  const RowMatrixXd X = oracles::random_matrix(8, 4, 6);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(8);
  Mask gamma = Mask::full(arch);
  gamma.w[0](0, 0) = 0.0;
  gamma.b[1][0] = 0.0;
  const LoglikResult res = loglik_grad(arch, beta, gamma, X, y);
  CHECK(res.grad.w[0](0, 0) == 0.0);
  CHECK(res.grad.b[1][0] == 0.0);
  CHECK(res.grad.w[1].cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("mask absorption: forward(beta, gamma) == forward(beta∘gamma)") {
  Arch arch{{6, 4, 3, 1}, Activation::kTanh, Task::kRegression};
  const ParamVector beta = oracles::random_params(arch, 21, 1.0);
  const RowMatrixXd X = oracles::random_matrix(15, 6, 22);
  Rng rng(23);
  Mask gamma = Mask::full(arch);
  for (auto& W : gamma.w)
    for (Eigen::Index i = 0; i < W.size(); ++i)
      W(i) = rng.uniform() < 0.4 ? 0.0 : 1.0;
  for (auto& v : gamma.b)
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = rng.uniform() < 0.4 ? 0.0 : 1.0;

  const Eigen::VectorXd a = forward(arch, beta, gamma, X);
  const Eigen::VectorXd b = forward(arch, masked(beta, gamma), X);
  CHECK(a == b);  // bit-exact
}

TEST_CASE("flatten/unflatten is a bijection with documented order") {
  Arch arch{{2, 2, 1}, Activation::kTanh, Task::kRegression};
  ParamVector p = ParamVector::zeros(arch);
  p.w[0] << 1, 2, 3, 4;  // row-major fill
  p.b[0] << 5, 6;
  p.w[1] << 7, 8;
  p.b[1] << 9;
  Eigen::VectorXd flat = p.flatten();
  Eigen::VectorXd expect(9);
  expect << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  CHECK(flat == expect);
  CHECK(ParamVector::unflatten(arch, flat) == p);

  Arch big{{7, 5, 3, 1}, Activation::kRelu, Task::kRegression};
  const ParamVector q = oracles::random_params(big, 77, 2.0);
  CHECK(ParamVector::unflatten(big, q.flatten()) == q);
}

TEST_CASE("hidden unit permutation leaves forward unchanged") {
  Arch arch{{4, 5, 3, 1}, Activation::kTanh, Task::kRegression};
  const ParamVector beta = oracles::random_params(arch, 31, 1.2);
  const RowMatrixXd X = oracles::random_matrix(9, 4, 32);
  const Eigen::VectorXd base = forward(arch, beta, X);

  // Rotate the first hidden layer's units by one position.
  ParamVector perm = beta;
  const int L = 5;
  for (int i = 0; i < L; ++i) {
    const int src = (i + 1) % L;
    perm.w[0].row(i) = beta.w[0].row(src);
    perm.b[0][i] = beta.b[0][src];
    perm.w[1].col(i) = beta.w[1].col(src);
  }
  const Eigen::VectorXd rotated = forward(arch, perm, X);
  for (Eigen::Index i = 0; i < base.size(); ++i)
    CHECK(rotated[i] == doctest::Approx(base[i]).epsilon(1e-12));
}

TEST_CASE("forward rejects shape mismatches") {
  Arch arch{{3, 2, 1}, Activation::kTanh, Task::kRegression};
  const ParamVector beta = ParamVector::zeros(arch);
  const RowMatrixXd X = oracles::random_matrix(4, 2, 1);
  CHECK_THROWS_AS(forward(arch, beta, X), std::invalid_argument);
}
