#pragma once

#include <Eigen/Dense>

#include "sbnn/arch.hpp"
#include "sbnn/params.hpp"

namespace sbnn {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Glorot-uniform for tanh (weights Unif(+-sqrt(6/(fan_in+fan_out))), zero
// biases); for relu, weights and biases Unif(+-1/sqrt(fan_in)).
// Deterministic given seed.
ParamVector init_params(const Arch& arch, std::uint64_t seed);

// mu(beta, x) for each row of X. The return is the raw output; for
// classification it is the logit (the sigmoid lives in the likelihood and
// metric code).
Eigen::VectorXd forward(const Arch& arch, const ParamVector& beta,
                        const Eigen::Ref<const RowMatrixXd>& X);
// mu(beta ∘ gamma, x).
Eigen::VectorXd forward(const Arch& arch, const ParamVector& beta,
                        const Mask& gamma,
                        const Eigen::Ref<const RowMatrixXd>& X);

// Mean per-observation log-likelihood. Regression (sigma^2 = 1):
// mean of -(y_i - mu_i)^2/2 - log(2*pi)/2. Classification:
// mean of y_i*mu_i - log(1 + exp(mu_i)), y in {0,1}.
double loglik(const Arch& arch, const ParamVector& beta, const Mask& gamma,
              const Eigen::Ref<const RowMatrixXd>& X,
              const Eigen::Ref<const Eigen::VectorXd>& y);

// Gradient of the mean log-likelihood with respect to beta, zeroed where
// gamma is 0. Returns the loglik value as well (one backward pass).
struct LoglikResult {
  double value = 0.0;
  ParamVector grad;
};
LoglikResult loglik_grad(const Arch& arch, const ParamVector& beta,
                         const Mask& gamma,
                         const Eigen::Ref<const RowMatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y);

// Reusable forward/backward buffers for the training loop (avoids
// reallocation per minibatch). Layer activations are stored batch-major.
class NetWorkspace {
 public:
  // Forward pass on pre-masked parameters; returns mu (view valid until the
  // next call). X may be a block expression.
  const Eigen::VectorXd& forward(const Arch& arch, const ParamVector& beta,
                                 const Eigen::Ref<const RowMatrixXd>& X);

  // Combined pass: mean loglik and its gradient accumulated into `grad`
  // scaled by `scale` (grad += scale * d(mean loglik)/d(beta)).
  // `beta` must already have any mask applied; the caller masks the
  // accumulated gradient if needed.
  double forward_backward(const Arch& arch, const ParamVector& beta,
                          const Eigen::Ref<const RowMatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y,
                          ParamVector& grad, double scale);

 private:
  void resize(const Arch& arch, Eigen::Index batch);
  std::vector<Eigen::MatrixXd> z_;      // pre-activations per layer
  std::vector<Eigen::MatrixXd> a_;      // activations per layer
  std::vector<Eigen::MatrixXd> delta_;  // backprop buffers
  Eigen::VectorXd mu_;
  Eigen::Index batch_ = -1;
  std::vector<int> widths_;
};

double stable_log1pexp(double x);
double stable_sigmoid(double x);

}  // namespace sbnn
