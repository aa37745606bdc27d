#include "sbnn/net.hpp"

#include <cmath>
#include <stdexcept>

#include "sbnn/rng.hpp"

namespace sbnn {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void check_input(const Arch& arch, const Eigen::Ref<const RowMatrixXd>& X) {
  if (X.cols() != arch.input_dim())
    throw std::invalid_argument("X column count does not match arch input dim");
}
}  // namespace

double stable_log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ParamVector init_params(const Arch& arch, std::uint64_t seed) {
  arch.validate();
  ParamVector p = ParamVector::zeros(arch);
  Rng rng(Rng::mix(seed, 0x696e6974ULL));  // "init" stream
  for (std::size_t h = 0; h < p.w.size(); ++h) {
    const int fan_in = arch.layer_widths[h];
    const int fan_out = arch.layer_widths[h + 1];
    if (arch.activation == Activation::kTanh) {
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index i = 0; i < p.w[h].rows(); ++i)
        for (Eigen::Index j = 0; j < p.w[h].cols(); ++j)
          p.w[h](i, j) = rng.uniform(-bound, bound);
      // biases stay 0
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (Eigen::Index i = 0; i < p.w[h].rows(); ++i)
        for (Eigen::Index j = 0; j < p.w[h].cols(); ++j)
          p.w[h](i, j) = rng.uniform(-bound, bound);
      for (Eigen::Index i = 0; i < p.b[h].size(); ++i)
        p.b[h][i] = rng.uniform(-bound, bound);
    }
  }
  return p;
}

void NetWorkspace::resize(const Arch& arch, Eigen::Index batch) {
  if (batch == batch_ && widths_ == arch.layer_widths) return;
  const int depth = arch.depth();
  z_.assign(depth, {});
  a_.assign(depth, {});
  delta_.assign(depth, {});
  for (int h = 0; h < depth; ++h) {
    const int width = arch.layer_widths[h + 1];
    z_[h].resize(batch, width);
    a_[h].resize(batch, width);
    delta_[h].resize(batch, width);
  }
  mu_.resize(batch);
  batch_ = batch;
  widths_ = arch.layer_widths;
}

const Eigen::VectorXd& NetWorkspace::forward(
    const Arch& arch, const ParamVector& beta,
    const Eigen::Ref<const RowMatrixXd>& X) {
  check_input(arch, X);
  resize(arch, X.rows());
  const int depth = arch.depth();
  for (int h = 0; h < depth; ++h) {
    if (h == 0)
      z_[0].noalias() = X * beta.w[0].transpose();
    else
      z_[h].noalias() = a_[h - 1] * beta.w[h].transpose();
    z_[h].rowwise() += beta.b[h].transpose();
    if (h < depth - 1) {
      if (arch.activation == Activation::kTanh)
        a_[h] = z_[h].array().tanh();
      else
        a_[h] = z_[h].cwiseMax(0.0);
    }
  }
  mu_ = z_[depth - 1].col(0);
  return mu_;
}

double NetWorkspace::forward_backward(
    const Arch& arch, const ParamVector& beta,
    const Eigen::Ref<const RowMatrixXd>& X,
    const Eigen::Ref<const Eigen::VectorXd>& y, ParamVector& grad,
    double scale) {
  const Eigen::VectorXd& mu = forward(arch, beta, X);
  const Eigen::Index n = X.rows();
  const int depth = arch.depth();

  // d(mean loglik)/d(mu_i), and the loglik value.
  double value = 0.0;
  Eigen::VectorXd dmu(n);
  if (arch.task == Task::kRegression) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = y[i] - mu[i];
      value += -0.5 * r * r;
      dmu[i] = r;
    }
    value = value / n - 0.5 * kLogTwoPi;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      value += y[i] * mu[i] - stable_log1pexp(mu[i]);
      dmu[i] = y[i] - stable_sigmoid(mu[i]);
    }
    value /= n;
  }
  dmu *= scale / static_cast<double>(n);

  delta_[depth - 1].col(0) = dmu;
  for (int h = depth - 1; h >= 0; --h) {
    if (h > 0) {
      delta_[h - 1].noalias() = delta_[h] * beta.w[h];
      if (arch.activation == Activation::kTanh)
        delta_[h - 1].array() *= 1.0 - a_[h - 1].array().square();
      else
        delta_[h - 1].array() *=
            (z_[h - 1].array() > 0.0).template cast<double>();
    }
    if (h == 0) {
      // X^T * delta is the fast orientation for the wide first layer.
      grad.w[0].noalias() += (X.transpose() * delta_[0]).transpose();
    } else {
      grad.w[h].noalias() += delta_[h].transpose() * a_[h - 1];
    }
    grad.b[h].noalias() += delta_[h].colwise().sum().transpose();
  }
  return value;
}

Eigen::VectorXd forward(const Arch& arch, const ParamVector& beta,
                        const Eigen::Ref<const RowMatrixXd>& X) {
  NetWorkspace ws;
  return ws.forward(arch, beta, X);
}

Eigen::VectorXd forward(const Arch& arch, const ParamVector& beta,
                        const Mask& gamma,
                        const Eigen::Ref<const RowMatrixXd>& X) {
  return forward(arch, masked(beta, gamma), X);
}

double loglik(const Arch& arch, const ParamVector& beta, const Mask& gamma,
              const Eigen::Ref<const RowMatrixXd>& X,
              const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != X.rows())
    throw std::invalid_argument("y length does not match X rows");
  if (arch.task == Task::kBinaryClassification)
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0)
        throw std::invalid_argument("classification labels must be 0 or 1");
  const Eigen::VectorXd mu = forward(arch, beta, gamma, X);
  double value = 0.0;
  if (arch.task == Task::kRegression) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double r = y[i] - mu[i];
      value += -0.5 * r * r;
    }
    return value / y.size() - 0.5 * kLogTwoPi;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i)
    value += y[i] * mu[i] - stable_log1pexp(mu[i]);
  return value / y.size();
}

LoglikResult loglik_grad(const Arch& arch, const ParamVector& beta,
                         const Mask& gamma,
                         const Eigen::Ref<const RowMatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != X.rows())
    throw std::invalid_argument("y length does not match X rows");
  if (arch.task == Task::kBinaryClassification)
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0)
        throw std::invalid_argument("classification labels must be 0 or 1");
  LoglikResult out;
  out.grad = ParamVector::zeros(arch);
  NetWorkspace ws;
  out.value =
      ws.forward_backward(arch, masked(beta, gamma), X, y, out.grad, 1.0);
  apply_mask(out.grad, gamma);
  return out;
}

}  // namespace sbnn
