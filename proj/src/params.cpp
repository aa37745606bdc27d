#include "sbnn/params.hpp"

#include <cmath>
#include <stdexcept>

namespace sbnn {

namespace {

template <class T>
T shaped(const Arch& arch) {
  T out;
  const auto& lw = arch.layer_widths;
  out.w.reserve(lw.size() - 1);
  out.b.reserve(lw.size() - 1);
  for (std::size_t h = 1; h < lw.size(); ++h) {
    out.w.emplace_back(Eigen::MatrixXd::Zero(lw[h], lw[h - 1]));
    out.b.emplace_back(Eigen::VectorXd::Zero(lw[h]));
  }
  return out;
}

template <class T>
Eigen::VectorXd flatten_impl(const T& p) {
  std::int64_t k = 0;
  for (std::size_t h = 0; h < p.w.size(); ++h) k += p.w[h].size() + p.b[h].size();
  Eigen::VectorXd out(k);
  std::int64_t at = 0;
  for (std::size_t h = 0; h < p.w.size(); ++h) {
    const auto& W = p.w[h];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) out[at++] = W(i, j);
    for (Eigen::Index i = 0; i < p.b[h].size(); ++i) out[at++] = p.b[h][i];
  }
  return out;
}

template <class T>
T unflatten_impl(const Arch& arch, const Eigen::VectorXd& flat) {
  if (flat.size() != arch.param_count())
    throw std::invalid_argument("flat vector length does not match arch");
  T out = shaped<T>(arch);
  std::int64_t at = 0;
  for (std::size_t h = 0; h < out.w.size(); ++h) {
    auto& W = out.w[h];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = flat[at++];
    for (Eigen::Index i = 0; i < out.b[h].size(); ++i) out.b[h][i] = flat[at++];
  }
  return out;
}

}  // namespace

ParamVector ParamVector::zeros(const Arch& arch) {
  arch.validate();
  return shaped<ParamVector>(arch);
}

std::int64_t ParamVector::size() const {
  std::int64_t k = 0;
  for (std::size_t h = 0; h < w.size(); ++h) k += w[h].size() + b[h].size();
  return k;
}

Eigen::VectorXd ParamVector::flatten() const { return flatten_impl(*this); }

ParamVector ParamVector::unflatten(const Arch& arch,
                                   const Eigen::VectorXd& flat) {
  return unflatten_impl<ParamVector>(arch, flat);
}

void ParamVector::set_zero() {
  for (auto& W : w) W.setZero();
  for (auto& v : b) v.setZero();
}

void ParamVector::add_scaled(const ParamVector& other, double c) {
  for (std::size_t h = 0; h < w.size(); ++h) {
    w[h] += c * other.w[h];
    b[h] += c * other.b[h];
  }
}

void ParamVector::decay_add(double momentum, const ParamVector& other) {
  for (std::size_t h = 0; h < w.size(); ++h) {
    w[h] = momentum * w[h] + other.w[h];
    b[h] = momentum * b[h] + other.b[h];
  }
}

double ParamVector::max_abs() const {
  double m = 0.0;
  for (const auto& W : w) m = std::max(m, W.cwiseAbs().maxCoeff());
  for (const auto& v : b)
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

bool ParamVector::all_finite() const {
  for (const auto& W : w)
    if (!W.allFinite()) return false;
  for (const auto& v : b)
    if (!v.allFinite()) return false;
  return true;
}

Mask Mask::full(const Arch& arch) {
  arch.validate();
  Mask m = shaped<Mask>(arch);
  for (auto& W : m.w) W.setOnes();
  for (auto& v : m.b) v.setOnes();
  return m;
}

Mask Mask::none(const Arch& arch) {
  arch.validate();
  return shaped<Mask>(arch);
}

std::int64_t Mask::count() const {
  double c = 0;
  for (const auto& W : w) c += W.sum();
  for (const auto& v : b) c += v.sum();
  return static_cast<std::int64_t>(std::llround(c));
}

std::int64_t Mask::size() const {
  std::int64_t k = 0;
  for (std::size_t h = 0; h < w.size(); ++h) k += w[h].size() + b[h].size();
  return k;
}

Eigen::VectorXd Mask::flatten() const { return flatten_impl(*this); }

Mask Mask::unflatten(const Arch& arch, const Eigen::VectorXd& flat) {
  return unflatten_impl<Mask>(arch, flat);
}

bool operator==(const ParamVector& a, const ParamVector& b) {
  if (a.w.size() != b.w.size()) return false;
  for (std::size_t h = 0; h < a.w.size(); ++h)
    if (a.w[h] != b.w[h] || a.b[h] != b.b[h]) return false;
  return true;
}

bool operator==(const Mask& a, const Mask& b) {
  if (a.w.size() != b.w.size()) return false;
  for (std::size_t h = 0; h < a.w.size(); ++h)
    if (a.w[h] != b.w[h] || a.b[h] != b.b[h]) return false;
  return true;
}

ParamVector masked(const ParamVector& beta, const Mask& gamma) {
  ParamVector out = beta;
  apply_mask(out, gamma);
  return out;
}

void apply_mask(ParamVector& beta, const Mask& gamma) {
  for (std::size_t h = 0; h < beta.w.size(); ++h) {
    beta.w[h] = beta.w[h].cwiseProduct(gamma.w[h]);
    beta.b[h] = beta.b[h].cwiseProduct(gamma.b[h]);
  }
}

}  // namespace sbnn
