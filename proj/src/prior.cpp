#include "sbnn/prior.hpp"

#include <cmath>
#include <stdexcept>

#include "sbnn/net.hpp"

namespace sbnn {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// log[(1-l)phi(x;s0) + l phi(x;s1)] via log-sum-exp.
struct MixTerms {
  double la;  // log[(1-lambda) phi(x; sigma0_sq)]
  double lb;  // log[lambda phi(x; sigma1_sq)]
};

MixTerms mix_terms(double x, const PriorHyper& h) {
  const double x2 = x * x;
  MixTerms t;
  t.la = std::log1p(-h.lambda) - 0.5 * (kLogTwoPi + std::log(h.sigma0_sq)) -
         0.5 * x2 / h.sigma0_sq;
  t.lb = std::log(h.lambda) - 0.5 * (kLogTwoPi + std::log(h.sigma1_sq)) -
         0.5 * x2 / h.sigma1_sq;
  return t;
}

double logsumexp2(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;  // both -inf
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}
}  // namespace

void PriorHyper::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("prior: lambda must be in (0,1)");
  if (!(sigma0_sq > 0.0 && sigma0_sq < sigma1_sq))
    throw std::invalid_argument("prior: need 0 < sigma0_sq < sigma1_sq");
}

double log_prior_scalar(double x, const PriorHyper& h) {
  if (h.lambda >= 1.0) {
    // pure slab
    return -0.5 * (kLogTwoPi + std::log(h.sigma1_sq)) -
           0.5 * x * x / h.sigma1_sq;
  }
  const MixTerms t = mix_terms(x, h);
  return logsumexp2(t.la, t.lb);
}

double log_prior(const ParamVector& beta, const PriorHyper& h) {
  double s = 0.0;
  for (const auto& W : beta.w)
    for (Eigen::Index i = 0; i < W.size(); ++i)
      s += log_prior_scalar(W(i), h);
  for (const auto& v : beta.b)
    for (Eigen::Index i = 0; i < v.size(); ++i)
      s += log_prior_scalar(v[i], h);
  return s;
}

double log_prior(const ParamVector& beta, const Mask& gamma,
                 const PriorHyper& h) {
  double s = 0.0;
  for (std::size_t l = 0; l < beta.w.size(); ++l) {
    const auto& W = beta.w[l];
    const auto& Gw = gamma.w[l];
    for (Eigen::Index i = 0; i < W.size(); ++i)
      if (Gw(i) != 0.0) s += log_prior_scalar(W(i), h);
    const auto& v = beta.b[l];
    const auto& Gb = gamma.b[l];
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (Gb[i] != 0.0) s += log_prior_scalar(v[i], h);
  }
  return s;
}

double inclusion_prob(double beta_i, const PriorHyper& h) {
  if (h.lambda >= 1.0) return 1.0;
  const double x2 = beta_i * beta_i;
  // log b - log a with the common 1/sqrt(2 pi) factor cancelled.
  const double la = std::log1p(-h.lambda) - 0.5 * std::log(h.sigma0_sq) -
                    0.5 * x2 / h.sigma0_sq;
  const double lb = std::log(h.lambda) - 0.5 * std::log(h.sigma1_sq) -
                    0.5 * x2 / h.sigma1_sq;
  return stable_sigmoid(lb - la);
}

double log_prior_grad_scalar(double x, const PriorHyper& h) {
  const double p = inclusion_prob(x, h);
  return -x * ((1.0 - p) / h.sigma0_sq + p / h.sigma1_sq);
}

namespace {

struct PriorGradCoefs {
  double c0, c1, a0, a1;
  explicit PriorGradCoefs(const PriorHyper& h)
      : c0(std::log(h.lambda) - std::log1p(-h.lambda) +
           0.5 * (std::log(h.sigma0_sq) - std::log(h.sigma1_sq))),
        c1(0.5 * (1.0 / h.sigma0_sq - 1.0 / h.sigma1_sq)),
        a0(1.0 / h.sigma0_sq),
        a1(1.0 / h.sigma1_sq) {}
};

// grad_block += scale * dlogprior(x) [∘ mask] elementwise, with
// pi = sigmoid(c0 + c1 x^2) and dlogprior = -x (a0 - pi (a0 - a1)).
template <class XBlock, class GBlock>
void accumulate_block(const XBlock& x, GBlock& g, const PriorGradCoefs& c,
                      double scale) {
  auto pi = 1.0 / (1.0 + (-(c.c0 + c.c1 * x.square())).exp());
  g.array() -= scale * x * (c.a0 - (c.a0 - c.a1) * pi);
}

template <class XBlock, class GBlock, class MBlock>
void accumulate_block(const XBlock& x, GBlock& g, const PriorGradCoefs& c,
                      double scale, const MBlock& mask) {
  auto pi = 1.0 / (1.0 + (-(c.c0 + c.c1 * x.square())).exp());
  g.array() -= scale * mask * x * (c.a0 - (c.a0 - c.a1) * pi);
}

}  // namespace

void accumulate_log_prior_grad(const ParamVector& beta, const PriorHyper& h,
                               double scale, ParamVector& grad,
                               const Mask* gamma) {
  const PriorGradCoefs c(h);
  for (std::size_t l = 0; l < beta.w.size(); ++l) {
    if (gamma) {
      accumulate_block(beta.w[l].array(), grad.w[l], c, scale,
                       gamma->w[l].array());
      accumulate_block(beta.b[l].array(), grad.b[l], c, scale,
                       gamma->b[l].array());
    } else {
      accumulate_block(beta.w[l].array(), grad.w[l], c, scale);
      accumulate_block(beta.b[l].array(), grad.b[l], c, scale);
    }
  }
}

ParamVector log_prior_grad(const ParamVector& beta, const PriorHyper& h) {
  ParamVector g = beta;
  g.set_zero();
  accumulate_log_prior_grad(beta, h, 1.0, g);
  return g;
}

ParamVector log_prior_grad(const ParamVector& beta, const Mask& gamma,
                           const PriorHyper& h) {
  ParamVector g = beta;
  g.set_zero();
  accumulate_log_prior_grad(beta, h, 1.0, g, &gamma);
  return g;
}

ThresholdResult threshold(const PriorHyper& h) {
  const double sigma0 = std::sqrt(h.sigma0_sq);
  const double sigma1 = std::sqrt(h.sigma1_sq);
  const double odds = (1.0 - h.lambda) / h.lambda * (sigma1 / sigma0);
  if (!(odds > 1.0)) return {0.0, true};
  const double scale = std::sqrt(2.0) * sigma0 * sigma1 /
                       std::sqrt(h.sigma1_sq - h.sigma0_sq);
  return {scale * std::sqrt(std::log(odds)), false};
}

Mask sparsify(const ParamVector& beta, const PriorHyper& h) {
  const double thr = threshold(h).value;
  Mask m;
  m.w.reserve(beta.w.size());
  m.b.reserve(beta.b.size());
  for (const auto& W : beta.w)
    m.w.emplace_back(
        (W.array().abs() > thr).template cast<double>().matrix());
  for (const auto& v : beta.b)
    m.b.emplace_back(
        (v.array().abs() > thr).template cast<double>().matrix());
  return m;
}

}  // namespace sbnn
