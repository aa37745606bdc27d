#pragma once

#include "sbnn/params.hpp"

namespace sbnn {

// Two-component Gaussian mixture prior, applied independently to every
// weight and bias: beta_i ~ lambda*N(0, sigma1_sq) + (1-lambda)*N(0, sigma0_sq)
// with sigma0_sq < sigma1_sq (spike and slab variances).
struct PriorHyper {
  double lambda = 1e-5;
  double sigma0_sq = 1e-4;
  double sigma1_sq = 1e-2;

  // Throws std::invalid_argument unless 0 < lambda < 1 and
  // 0 < sigma0_sq < sigma1_sq. The mixture math below also accepts the
  // degenerate lambda == 1 (pure slab), which validate() rejects; that case
  // is only reachable by constructing the aggregate directly.
  void validate() const;
};

// log pi(beta) = sum_i log[(1-lambda) phi(beta_i; 0, sigma0_sq)
//                          + lambda phi(beta_i; 0, sigma1_sq)],
// evaluated in log-space (finite for |beta| up to ~1e3 even with tiny
// sigma0).
double log_prior(const ParamVector& beta, const PriorHyper& h);
double log_prior_scalar(double beta_i, const PriorHyper& h);
// Restricted form: only coordinates with gamma_i = 1 contribute.
double log_prior(const ParamVector& beta, const Mask& gamma,
                 const PriorHyper& h);

// d log pi / d beta_i = -beta_i [ (1-p_i)/sigma0_sq + p_i/sigma1_sq ],
// p_i = inclusion_prob(beta_i).
ParamVector log_prior_grad(const ParamVector& beta, const PriorHyper& h);
double log_prior_grad_scalar(double beta_i, const PriorHyper& h);
// Restricted gradient: zero outside gamma.
ParamVector log_prior_grad(const ParamVector& beta, const Mask& gamma,
                           const PriorHyper& h);

// grad += scale * d(log prior)/d(beta), restricted to gamma when given.
// Vectorized form used by the SGD inner loop.
void accumulate_log_prior_grad(const ParamVector& beta, const PriorHyper& h,
                               double scale, ParamVector& grad,
                               const Mask* gamma = nullptr);

// pi(gamma_i = 1 | beta_i) = b_i / (a_i + b_i) with
// a_i = ((1-lambda)/sigma0) exp(-beta_i^2 / (2 sigma0_sq)),
// b_i = (lambda/sigma1)   exp(-beta_i^2 / (2 sigma1_sq)),
// computed as a stable sigmoid of log b_i - log a_i.
double inclusion_prob(double beta_i, const PriorHyper& h);

// The |beta| at which a_i = b_i (inclusion probability one half):
// sqrt(2)*sigma0*sigma1/sqrt(sigma1_sq - sigma0_sq)
//   * sqrt(log(((1-lambda)/lambda) * (sigma1/sigma0))).
// When ((1-lambda)/lambda)*(sigma1/sigma0) <= 1 the crossing does not
// exist; the result is flagged degenerate with value 0 (every nonzero
// weight survives sparsification).
struct ThresholdResult {
  double value = 0.0;
  bool degenerate = false;
};
ThresholdResult threshold(const PriorHyper& h);

// gamma_i = 1 iff |beta_i| > threshold(h) (ties dropped).
Mask sparsify(const ParamVector& beta, const PriorHyper& h);

}  // namespace sbnn
