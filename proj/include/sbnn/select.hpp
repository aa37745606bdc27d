#pragma once

#include <optional>
#include <set>

#include "sbnn/net.hpp"
#include "sbnn/data.hpp"
#include "sbnn/select_types.hpp"

namespace sbnn {

// Input variables (1-based) with an active weight path to the output:
// exactly the positive entries of gamma^w(H) * ... * gamma^w(1), computed
// as boolean reachability so deep networks cannot overflow a path count.
// Bias indicators do not contribute.
std::set<int> effective_variables(const Mask& gamma);

// Pooled false/negative selection rates over replicates:
//   FSR = sum_i |S_hat_i \ S| / sum_i |S_hat_i|   (0 when nothing selected)
//   NSR = sum_i |S \ S_hat_i| / (m |S|)
template <class T>
std::pair<double, double> fsr_nsr(const std::set<T>& truth,
                                  const std::vector<std::set<T>>& selected) {
  double false_sel = 0, total_sel = 0, missed = 0;
  for (const auto& s : selected) {
    total_sel += static_cast<double>(s.size());
    for (const T& v : s)
      if (!truth.count(v)) false_sel += 1;
    for (const T& v : truth)
      if (!s.count(v)) missed += 1;
  }
  const double fsr = total_sel > 0 ? false_sel / total_sel : 0.0;
  const double denom = static_cast<double>(selected.size() * truth.size());
  const double nsr = denom > 0 ? missed / denom : 0.0;
  return {fsr, nsr};
}

// Flat canonical indices of the active connections (weights and biases).
std::set<std::int64_t> connection_set(const Mask& gamma);

// Aligns `selected` to `truth` over the hidden-unit permutation symmetry:
// exhaustively permutes the hidden units of every hidden layer and returns
// the mask minimizing the symmetric difference of connection sets against
// `truth`. Throws if the permutation space exceeds `max_combos`.
Mask align_mask(const Mask& selected, const Mask& truth, const Arch& arch,
                std::int64_t max_combos = 1000000);

struct RegressionMetrics {
  double msfe = 0.0;
  double mspe = 0.0;
};
RegressionMetrics regression_metrics(const Arch& arch, const ParamVector& beta,
                                     const Mask& gamma, const Dataset& train,
                                     const Dataset& test);

// Decision rule: predict 1 iff mu > 0 (an exact tie predicts 0).
struct ClassificationMetrics {
  double fa = 0.0;  // fitting accuracy (train)
  double pa = 0.0;  // prediction accuracy (test)
};
ClassificationMetrics classification_metrics(const Arch& arch,
                                             const ParamVector& beta,
                                             const Mask& gamma,
                                             const Dataset& train,
                                             const Dataset& test);

// Aggregate row for reports.
struct MetricsReport {
  double fsr = 0.0;
  double nsr = 0.0;
  std::optional<double> msfe, mspe, fa, pa;
  std::int64_t selected_count = 0;
};

}  // namespace sbnn
