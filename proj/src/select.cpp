#include "sbnn/select.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace sbnn {

std::set<int> effective_variables(const Mask& gamma) {
  const int depth = static_cast<int>(gamma.w.size());
  // Backward reachability from the output unit through active weights.
  std::vector<bool> reach(gamma.w[depth - 1].rows(), true);
  for (int h = depth - 1; h >= 0; --h) {
    const auto& W = gamma.w[h];
    std::vector<bool> below(W.cols(), false);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      if (!reach[i]) continue;
      for (Eigen::Index j = 0; j < W.cols(); ++j)
        if (W(i, j) != 0.0) below[j] = true;
    }
    reach.swap(below);
  }
  std::set<int> vars;
  for (std::size_t j = 0; j < reach.size(); ++j)
    if (reach[j]) vars.insert(static_cast<int>(j) + 1);
  return vars;
}

std::set<std::int64_t> connection_set(const Mask& gamma) {
  const Eigen::VectorXd flat = gamma.flatten();
  std::set<std::int64_t> out;
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    if (flat[i] != 0.0) out.insert(i);
  return out;
}

namespace {

// Permutes the hidden units of layer l (0-based hidden layer index):
// rows of w[l], entries of b[l], and columns of w[l+1]. perm[i] is the
// source unit placed at position i.
Mask permute_hidden(const Mask& m, int l, const std::vector<int>& perm) {
  Mask out = m;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.w[l].row(i) = m.w[l].row(perm[i]);
    out.b[l][i] = m.b[l][perm[i]];
    out.w[l + 1].col(i) = m.w[l + 1].col(perm[i]);
  }
  return out;
}

std::int64_t symmetric_difference(const Mask& a, const Mask& b) {
  std::int64_t d = 0;
  for (std::size_t l = 0; l < a.w.size(); ++l) {
    d += static_cast<std::int64_t>(
        (a.w[l] - b.w[l]).cwiseAbs().sum() + 0.5);
    d += static_cast<std::int64_t>(
        (a.b[l] - b.b[l]).cwiseAbs().sum() + 0.5);
  }
  return d;
}

std::int64_t factorial(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Mask align_mask(const Mask& selected, const Mask& truth, const Arch& arch,
                std::int64_t max_combos) {
  const int hidden_layers = arch.depth() - 1;
  std::int64_t combos = 1;
  for (int l = 0; l < hidden_layers; ++l) {
    combos *= factorial(arch.layer_widths[l + 1]);
    if (combos > max_combos)
      throw std::invalid_argument(
          "align_mask: permutation space too large for exhaustive search");
  }

  // Odometer over per-layer permutations.
  std::vector<std::vector<int>> perms(hidden_layers);
  for (int l = 0; l < hidden_layers; ++l) {
    perms[l].resize(arch.layer_widths[l + 1]);
    std::iota(perms[l].begin(), perms[l].end(), 0);
  }

  Mask best = selected;
  std::int64_t best_diff = symmetric_difference(selected, truth);

  std::vector<std::vector<int>> current(hidden_layers);
  std::function<void(int, const Mask&)> recurse = [&](int l, const Mask& m) {
    if (l == hidden_layers) {
      const std::int64_t d = symmetric_difference(m, truth);
      if (d < best_diff) {
        best_diff = d;
        best = m;
      }
      return;
    }
    std::vector<int> perm(arch.layer_widths[l + 1]);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      recurse(l + 1, permute_hidden(m, l, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  recurse(0, selected);
  return best;
}

RegressionMetrics regression_metrics(const Arch& arch, const ParamVector& beta,
                                     const Mask& gamma, const Dataset& train,
                                     const Dataset& test) {
  RegressionMetrics out;
  const Eigen::VectorXd mu_tr = forward(arch, beta, gamma, train.X);
  out.msfe = (train.y - mu_tr).squaredNorm() / train.n();
  const Eigen::VectorXd mu_te = forward(arch, beta, gamma, test.X);
  out.mspe = (test.y - mu_te).squaredNorm() / test.n();
  return out;
}

ClassificationMetrics classification_metrics(const Arch& arch,
                                             const ParamVector& beta,
                                             const Mask& gamma,
                                             const Dataset& train,
                                             const Dataset& test) {
  auto accuracy = [&](const Dataset& ds) {
    const Eigen::VectorXd mu = forward(arch, beta, gamma, ds.X);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      const double pred = mu[i] > 0.0 ? 1.0 : 0.0;
      if (pred == ds.y[i]) ++correct;
    }
    return static_cast<double>(correct) / ds.n();
  };
  return {accuracy(train), accuracy(test)};
}

}  // namespace sbnn
