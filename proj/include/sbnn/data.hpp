#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sbnn/net.hpp"
#include "sbnn/select_types.hpp"

namespace sbnn {

enum class GeneratorKind {
  kStructureSelection,
  kNonlinearRegression,
  kNonlinearClassification,
};

std::string to_string(GeneratorKind k);
GeneratorKind generator_kind_from_string(const std::string& s);

struct Dataset {
  RowMatrixXd X;
  Eigen::VectorXd y;
  std::string provenance;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

struct DatasetTriple {
  Dataset train;
  Dataset validation;
  Dataset test;
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kNonlinearRegression;
  int p = 2000;
  int n_train = 10000;
  int n_val = 1000;
  int n_test = 1000;
  std::uint64_t seed = 1;

  void validate() const;
  // Minimum number of covariates the signal touches (5, 5, 4).
  int active_variables() const;
};

// Correlated covariates: per row, x_j = (e + z_j)/sqrt(2) with e and the
// z_j independent standard normals truncated to [-10, 10]. Pairwise column
// correlation is about 0.5. Each row draws from its own stream derived from
// (seed, row), so the result does not depend on evaluation order.
RowMatrixXd gen_covariates(int n, int p, std::uint64_t seed);

// y = tanh(2 tanh(2x1 - x2)) + 2 tanh(tanh(x3 - 2x4) - tanh(2x5)) + eps.
DatasetTriple gen_structure_selection(const GeneratorSpec& spec);
// y = 5 x2/(1 + x1^2) + 5 sin(x3 x4) + 2 x5 + eps.
DatasetTriple gen_nonlinear_regression(const GeneratorSpec& spec);
// y = 1 iff exp(x1) + x2^2 + 5 sin(x3 x4) - 3 > 0, each split balanced to
// exactly floor(n/2) positives by stratified rejection.
DatasetTriple gen_nonlinear_classification(const GeneratorSpec& spec);

DatasetTriple generate(const GeneratorSpec& spec);

// Noise-free signal value of each generator at a covariate row (used by
// generators and exposed for tests).
double structure_selection_signal(const Eigen::Ref<const Eigen::VectorXd>& x);
double nonlinear_regression_signal(const Eigen::Ref<const Eigen::VectorXd>& x);
double classification_score(const Eigen::Ref<const Eigen::VectorXd>& x);

// Ground truth for each benchmark: active variable set (1-based), and for
// the structure-selection model the generating connection mask on the
// p-5-3-1 skeleton it was built from.
SelectionTruth generator_truth(const GeneratorSpec& spec);
Arch generator_fit_arch(const GeneratorSpec& spec);
Task generator_task(GeneratorKind kind);

// CSV with header x1,...,xp,y; values round-trip exactly (shortest
// representation that parses back to the same double).
void save_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

}  // namespace sbnn
