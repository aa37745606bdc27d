#pragma once

#include <optional>
#include <string>

#include "sbnn/train.hpp"

namespace sbnn {

enum class SelectionMode { kEvidence, kBic };
std::string to_string(SelectionMode m);
SelectionMode selection_mode_from_string(const std::string& s);

// A smooth objective seen through a fixed set of free coordinates, as used
// for the Laplace approximation at a sparsified mode. The network adapter
// below is the production implementation; tests plug in closed-form
// objectives directly.
class RestrictedObjective {
 public:
  virtual ~RestrictedObjective() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const = 0;
};

// h_n restricted to the coordinates selected by gamma (order: canonical
// flat order of the selected entries). Unselected coordinates are pinned
// at zero; the prior runs over the selected coordinates only.
class NetRestrictedObjective : public RestrictedObjective {
 public:
  NetRestrictedObjective(const Arch& arch, const Dataset& train,
                         const PriorHyper& prior, const Mask& gamma);
  Eigen::Index dim() const override { return selected_.size(); }
  double value(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const override;

  Eigen::VectorXd pack(const ParamVector& beta) const;
  ParamVector unpack(const Eigen::VectorXd& theta) const;

 private:
  Arch arch_;       // possibly column-reduced
  Dataset data_;    // owned copy (reduced when profitable)
  PriorHyper prior_;
  Mask mask_;
  std::optional<ColumnReduction> reduction_;
  Arch full_arch_;
  std::vector<Eigen::Index> selected_;  // flat indices, canonical order
};

// Central finite differences of the analytic gradient,
// step 1e-4 * max(1, |theta_k|) per coordinate, symmetrized afterwards.
struct HessianResult {
  Eigen::MatrixXd hessian;  // symmetrized
  double max_asymmetry = 0.0;
};
HessianResult hessian_restricted(const RestrictedObjective& obj,
                                 const Eigen::VectorXd& theta_hat,
                                 double rel_step = 1e-4);

// log Evidence = n h_n - (1/2) logdet((n/2pi) (-H)), computed through a
// Cholesky factorization of -H with escalating relative jitter up to
// 1e-6 * mean diagonal scale. ok=false flags an indefinite Hessian (caller
// falls back to the BIC surrogate).
struct LogEvidenceResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  double jitter = 0.0;
};
LogEvidenceResult log_evidence(double n, double h_at_mode,
                               const Eigen::MatrixXd& hessian,
                               double max_rel_jitter = 1e-6);

// n h_n - (1/2) |gamma| log n.
double bic_score(double n, double h_at_mode, std::int64_t gamma_size);

struct TryResult {
  int try_index = 0;  // 1-based
  std::string status = "ok";  // "ok" or "diverged"
  std::string error;
  ParamVector beta_refined;
  Mask mask;
  std::optional<double> log_evidence;
  double bic = std::numeric_limits<double>::quiet_NaN();
  std::int64_t gamma_size = 0;
  double sparsity = 0.0;  // |gamma| / K_n
  // Diagnostics.
  bool hessian_spd = false;
  double hessian_jitter = 0.0;
  std::string evidence_skipped;  // non-empty when evidence was not attempted
  double h_before_refine = std::numeric_limits<double>::quiet_NaN();
  double h_after_refine = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t init_seed = 0;

  bool ok() const { return status == "ok"; }
  // Score used for winner selection under the given mode.
  double selection_score(SelectionMode mode) const;
};

struct ElicitReport {
  std::vector<TryResult> tries;
  int winner = 0;  // 1-based try index; 0 when every try failed
  SelectionMode selection_mode = SelectionMode::kBic;
};

struct ElicitOptions {
  int tries = 10;
  SelectionMode selection_mode = SelectionMode::kBic;
  std::uint64_t base_seed = 0;
  // One more sparsification after refinement (redundant-connection cleanup).
  bool second_sparsify_pass = false;
  // Evidence is attempted whenever |gamma| <= this; above it only the BIC
  // surrogate is reported.
  std::int64_t evidence_dim_cap = 5000;
  int workers = 0;  // 0 => hardware concurrency
  // Optional per-try training log sink factory; phase is "train"/"refine".
  std::function<TrainLogSink(int try_index, const std::string& phase)>
      log_sinks;
};

// Algorithm: T independent tries of
//   init (seed = base_seed + t) -> SGD on h_n -> threshold sparsification ->
//   restricted refinement -> evidence / BIC scoring,
// returning every try plus the argmax of the selection score (ties: smaller
// |gamma|, then smaller try index). Tries run in parallel; results do not
// depend on the worker count. A diverged try is kept in the report but
// excluded from winner selection.
ElicitReport run_algorithm1(const Arch& arch, const Dataset& train,
                            const PriorHyper& prior, const SgdConfig& cfg_train,
                            const SgdConfig& cfg_refine,
                            const ElicitOptions& opts);

// Winner index (1-based) among ok tries, 0 if none.
int pick_winner(const std::vector<TryResult>& tries, SelectionMode mode);

}  // namespace sbnn
