#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "sbnn/data.hpp"
#include "sbnn/net.hpp"
#include "sbnn/prior.hpp"

namespace sbnn {

enum class LrScheduleKind { kConstant, kStepDecay };

struct LrSchedule {
  LrScheduleKind kind = LrScheduleKind::kConstant;
  double value = 0.01;
  double factor = 10.0;          // divide by this at each milestone
  std::vector<int> milestones;   // iteration numbers, strictly increasing

  double at(int iteration) const;
  void validate() const;
};

struct SgdConfig {
  int iterations = 0;
  int batch_size = 500;
  LrSchedule lr;
  double momentum = 0.0;
  int prior_start_iter = 0;  // iteration at which the prior term activates
  std::uint64_t seed = 0;
  int log_every = 2000;      // 0 disables log records

  void validate() const;
};

struct TrainLogRecord {
  int iteration = 0;
  double h_estimate = 0.0;  // minibatch loglik + (1/n) log prior
  double wall_ms = 0.0;
};
using TrainLogSink = std::function<void(const TrainLogRecord&)>;

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(int iter)
      : std::runtime_error("objective became non-finite at iteration " +
                           std::to_string(iter)),
        iteration(iter) {}
  int iteration;
};

// Normalized log-posterior h_n(beta) = (1/n) sum_i log p(y_i, x_i | beta)
//                                    + (1/n) log pi(beta)
// over a fixed training set. With a mask, beta is restricted to gamma and
// the prior runs over the selected coordinates only.
class Objective {
 public:
  Objective(const Arch& arch, const Dataset& train, PriorHyper prior,
            std::optional<Mask> mask = std::nullopt);

  // Exact full-data value; deterministic summation order.
  double h_n(const ParamVector& beta) const;
  // Full-data gradient of h_n (zero outside the mask when present).
  ParamVector grad_h_n(const ParamVector& beta) const;

  const Arch& arch() const { return *arch_; }
  const Dataset& data() const { return *data_; }
  const PriorHyper& prior() const { return prior_; }
  const std::optional<Mask>& mask() const { return mask_; }
  Eigen::Index n() const { return data_->n(); }

 private:
  const Arch* arch_;
  const Dataset* data_;
  PriorHyper prior_;
  std::optional<Mask> mask_;
};

// Stochastic gradient ascent on h_n. Minibatches are sampled without
// replacement per epoch from a stream seeded by cfg.seed; the stochastic
// gradient is the batch-mean likelihood gradient plus (1/n) times the prior
// gradient (once iteration >= prior_start_iter). Fully deterministic given
// (data, beta0, cfg). Throws TrainingDiverged if the objective goes
// non-finite.
ParamVector sgd_maximize(const Objective& obj, const ParamVector& beta0,
                         const SgdConfig& cfg, const TrainLogSink& sink = {});

// Same ascent restricted to the objective's mask: masked coordinates stay
// exactly zero throughout. Requires obj.mask().
ParamVector refine(const Objective& obj, const ParamVector& beta0,
                   const SgdConfig& cfg, const TrainLogSink& sink = {});

// When a mask leaves only a few first-layer input columns active, training
// and Hessian evaluation run on an equivalent problem with the inactive
// input columns removed. Results map back to full shape via scatter().
struct ColumnReduction {
  Arch arch;                 // input width = active column count
  Dataset data;              // reduced copy of the training matrix
  Mask mask;                 // reduced mask
  std::vector<int> columns;  // active input columns (0-based, ascending)

  ParamVector project(const ParamVector& full) const;
  ParamVector scatter(const ParamVector& reduced,
                      const Arch& full_arch) const;
};

// Builds the reduction if the mask keeps at most `max_fraction` of the
// input columns; returns nullopt otherwise.
std::optional<ColumnReduction> reduce_active_columns(
    const Arch& arch, const Dataset& data, const Mask& gamma,
    double max_fraction = 0.25);

}  // namespace sbnn
