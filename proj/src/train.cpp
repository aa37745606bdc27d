#include "sbnn/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "sbnn/rng.hpp"

namespace sbnn {

double LrSchedule::at(int iteration) const {
  if (kind == LrScheduleKind::kConstant) return value;
  double lr = value;
  for (int m : milestones)
    if (iteration >= m) lr /= factor;
  return lr;
}

void LrSchedule::validate() const {
  if (!(value > 0.0)) throw std::invalid_argument("lr value must be > 0");
  if (kind == LrScheduleKind::kStepDecay) {
    if (!(factor > 1.0))
      throw std::invalid_argument("step_decay factor must be > 1");
    for (std::size_t i = 1; i < milestones.size(); ++i)
      if (milestones[i] <= milestones[i - 1])
        throw std::invalid_argument("milestones must be strictly increasing");
  }
}

void SgdConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must be in [0,1)");
  if (prior_start_iter < 0)
    throw std::invalid_argument("prior_start_iter must be >= 0");
  lr.validate();
}

Objective::Objective(const Arch& arch, const Dataset& train, PriorHyper prior,
                     std::optional<Mask> mask)
    : arch_(&arch), data_(&train), prior_(prior), mask_(std::move(mask)) {
  arch.validate();
  if (train.p() != arch.input_dim())
    throw std::invalid_argument("dataset width does not match arch input");
  if (train.n() < 1) throw std::invalid_argument("dataset is empty");
}

double Objective::h_n(const ParamVector& beta) const {
  if (mask_) {
    return loglik(*arch_, beta, *mask_, data_->X, data_->y) +
           log_prior(beta, *mask_, prior_) / static_cast<double>(n());
  }
  return loglik(*arch_, beta, Mask::full(*arch_), data_->X, data_->y) +
         log_prior(beta, prior_) / static_cast<double>(n());
}

ParamVector Objective::grad_h_n(const ParamVector& beta) const {
  const Mask& gamma = mask_ ? *mask_ : Mask::full(*arch_);
  LoglikResult ll = loglik_grad(*arch_, beta, gamma, data_->X, data_->y);
  accumulate_log_prior_grad(beta, prior_, 1.0 / static_cast<double>(n()),
                            ll.grad, mask_ ? &*mask_ : nullptr);
  return std::move(ll.grad);
}

std::optional<ColumnReduction> reduce_active_columns(const Arch& arch,
                                                     const Dataset& data,
                                                     const Mask& gamma,
                                                     double max_fraction) {
  const int p = arch.input_dim();
  std::vector<int> cols;
  for (int j = 0; j < p; ++j)
    if (gamma.w[0].col(j).sum() > 0.0) cols.push_back(j);
  if (cols.size() > static_cast<std::size_t>(max_fraction * p))
    return std::nullopt;
  if (cols.empty()) cols.push_back(0);  // keep shapes legal

  ColumnReduction red;
  red.columns = cols;
  red.arch = arch;
  red.arch.layer_widths[0] = static_cast<int>(cols.size());
  red.data.y = data.y;
  red.data.X.resize(data.n(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    red.data.X.col(k) = data.X.col(cols[k]);
  red.data.provenance = data.provenance + ":reduced";
  red.mask = gamma;
  red.mask.w[0].resize(gamma.w[0].rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    red.mask.w[0].col(k) = gamma.w[0].col(cols[k]);
  return red;
}

ParamVector ColumnReduction::project(const ParamVector& full) const {
  ParamVector out = full;
  out.w[0].resize(full.w[0].rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k)
    out.w[0].col(k) = full.w[0].col(columns[k]);
  return out;
}

ParamVector ColumnReduction::scatter(const ParamVector& reduced,
                                     const Arch& full_arch) const {
  ParamVector out = ParamVector::zeros(full_arch);
  for (std::size_t h = 1; h < reduced.w.size(); ++h) out.w[h] = reduced.w[h];
  for (std::size_t h = 0; h < reduced.b.size(); ++h) out.b[h] = reduced.b[h];
  for (std::size_t k = 0; k < columns.size(); ++k)
    out.w[0].col(columns[k]) = reduced.w[0].col(k);
  return out;
}

namespace {

// Shared ascent loop. `beta` must already match `arch`/`mask` shapes.
ParamVector sgd_core(const Arch& arch, const Dataset& data,
                     const PriorHyper& prior, const Mask* gamma,
                     ParamVector beta, const SgdConfig& cfg,
                     const TrainLogSink& sink) {
  const Eigen::Index n = data.n();
  if (cfg.batch_size > n)
    throw std::invalid_argument("batch_size exceeds dataset size");
  const int batches_per_epoch =
      static_cast<int>((n + cfg.batch_size - 1) / cfg.batch_size);

  if (gamma) apply_mask(beta, *gamma);

  ParamVector grad = ParamVector::zeros(arch);
  ParamVector vel = ParamVector::zeros(arch);
  NetWorkspace ws;
  RowMatrixXd xb(cfg.batch_size, data.p());
  Eigen::VectorXd yb(cfg.batch_size);

  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng shuffle_rng(Rng::mix(cfg.seed, 0x736764ULL));  // "sgd"

  const auto t0 = std::chrono::steady_clock::now();
  const double inv_n = 1.0 / static_cast<double>(n);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const int slot = iter % batches_per_epoch;
    if (slot == 0) shuffle_rng.shuffle(perm);
    const Eigen::Index lo = static_cast<Eigen::Index>(slot) * cfg.batch_size;
    const Eigen::Index bsz = std::min<Eigen::Index>(cfg.batch_size, n - lo);
    for (Eigen::Index r = 0; r < bsz; ++r) {
      xb.row(r) = data.X.row(perm[lo + r]);
      yb[r] = data.y[perm[lo + r]];
    }

    grad.set_zero();
    const double batch_ll = ws.forward_backward(
        arch, beta, xb.topRows(bsz), yb.head(bsz), grad, 1.0);
    if (!std::isfinite(batch_ll)) throw TrainingDiverged(iter);
    if (gamma) apply_mask(grad, *gamma);

    const bool prior_on = iter >= cfg.prior_start_iter;
    if (prior_on) accumulate_log_prior_grad(beta, prior, inv_n, grad, gamma);

    vel.decay_add(cfg.momentum, grad);
    beta.add_scaled(vel, cfg.lr.at(iter));

    if (sink && cfg.log_every > 0 &&
        ((iter + 1) % cfg.log_every == 0 || iter + 1 == cfg.iterations)) {
      const double lp =
          prior_on ? (gamma ? log_prior(beta, *gamma, prior)
                            : log_prior(beta, prior)) *
                         inv_n
                   : 0.0;
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
      sink(TrainLogRecord{iter + 1, batch_ll + lp, ms});
    }
  }
  return beta;
}

}  // namespace

ParamVector sgd_maximize(const Objective& obj, const ParamVector& beta0,
                         const SgdConfig& cfg, const TrainLogSink& sink) {
  cfg.validate();
  if (obj.mask()) return refine(obj, beta0, cfg, sink);
  return sgd_core(obj.arch(), obj.data(), obj.prior(), nullptr, beta0, cfg,
                  sink);
}

ParamVector refine(const Objective& obj, const ParamVector& beta0,
                   const SgdConfig& cfg, const TrainLogSink& sink) {
  cfg.validate();
  if (!obj.mask())
    throw std::invalid_argument("refine requires an objective with a mask");
  const Mask& gamma = *obj.mask();

  if (auto red = reduce_active_columns(obj.arch(), obj.data(), gamma)) {
    ParamVector b0 = red->project(beta0);
    ParamVector out = sgd_core(red->arch, red->data, obj.prior(), &red->mask,
                               std::move(b0), cfg, sink);
    return red->scatter(out, obj.arch());
  }
  return sgd_core(obj.arch(), obj.data(), obj.prior(), &gamma, beta0, cfg,
                  sink);
}

}  // namespace sbnn
