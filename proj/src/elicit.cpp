#include "sbnn/elicit.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "sbnn/rng.hpp"

namespace sbnn {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
}

std::string to_string(SelectionMode m) {
  return m == SelectionMode::kEvidence ? "evidence" : "bic";
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "evidence") return SelectionMode::kEvidence;
  if (s == "bic") return SelectionMode::kBic;
  throw std::invalid_argument("unknown selection mode: " + s);
}

NetRestrictedObjective::NetRestrictedObjective(const Arch& arch,
                                               const Dataset& train,
                                               const PriorHyper& prior,
                                               const Mask& gamma)
    : prior_(prior), full_arch_(arch) {
  arch.validate();
  reduction_ = reduce_active_columns(arch, train, gamma);
  if (reduction_) {
    arch_ = reduction_->arch;
    data_ = std::move(reduction_->data);
    mask_ = reduction_->mask;
  } else {
    arch_ = arch;
    data_ = train;  // copy keeps the adapter self-contained
    mask_ = gamma;
  }
  const Eigen::VectorXd flat = mask_.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    if (flat[i] != 0.0) selected_.push_back(i);
}

Eigen::VectorXd NetRestrictedObjective::pack(const ParamVector& beta) const {
  const ParamVector reduced =
      reduction_ ? reduction_->project(beta) : beta;
  const Eigen::VectorXd flat = reduced.flatten();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(selected_.size()));
  for (std::size_t k = 0; k < selected_.size(); ++k)
    theta[static_cast<Eigen::Index>(k)] = flat[selected_[k]];
  return theta;
}

ParamVector NetRestrictedObjective::unpack(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(arch_.param_count());
  for (std::size_t k = 0; k < selected_.size(); ++k)
    flat[selected_[k]] = theta[static_cast<Eigen::Index>(k)];
  ParamVector reduced = ParamVector::unflatten(arch_, flat);
  if (reduction_) return reduction_->scatter(reduced, full_arch_);
  return reduced;
}

double NetRestrictedObjective::value(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(arch_.param_count());
  for (std::size_t k = 0; k < selected_.size(); ++k)
    flat[selected_[k]] = theta[static_cast<Eigen::Index>(k)];
  const ParamVector beta = ParamVector::unflatten(arch_, flat);
  return loglik(arch_, beta, mask_, data_.X, data_.y) +
         log_prior(beta, mask_, prior_) / static_cast<double>(data_.n());
}

Eigen::VectorXd NetRestrictedObjective::gradient(
    const Eigen::VectorXd& theta) const {
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(arch_.param_count());
  for (std::size_t k = 0; k < selected_.size(); ++k)
    flat[selected_[k]] = theta[static_cast<Eigen::Index>(k)];
  const ParamVector beta = ParamVector::unflatten(arch_, flat);
  LoglikResult ll = loglik_grad(arch_, beta, mask_, data_.X, data_.y);
  accumulate_log_prior_grad(beta, prior_, 1.0 / static_cast<double>(data_.n()),
                            ll.grad, &mask_);
  const Eigen::VectorXd gflat = ll.grad.flatten();
  Eigen::VectorXd g(static_cast<Eigen::Index>(selected_.size()));
  for (std::size_t k = 0; k < selected_.size(); ++k)
    g[static_cast<Eigen::Index>(k)] = gflat[selected_[k]];
  return g;
}

HessianResult hessian_restricted(const RestrictedObjective& obj,
                                 const Eigen::VectorXd& theta_hat,
                                 double rel_step) {
  const Eigen::Index d = obj.dim();
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd theta = theta_hat;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double step = rel_step * std::max(1.0, std::abs(theta_hat[k]));
    theta[k] = theta_hat[k] + step;
    const Eigen::VectorXd gp = obj.gradient(theta);
    theta[k] = theta_hat[k] - step;
    const Eigen::VectorXd gm = obj.gradient(theta);
    theta[k] = theta_hat[k];
    H.col(k) = (gp - gm) / (2.0 * step);
  }
  HessianResult out;
  out.max_asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff();
  out.hessian = 0.5 * (H + H.transpose());
  return out;
}

LogEvidenceResult log_evidence(double n, double h_at_mode,
                               const Eigen::MatrixXd& hessian,
                               double max_rel_jitter) {
  LogEvidenceResult out;
  const Eigen::Index d = hessian.rows();
  if (d == 0) {
    out.value = n * h_at_mode;
    out.ok = true;
    return out;
  }
  Eigen::MatrixXd m = -hessian;
  double scale = m.trace() / static_cast<double>(d);
  if (!(scale > 0.0)) scale = 1.0;
  for (double rel : {0.0, 1e-10, 1e-8, max_rel_jitter}) {
    if (rel > max_rel_jitter) break;
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += rel * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      logdet += 2.0 * std::log(llt.matrixL()(i, i));
    out.value = n * h_at_mode -
                0.5 * (d * (std::log(n) - kLogTwoPi) + logdet);
    out.ok = true;
    out.jitter = rel * scale;
    return out;
  }
  return out;
}

double bic_score(double n, double h_at_mode, std::int64_t gamma_size) {
  return n * h_at_mode - 0.5 * static_cast<double>(gamma_size) * std::log(n);
}

double TryResult::selection_score(SelectionMode mode) const {
  if (mode == SelectionMode::kEvidence && log_evidence.has_value())
    return *log_evidence;
  return bic;
}

int pick_winner(const std::vector<TryResult>& tries, SelectionMode mode) {
  int best = 0;
  for (const auto& t : tries) {
    if (!t.ok()) continue;
    if (!std::isfinite(t.selection_score(mode))) continue;
    if (best == 0) {
      best = t.try_index;
      continue;
    }
    const TryResult& b = tries[best - 1];
    const double sb = b.selection_score(mode);
    const double st = t.selection_score(mode);
    if (st > sb ||
        (st == sb && (t.gamma_size < b.gamma_size ||
                      (t.gamma_size == b.gamma_size &&
                       t.try_index < b.try_index))))
      best = t.try_index;
  }
  return best;
}

namespace {

TryResult run_one_try(const Arch& arch, const Dataset& train,
                      const PriorHyper& prior, const SgdConfig& cfg_train,
                      const SgdConfig& cfg_refine, const ElicitOptions& opts,
                      int t) {
  TryResult r;
  r.try_index = t;
  r.init_seed = opts.base_seed + static_cast<std::uint64_t>(t);

  SgdConfig train_t = cfg_train;
  train_t.seed = Rng::mix(r.init_seed, Rng::mix(cfg_train.seed, 1));
  SgdConfig refine_t = cfg_refine;
  refine_t.seed = Rng::mix(r.init_seed, Rng::mix(cfg_refine.seed, 2));

  TrainLogSink train_sink, refine_sink;
  if (opts.log_sinks) {
    train_sink = opts.log_sinks(t, "train");
    refine_sink = opts.log_sinks(t, "refine");
  }

  try {
    const ParamVector beta0 = init_params(arch, r.init_seed);
    const Objective dense(arch, train, prior);
    const ParamVector beta_hat = sgd_maximize(dense, beta0, train_t, train_sink);

    Mask gamma = sparsify(beta_hat, prior);
    ParamVector beta_start = masked(beta_hat, gamma);
    Objective restricted(arch, train, prior, gamma);
    r.h_before_refine = restricted.h_n(beta_start);
    ParamVector beta_tilde =
        refine(restricted, beta_start, refine_t, refine_sink);
    r.h_after_refine = restricted.h_n(beta_tilde);

    if (opts.second_sparsify_pass) {
      gamma = sparsify(beta_tilde, prior);
      apply_mask(beta_tilde, gamma);
    }

    const Objective final_obj(arch, train, prior, gamma);
    const double h = final_obj.h_n(beta_tilde);
    const double n = static_cast<double>(train.n());
    r.gamma_size = gamma.count();
    r.sparsity = gamma.sparsity();
    r.bic = bic_score(n, h, r.gamma_size);
    if (!std::isfinite(r.bic)) throw TrainingDiverged(cfg_refine.iterations);

    if (r.gamma_size == 0) {
      r.log_evidence = n * h;
      r.hessian_spd = true;
    } else if (r.gamma_size <= opts.evidence_dim_cap) {
      const NetRestrictedObjective robj(arch, train, prior, gamma);
      const Eigen::VectorXd theta = robj.pack(beta_tilde);
      const HessianResult hess = hessian_restricted(robj, theta);
      const LogEvidenceResult ev = log_evidence(n, h, hess.hessian);
      r.hessian_spd = ev.ok;
      r.hessian_jitter = ev.jitter;
      if (ev.ok)
        r.log_evidence = ev.value;
      else
        r.evidence_skipped = "hessian_not_spd";
    } else {
      r.evidence_skipped = "gamma_above_cap";
    }

    r.beta_refined = std::move(beta_tilde);
    r.mask = std::move(gamma);
  } catch (const TrainingDiverged& e) {
    r.status = "diverged";
    r.error = e.what();
  }
  return r;
}

}  // namespace

ElicitReport run_algorithm1(const Arch& arch, const Dataset& train,
                            const PriorHyper& prior, const SgdConfig& cfg_train,
                            const SgdConfig& cfg_refine,
                            const ElicitOptions& opts) {
  if (opts.tries < 1) throw std::invalid_argument("tries must be >= 1");
  arch.validate();
  prior.validate();
  cfg_train.validate();
  cfg_refine.validate();

  ElicitReport report;
  report.selection_mode = opts.selection_mode;
  report.tries.resize(opts.tries);

  int workers = opts.workers > 0
                    ? opts.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, opts.tries));

  std::atomic<int> next{1};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t > opts.tries) return;
      try {
        report.tries[t - 1] = run_one_try(arch, train, prior, cfg_train,
                                          cfg_refine, opts, t);
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  report.winner = pick_winner(report.tries, opts.selection_mode);
  return report;
}

}  // namespace sbnn
