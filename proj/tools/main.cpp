#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <mutex>

#include "sbnn/checkpoint.hpp"
#include "sbnn/config.hpp"
#include "sbnn/data.hpp"
#include "sbnn/elicit.hpp"
#include "sbnn/select.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;    // usage or config errors
constexpr int kExitRuntime = 2;  // runtime failures

// Per-replicate deterministic seed strides (documented in the README).
constexpr std::uint64_t kReplicateSeedStride = 1000003;

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

fs::path apply_output_root(const fs::path& p) {
  const char* root = std::getenv("SBNN_OUTPUT_ROOT");
  if (root && *root && p.is_relative()) return fs::path(root) / p;
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
  std::string kind;
  int p = 0;
  int n_train = 10000;
  int n_val = 1000;
  int n_test = 1000;
  std::uint64_t seed = 1;
  std::string out = "data";
};

int cmd_gen(const GenArgs& a) {
  GeneratorSpec spec;
  spec.kind = generator_kind_from_string(a.kind);
  spec.p = a.p > 0 ? a.p
                   : (spec.kind == GeneratorKind::kNonlinearRegression ? 2000
                                                                       : 1000);
  spec.n_train = a.n_train;
  spec.n_val = a.n_val;
  spec.n_test = a.n_test;
  spec.seed = a.seed;
  spec.validate();

  const fs::path out = apply_output_root(a.out);
  fs::create_directories(out);
  const DatasetTriple triple = generate(spec);
  save_csv(triple.train, out / "train.csv");
  if (spec.n_val > 0) save_csv(triple.validation, out / "validation.csv");
  save_csv(triple.test, out / "test.csv");

  json m;
  m["format"] = "sbnn_dataset_v1";
  m["kind"] = to_string(spec.kind);
  m["p"] = spec.p;
  m["n_train"] = spec.n_train;
  m["n_val"] = spec.n_val;
  m["n_test"] = spec.n_test;
  m["seed"] = spec.seed;
  m["task"] = to_string(generator_task(spec.kind));
  write_text(out / "manifest.json", m.dump(2) + "\n");

  std::cout << "wrote " << (out / "train.csv").string() << " ("
            << spec.n_train << " rows), test.csv (" << spec.n_test
            << " rows)";
  if (spec.n_val > 0) std::cout << ", validation.csv (" << spec.n_val << " rows)";
  std::cout << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- elicit ----

json try_to_json(const TryResult& t, const Arch& arch, const Dataset& train,
                 const Dataset& test, const std::string& ckpt_name) {
  json j;
  j["try"] = t.try_index;
  j["status"] = t.status;
  if (!t.error.empty()) j["error"] = t.error;
  j["init_seed"] = t.init_seed;
  if (!t.ok()) return j;

  j["bic"] = t.bic;
  if (t.log_evidence)
    j["log_evidence"] = *t.log_evidence;
  else
    j["log_evidence"] = nullptr;
  j["gamma_size"] = t.gamma_size;
  j["sparsity"] = t.sparsity;
  j["hessian"]["spd"] = t.hessian_spd;
  j["hessian"]["jitter"] = t.hessian_jitter;
  j["hessian"]["skipped"] = t.evidence_skipped;
  j["h_before_refine"] = t.h_before_refine;
  j["h_after_refine"] = t.h_after_refine;
  j["checkpoint"] = ckpt_name;

  const std::set<int> vars = effective_variables(t.mask);
  j["effective_variables"] = std::vector<int>(vars.begin(), vars.end());
  if (arch.task == Task::kRegression) {
    const RegressionMetrics m =
        regression_metrics(arch, t.beta_refined, t.mask, train, test);
    j["metric"]["msfe"] = m.msfe;
    j["metric"]["mspe"] = m.mspe;
  } else {
    const ClassificationMetrics m =
        classification_metrics(arch, t.beta_refined, t.mask, train, test);
    j["metric"]["fa"] = m.fa;
    j["metric"]["pa"] = m.pa;
  }
  return j;
}

std::string ckpt_name_for(int try_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "try_%02d.ckpt", try_index);
  return buf;
}

int run_replicate(const RunConfig& cfg, int replicate, const fs::path& out_dir,
                  json& replicate_entry) {
  // Dataset for this replicate.
  DatasetTriple triple;
  std::uint64_t dataset_seed = 0;
  if (cfg.data.generator) {
    GeneratorSpec spec = *cfg.data.generator;
    spec.seed = spec.seed + static_cast<std::uint64_t>(replicate);
    dataset_seed = spec.seed;
    triple = generate(spec);
  } else {
    triple.train = load_csv(cfg.data.csv->train);
    triple.test = load_csv(cfg.data.csv->test);
    if (!cfg.data.csv->validation.empty())
      triple.validation = load_csv(cfg.data.csv->validation);
  }
  if (triple.train.p() != cfg.arch.input_dim())
    throw std::invalid_argument("dataset width does not match arch input");

  fs::create_directories(out_dir / "logs");

  ElicitOptions opts;
  opts.tries = cfg.tries;
  opts.selection_mode = cfg.selection_mode;
  opts.base_seed =
      cfg.base_seed + kReplicateSeedStride * static_cast<std::uint64_t>(replicate);
  opts.second_sparsify_pass = cfg.second_sparsify_pass;
  opts.evidence_dim_cap = cfg.evidence_dim_cap;
  opts.workers = cfg.workers;

  std::mutex log_mu;
  std::vector<std::shared_ptr<std::ofstream>> log_files;
  opts.log_sinks = [&](int t, const std::string& phase) -> TrainLogSink {
    char buf[64];
    std::snprintf(buf, sizeof buf, "try_%02d_%s.csv", t, phase.c_str());
    auto f = std::make_shared<std::ofstream>(out_dir / "logs" / buf);
    *f << "iteration,h_estimate,wall_ms\n";
    {
      std::lock_guard<std::mutex> lk(log_mu);
      log_files.push_back(f);
    }
    return [f](const TrainLogRecord& r) {
      *f << r.iteration << ',' << fmt_double(r.h_estimate) << ','
         << fmt_double(r.wall_ms) << '\n';
    };
  };

  const ElicitReport report = run_algorithm1(
      cfg.arch, triple.train, cfg.prior, cfg.train, cfg.refine, opts);
  log_files.clear();  // flush/close logs

  // Checkpoints.
  for (const TryResult& t : report.tries) {
    if (!t.ok()) continue;
    Checkpoint ck{cfg.arch, t.beta_refined, t.mask, t.init_seed};
    save_checkpoint(ck, out_dir / ckpt_name_for(t.try_index));
  }

  // Manifest.
  json m;
  m["format"] = "sbnn_run_v1";
  m["replicate"] = replicate;
  m["dataset_seed"] = dataset_seed;
  m["n_train"] = triple.train.n();
  m["k_n"] = cfg.arch.param_count();
  m["selection_mode"] = to_string(report.selection_mode);
  m["winner"] = report.winner;
  m["base_seed"] = opts.base_seed;
  json tries = json::array();
  for (const TryResult& t : report.tries)
    tries.push_back(try_to_json(t, cfg.arch, triple.train, triple.test,
                                t.ok() ? ckpt_name_for(t.try_index) : ""));
  m["tries"] = tries;
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");

  // Scores table: one row per try.
  std::string scores = "try,log_evidence,bic,gamma_size,metric\n";
  for (const TryResult& t : report.tries) {
    scores += std::to_string(t.try_index);
    scores += ',';
    if (t.ok() && t.log_evidence) scores += fmt_double(*t.log_evidence);
    scores += ',';
    if (t.ok()) scores += fmt_double(t.bic);
    scores += ',';
    if (t.ok()) scores += std::to_string(t.gamma_size);
    scores += ',';
    if (t.ok()) {
      const json tj = try_to_json(t, cfg.arch, triple.train, triple.test, "");
      const double metric = cfg.arch.task == Task::kRegression
                                ? tj["metric"]["mspe"].get<double>()
                                : tj["metric"]["pa"].get<double>();
      scores += fmt_double(metric);
    }
    scores += '\n';
  }
  write_text(out_dir / "scores.csv", scores);

  replicate_entry["replicate"] = replicate;
  replicate_entry["dir"] = out_dir.filename().string();
  replicate_entry["dataset_seed"] = dataset_seed;
  replicate_entry["winner"] = report.winner;
  return report.winner == 0 ? kExitRuntime : kExitOk;
}

int cmd_elicit(const RunConfig& cfg) {
  const fs::path out = apply_output_root(cfg.output_dir);
  fs::create_directories(out);

  json run;
  run["format"] = "sbnn_run_set_v1";
  run["config"] = json::parse(config_to_json(cfg));
  json reps = json::array();

  int rc = kExitOk;
  for (int r = 0; r < cfg.replicates; ++r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep_%02d", r);
    json entry;
    const int one = run_replicate(cfg, r, out / buf, entry);
    reps.push_back(entry);
    if (one != kExitOk) rc = one;
    std::cout << "replicate " << r << ": winner try " << entry["winner"]
              << "\n";
  }
  run["replicates"] = reps;
  write_text(out / "run_manifest.json", run.dump(2) + "\n");
  std::cout << "run manifest: " << (out / "run_manifest.json").string() << "\n";
  return rc;
}

// --------------------------------------------------------------- eval ----

int cmd_eval(const std::string& ckpt_path, const std::string& train_path,
             const std::string& test_path) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  const Dataset train = load_csv(train_path);
  const Dataset test = load_csv(test_path);
  if (train.p() != ck.arch.input_dim() || test.p() != ck.arch.input_dim())
    throw std::invalid_argument("dataset width does not match checkpoint arch");

  std::cout << "key,value\n";
  std::cout << "checkpoint," << ckpt_path << "\n";
  std::cout << "task," << to_string(ck.arch.task) << "\n";
  std::cout << "gamma_size," << ck.gamma.count() << "\n";
  const std::set<int> vars = effective_variables(ck.gamma);
  std::cout << "effective_variables,";
  bool first = true;
  for (int v : vars) {
    if (!first) std::cout << ' ';
    std::cout << 'x' << v;
    first = false;
  }
  std::cout << "\n";
  if (ck.arch.task == Task::kRegression) {
    const RegressionMetrics m =
        regression_metrics(ck.arch, ck.beta, ck.gamma, train, test);
    std::cout << "msfe," << fmt_double(m.msfe) << "\n";
    std::cout << "mspe," << fmt_double(m.mspe) << "\n";
  } else {
    const ClassificationMetrics m =
        classification_metrics(ck.arch, ck.beta, ck.gamma, train, test);
    std::cout << "fa," << fmt_double(m.fa) << "\n";
    std::cout << "pa," << fmt_double(m.pa) << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------- report ----

struct WinnerInfo {
  int replicate = 0;
  int winner = 0;
  std::set<int> variables;
  double metric = 0.0;  // mspe or pa
  std::string ckpt;
};

int cmd_report(const std::string& run_dir_arg) {
  const fs::path run_dir = run_dir_arg;
  std::ifstream rf(run_dir / "run_manifest.json");
  if (!rf)
    throw std::invalid_argument("missing run_manifest.json under " +
                                run_dir.string());
  json run;
  rf >> run;
  const RunConfig cfg =
      config_from_json(run.at("config").dump());
  const bool regression = cfg.arch.task == Task::kRegression;

  std::optional<SelectionTruth> truth;
  if (cfg.data.generator) truth = generator_truth(*cfg.data.generator);

  std::vector<WinnerInfo> winners;
  std::string figure3 = "replicate,try,bic,log_evidence,";
  figure3 += regression ? "mspe\n" : "pa\n";
  std::vector<std::set<int>> winner_vars;

  for (const json& entry : run.at("replicates")) {
    const fs::path rep_dir = run_dir / entry.at("dir").get<std::string>();
    std::ifstream mf(rep_dir / "manifest.json");
    if (!mf)
      throw std::invalid_argument("missing manifest.json under " +
                                  rep_dir.string());
    json m;
    mf >> m;
    const int winner = m.at("winner").get<int>();
    for (const json& t : m.at("tries")) {
      if (t.at("status").get<std::string>() != "ok") continue;
      figure3 += std::to_string(m.at("replicate").get<int>());
      figure3 += ',';
      figure3 += std::to_string(t.at("try").get<int>());
      figure3 += ',';
      figure3 += fmt_double(t.at("bic").get<double>());
      figure3 += ',';
      if (!t.at("log_evidence").is_null())
        figure3 += fmt_double(t.at("log_evidence").get<double>());
      figure3 += ',';
      figure3 += fmt_double(regression
                                ? t.at("metric").at("mspe").get<double>()
                                : t.at("metric").at("pa").get<double>());
      figure3 += '\n';
      if (t.at("try").get<int>() == winner) {
        WinnerInfo wi;
        wi.replicate = m.at("replicate").get<int>();
        wi.winner = winner;
        for (int v : t.at("effective_variables").get<std::vector<int>>())
          wi.variables.insert(v);
        wi.metric = regression ? t.at("metric").at("mspe").get<double>()
                               : t.at("metric").at("pa").get<double>();
        wi.ckpt = (rep_dir / t.at("checkpoint").get<std::string>()).string();
        winners.push_back(wi);
      }
    }
  }

  std::string summary = "replicate,winner_try,selected_variables,";
  summary += regression ? "mspe\n" : "pa\n";
  for (const auto& wi : winners) {
    summary += std::to_string(wi.replicate);
    summary += ',';
    summary += std::to_string(wi.winner);
    summary += ',';
    bool first = true;
    for (int v : wi.variables) {
      if (!first) summary += ' ';
      summary += 'x' + std::to_string(v);
      first = false;
    }
    summary += ',';
    summary += fmt_double(wi.metric);
    summary += '\n';
    winner_vars.push_back(wi.variables);
  }

  const fs::path report_dir = run_dir / "report";
  fs::create_directories(report_dir);
  write_text(report_dir / "summary.csv", summary);
  write_text(report_dir / "figure3.csv", figure3);

  std::cout << summary;
  if (truth && !winners.empty()) {
    const auto [fsr, nsr] = fsr_nsr(truth->true_variables, winner_vars);
    std::cout << "variable_fsr," << fmt_double(fsr) << "\n";
    std::cout << "variable_nsr," << fmt_double(nsr) << "\n";
    std::string extra = "metric,value\nvariable_fsr," + fmt_double(fsr) +
                        "\nvariable_nsr," + fmt_double(nsr) + "\n";

    if (truth->true_connections) {
      std::vector<std::set<std::int64_t>> conn_sets;
      const std::set<std::int64_t> truth_set =
          connection_set(*truth->true_connections);
      for (const auto& wi : winners) {
        const Checkpoint ck = load_checkpoint(wi.ckpt);
        const Mask aligned =
            align_mask(ck.gamma, *truth->true_connections, ck.arch);
        conn_sets.push_back(connection_set(aligned));
      }
      const auto [cfsr, cnsr] = fsr_nsr(truth_set, conn_sets);
      std::cout << "connection_fsr," << fmt_double(cfsr) << "\n";
      std::cout << "connection_nsr," << fmt_double(cnsr) << "\n";
      extra += "connection_fsr," + fmt_double(cfsr) + "\nconnection_nsr," +
               fmt_double(cnsr) + "\n";
    }
    write_text(report_dir / "selection.csv", extra);
  }

  double mean = 0.0;
  for (const auto& wi : winners) mean += wi.metric;
  if (!winners.empty()) mean /= static_cast<double>(winners.size());
  double sd = 0.0;
  if (winners.size() > 1) {
    for (const auto& wi : winners) sd += (wi.metric - mean) * (wi.metric - mean);
    sd = std::sqrt(sd / static_cast<double>(winners.size() - 1));
  }
  std::cout << (regression ? "mspe_mean," : "pa_mean,") << fmt_double(mean)
            << "\n";
  std::cout << (regression ? "mspe_sd," : "pa_sd,") << fmt_double(sd) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian neural network elicitation"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic benchmark dataset");
  gen->add_option("--kind", gen_args.kind,
                  "structure|regression|classification (or full names)")
      ->required();
  gen->add_option("--p", gen_args.p, "covariate count (default per kind)");
  gen->add_option("--n-train", gen_args.n_train, "training rows");
  gen->add_option("--n-val", gen_args.n_val, "validation rows (0 to skip)");
  gen->add_option("--n-test", gen_args.n_test, "test rows");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--out", gen_args.out, "output directory");

  std::string config_path;
  std::string out_override;
  int workers_override = -1;
  int replicates_override = -1;
  int tries_override = -1;
  auto* elicit =
      app.add_subcommand("elicit", "Run the full elicitation pipeline");
  elicit->add_option("--config", config_path, "run config (json)")->required();
  elicit->add_option("--out", out_override, "override output_dir");
  elicit->add_option("--workers", workers_override, "override worker count");
  elicit->add_option("--replicates", replicates_override,
                     "override replicate count");
  elicit->add_option("--tries", tries_override, "override tries (T)");

  std::string ckpt_path, train_path, test_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on datasets");
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--train", train_path, "training csv")->required();
  eval->add_option("--test", test_path, "test csv")->required();

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Aggregate a finished run");
  report->add_option("--run-dir", run_dir, "elicit output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (elicit->parsed()) {
      RunConfig cfg = load_config(config_path);
      if (!out_override.empty()) cfg.output_dir = out_override;
      if (workers_override >= 0) cfg.workers = workers_override;
      if (replicates_override >= 1) cfg.replicates = replicates_override;
      if (tries_override >= 1) cfg.tries = tries_override;
      cfg.validate(true);
      return cmd_elicit(cfg);
    }
    if (eval->parsed()) return cmd_eval(ckpt_path, train_path, test_path);
    if (report->parsed()) return cmd_report(run_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
