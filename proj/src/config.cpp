#include "sbnn/config.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace sbnn {

using nlohmann::json;

namespace {

json lr_to_json(const LrSchedule& lr) {
  json j;
  j["schedule"] =
      lr.kind == LrScheduleKind::kConstant ? "constant" : "step_decay";
  j["value"] = lr.value;
  if (lr.kind == LrScheduleKind::kStepDecay) {
    j["factor"] = lr.factor;
    j["milestones"] = lr.milestones;
  }
  return j;
}

LrSchedule lr_from_json(const json& j) {
  LrSchedule lr;
  const std::string kind = j.at("schedule").get<std::string>();
  if (kind == "constant") {
    lr.kind = LrScheduleKind::kConstant;
  } else if (kind == "step_decay") {
    lr.kind = LrScheduleKind::kStepDecay;
    lr.factor = j.at("factor").get<double>();
    lr.milestones = j.at("milestones").get<std::vector<int>>();
  } else {
    throw std::invalid_argument("unknown lr schedule: " + kind);
  }
  lr.value = j.at("value").get<double>();
  return lr;
}

json sgd_to_json(const SgdConfig& c) {
  json j;
  j["iterations"] = c.iterations;
  j["batch_size"] = c.batch_size;
  j["lr"] = lr_to_json(c.lr);
  j["momentum"] = c.momentum;
  j["prior_start_iter"] = c.prior_start_iter;
  j["seed"] = c.seed;
  j["log_every"] = c.log_every;
  return j;
}

SgdConfig sgd_from_json(const json& j) {
  SgdConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.lr = lr_from_json(j.at("lr"));
  c.momentum = j.value("momentum", 0.0);
  c.prior_start_iter = j.value("prior_start_iter", 0);
  c.seed = j.value("seed", std::uint64_t{0});
  c.log_every = j.value("log_every", 2000);
  return c;
}

}  // namespace

void RunConfig::validate(bool check_files) const {
  arch.validate();
  prior.validate();
  train.validate();
  refine.validate();
  if (tries < 1) throw std::invalid_argument("config: tries must be >= 1");
  if (replicates < 1)
    throw std::invalid_argument("config: replicates must be >= 1");
  if (evidence_dim_cap < 0)
    throw std::invalid_argument("config: evidence_dim_cap must be >= 0");
  if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
  const bool has_gen = data.generator.has_value();
  const bool has_csv = data.csv.has_value();
  if (has_gen == has_csv)
    throw std::invalid_argument(
        "config: data must name exactly one of generator/csv");
  if (has_gen) {
    data.generator->validate();
    if (data.generator->p != arch.input_dim())
      throw std::invalid_argument("config: generator p != arch input width");
    if (generator_task(data.generator->kind) != arch.task)
      throw std::invalid_argument("config: generator kind and task disagree");
  }
  if (has_csv) {
    if (replicates != 1)
      throw std::invalid_argument("config: csv data requires replicates == 1");
    if (data.csv->train.empty() || data.csv->test.empty())
      throw std::invalid_argument("config: csv needs train and test paths");
    if (check_files) {
      for (const std::string& p :
           {data.csv->train, data.csv->test, data.csv->validation}) {
        if (!p.empty() && !std::filesystem::exists(p))
          throw std::invalid_argument("config: missing file " + p);
      }
    }
  }
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["format"] = "sbnn_config_v1";
  j["arch"]["layers"] = cfg.arch.layer_widths;
  j["arch"]["activation"] = to_string(cfg.arch.activation);
  j["arch"]["task"] = to_string(cfg.arch.task);
  j["prior"]["lambda"] = cfg.prior.lambda;
  j["prior"]["sigma0_sq"] = cfg.prior.sigma0_sq;
  j["prior"]["sigma1_sq"] = cfg.prior.sigma1_sq;
  j["train"] = sgd_to_json(cfg.train);
  j["refine"] = sgd_to_json(cfg.refine);
  j["tries"] = cfg.tries;
  j["selection_mode"] = to_string(cfg.selection_mode);
  j["second_sparsify_pass"] = cfg.second_sparsify_pass;
  j["evidence_dim_cap"] = cfg.evidence_dim_cap;
  if (cfg.data.generator) {
    const auto& g = *cfg.data.generator;
    json gj;
    gj["kind"] = to_string(g.kind);
    gj["p"] = g.p;
    gj["n_train"] = g.n_train;
    gj["n_val"] = g.n_val;
    gj["n_test"] = g.n_test;
    gj["seed"] = g.seed;
    j["data"]["generator"] = gj;
  }
  if (cfg.data.csv) {
    json cj;
    cj["train"] = cfg.data.csv->train;
    cj["test"] = cfg.data.csv->test;
    if (!cfg.data.csv->validation.empty())
      cj["validation"] = cfg.data.csv->validation;
    j["data"]["csv"] = cj;
  }
  j["replicates"] = cfg.replicates;
  j["base_seed"] = cfg.base_seed;
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (j.value("format", "") != "sbnn_config_v1")
    throw std::invalid_argument("config: expected format sbnn_config_v1");

  RunConfig cfg;
  cfg.arch.layer_widths = j.at("arch").at("layers").get<std::vector<int>>();
  cfg.arch.activation =
      activation_from_string(j.at("arch").at("activation").get<std::string>());
  cfg.arch.task = task_from_string(j.at("arch").at("task").get<std::string>());
  cfg.prior.lambda = j.at("prior").at("lambda").get<double>();
  cfg.prior.sigma0_sq = j.at("prior").at("sigma0_sq").get<double>();
  cfg.prior.sigma1_sq = j.at("prior").at("sigma1_sq").get<double>();
  cfg.train = sgd_from_json(j.at("train"));
  cfg.refine = sgd_from_json(j.at("refine"));
  cfg.tries = j.value("tries", 10);
  cfg.selection_mode =
      selection_mode_from_string(j.value("selection_mode", "bic"));
  cfg.second_sparsify_pass = j.value("second_sparsify_pass", false);
  cfg.evidence_dim_cap = j.value("evidence_dim_cap", std::int64_t{5000});
  const auto& dj = j.at("data");
  if (dj.contains("generator")) {
    GeneratorSpec g;
    const auto& gj = dj.at("generator");
    g.kind = generator_kind_from_string(gj.at("kind").get<std::string>());
    g.p = gj.at("p").get<int>();
    g.n_train = gj.at("n_train").get<int>();
    g.n_val = gj.value("n_val", 0);
    g.n_test = gj.at("n_test").get<int>();
    g.seed = gj.value("seed", std::uint64_t{1});
    cfg.data.generator = g;
  }
  if (dj.contains("csv")) {
    CsvRef c;
    const auto& cj = dj.at("csv");
    c.train = cj.at("train").get<std::string>();
    c.test = cj.at("test").get<std::string>();
    c.validation = cj.value("validation", "");
    cfg.data.csv = c;
  }
  cfg.replicates = j.value("replicates", 1);
  cfg.base_seed = j.value("base_seed", std::uint64_t{0});
  cfg.workers = j.value("workers", 0);
  cfg.output_dir = j.value("output_dir", "runs/out");
  cfg.validate(false);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  f << config_to_json(cfg);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sbnn
