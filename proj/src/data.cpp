#include "sbnn/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sbnn/rng.hpp"

namespace sbnn {

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::kStructureSelection: return "structure_selection";
    case GeneratorKind::kNonlinearRegression: return "nonlinear_regression";
    case GeneratorKind::kNonlinearClassification:
      return "nonlinear_classification";
  }
  return "?";
}

GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "structure_selection" || s == "structure")
    return GeneratorKind::kStructureSelection;
  if (s == "nonlinear_regression" || s == "regression")
    return GeneratorKind::kNonlinearRegression;
  if (s == "nonlinear_classification" || s == "classification")
    return GeneratorKind::kNonlinearClassification;
  throw std::invalid_argument("unknown generator kind: " + s);
}

int GeneratorSpec::active_variables() const {
  return kind == GeneratorKind::kNonlinearClassification ? 4 : 5;
}

void GeneratorSpec::validate() const {
  if (p < active_variables())
    throw std::invalid_argument("generator: p must be >= " +
                                std::to_string(active_variables()) + " for " +
                                to_string(kind));
  if (n_train < 1 || n_val < 0 || n_test < 1)
    throw std::invalid_argument("generator: invalid split sizes");
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr std::uint64_t kCovariateStream = 0x636f76ULL;   // "cov"
constexpr std::uint64_t kNoiseStream = 0x6e6f69ULL;       // "noi"

void covariate_row(Rng& rng, Eigen::Ref<Eigen::RowVectorXd> row) {
  const double e = rng.truncated_normal(-10.0, 10.0);
  for (Eigen::Index j = 0; j < row.size(); ++j)
    row[j] = (e + rng.truncated_normal(-10.0, 10.0)) * kInvSqrt2;
}

}  // namespace

RowMatrixXd gen_covariates(int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_covariates: n,p >= 1");
  RowMatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    Rng rng(Rng::mix(Rng::mix(seed, kCovariateStream), i));
    covariate_row(rng, X.row(i));
  }
  return X;
}

double structure_selection_signal(
    const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::tanh(2.0 * std::tanh(2.0 * x[0] - x[1])) +
         2.0 * std::tanh(std::tanh(x[2] - 2.0 * x[3]) - std::tanh(2.0 * x[4]));
}

double nonlinear_regression_signal(
    const Eigen::Ref<const Eigen::VectorXd>& x) {
  return 5.0 * x[1] / (1.0 + x[0] * x[0]) + 5.0 * std::sin(x[2] * x[3]) +
         2.0 * x[4];
}

double classification_score(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::exp(x[0]) + x[1] * x[1] + 5.0 * std::sin(x[2] * x[3]) - 3.0;
}

namespace {

Dataset gen_regression_split(const GeneratorSpec& spec, int n,
                             std::uint64_t split_seed,
                             double (*signal)(
                                 const Eigen::Ref<const Eigen::VectorXd>&)) {
  Dataset ds;
  ds.provenance = to_string(spec.kind) + ":" + std::to_string(split_seed);
  if (n == 0) {
    ds.X.resize(0, spec.p);
    ds.y.resize(0);
    return ds;
  }
  ds.X = gen_covariates(n, spec.p, split_seed);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(Rng::mix(Rng::mix(split_seed, kNoiseStream), i));
    ds.y[i] = signal(ds.X.row(i).transpose()) + rng.normal();
  }
  ds.provenance = to_string(spec.kind) + ":" + std::to_string(split_seed);
  return ds;
}

// Balanced classification split: walk deterministic candidate rows and keep
// them until each class quota is filled.
Dataset gen_classification_split(const GeneratorSpec& spec, int n,
                                 std::uint64_t split_seed) {
  Dataset ds;
  ds.provenance = to_string(spec.kind) + ":" + std::to_string(split_seed);
  ds.X.resize(n, spec.p);
  ds.y.resize(n);
  if (n == 0) return ds;
  const int want_pos = n / 2;
  const int want_neg = n - want_pos;
  int got_pos = 0, got_neg = 0, at = 0;
  Eigen::RowVectorXd row(spec.p);
  for (std::uint64_t c = 0; got_pos < want_pos || got_neg < want_neg; ++c) {
    Rng rng(Rng::mix(Rng::mix(split_seed, kCovariateStream), c));
    covariate_row(rng, row);
    const bool label = classification_score(row.transpose()) > 0.0;
    if (label && got_pos < want_pos) {
      ds.X.row(at) = row;
      ds.y[at++] = 1.0;
      ++got_pos;
    } else if (!label && got_neg < want_neg) {
      ds.X.row(at) = row;
      ds.y[at++] = 0.0;
      ++got_neg;
    }
  }
  ds.provenance = to_string(spec.kind) + ":" + std::to_string(split_seed);
  return ds;
}

std::uint64_t split_seed(const GeneratorSpec& spec, int which) {
  return Rng::mix(spec.seed, 0x73706c69ULL + which);  // "spli"
}

}  // namespace

DatasetTriple gen_structure_selection(const GeneratorSpec& spec) {
  spec.validate();
  return {gen_regression_split(spec, spec.n_train, split_seed(spec, 0),
                               structure_selection_signal),
          gen_regression_split(spec, spec.n_val, split_seed(spec, 1),
                               structure_selection_signal),
          gen_regression_split(spec, spec.n_test, split_seed(spec, 2),
                               structure_selection_signal)};
}

DatasetTriple gen_nonlinear_regression(const GeneratorSpec& spec) {
  spec.validate();
  return {gen_regression_split(spec, spec.n_train, split_seed(spec, 0),
                               nonlinear_regression_signal),
          gen_regression_split(spec, spec.n_val, split_seed(spec, 1),
                               nonlinear_regression_signal),
          gen_regression_split(spec, spec.n_test, split_seed(spec, 2),
                               nonlinear_regression_signal)};
}

DatasetTriple gen_nonlinear_classification(const GeneratorSpec& spec) {
  spec.validate();
  return {gen_classification_split(spec, spec.n_train, split_seed(spec, 0)),
          gen_classification_split(spec, spec.n_val, split_seed(spec, 1)),
          gen_classification_split(spec, spec.n_test, split_seed(spec, 2))};
}

DatasetTriple generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::kStructureSelection:
      return gen_structure_selection(spec);
    case GeneratorKind::kNonlinearRegression:
      return gen_nonlinear_regression(spec);
    case GeneratorKind::kNonlinearClassification:
      return gen_nonlinear_classification(spec);
  }
  throw std::logic_error("unreachable");
}

Task generator_task(GeneratorKind kind) {
  return kind == GeneratorKind::kNonlinearClassification
             ? Task::kBinaryClassification
             : Task::kRegression;
}

SelectionTruth generator_truth(const GeneratorSpec& spec) {
  SelectionTruth t;
  for (int i = 1; i <= spec.active_variables(); ++i) t.true_variables.insert(i);
  if (spec.kind == GeneratorKind::kStructureSelection) {
    // The generating model written as a p-5-3-1 tanh network:
    //   h1_0 = tanh(2x1 - x2),  h1_1 = tanh(x3 - 2x4),  h1_2 = tanh(2x5)
    //   h2_0 = tanh(2 h1_0),    h2_1 = tanh(h1_1 - h1_2)
    //   y    = h2_0 + 2 h2_1
    Arch arch{{spec.p, 5, 3, 1}, Activation::kTanh, Task::kRegression};
    Mask m = Mask::none(arch);
    m.w[0](0, 0) = 1;  // x1 -> h1_0
    m.w[0](0, 1) = 1;  // x2 -> h1_0
    m.w[0](1, 2) = 1;  // x3 -> h1_1
    m.w[0](1, 3) = 1;  // x4 -> h1_1
    m.w[0](2, 4) = 1;  // x5 -> h1_2
    m.w[1](0, 0) = 1;  // h1_0 -> h2_0
    m.w[1](1, 1) = 1;  // h1_1 -> h2_1
    m.w[1](1, 2) = 1;  // h1_2 -> h2_1
    m.w[2](0, 0) = 1;  // h2_0 -> y
    m.w[2](0, 1) = 1;  // h2_1 -> y
    t.true_connections = m;
    t.true_arch = arch;
  }
  return t;
}

Arch generator_fit_arch(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::kStructureSelection:
      return {{spec.p, 5, 3, 1}, Activation::kTanh, Task::kRegression};
    case GeneratorKind::kNonlinearRegression:
      return {{spec.p, 6, 4, 3, 1}, Activation::kTanh, Task::kRegression};
    case GeneratorKind::kNonlinearClassification:
      return {{spec.p, 6, 4, 3, 1}, Activation::kTanh,
              Task::kBinaryClassification};
  }
  throw std::logic_error("unreachable");
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  std::string line;
  for (Eigen::Index j = 0; j < ds.p(); ++j) {
    line += "x" + std::to_string(j + 1);
    line += ',';
  }
  line += "y\n";
  f << line;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < ds.p(); ++j) {
      append_double(line, ds.X(i, j));
      line += ',';
    }
    append_double(line, ds.y[i]);
    line += '\n';
    f << line;
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

namespace {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& cell, const std::filesystem::path& path,
                    std::size_t lineno) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw CsvError(path.string() + ":" + std::to_string(lineno) +
                   ": non-numeric cell '" + cell + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(f, line))
    throw CsvError(path.string() + ":1: empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  if (header.empty() || header.back() != "y")
    throw CsvError(path.string() + ":1: last header column must be 'y'");
  const std::size_t p = header.size() - 1;
  for (std::size_t j = 0; j < p; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      throw CsvError(path.string() + ":1: expected column 'x" +
                     std::to_string(j + 1) + "', got '" + header[j] + "'");
  if (p == 0) throw CsvError(path.string() + ":1: no covariate columns");

  std::vector<double> values;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != p + 1)
      throw CsvError(path.string() + ":" + std::to_string(lineno) +
                     ": expected " + std::to_string(p + 1) + " cells, got " +
                     std::to_string(cells.size()));
    for (const auto& cell : cells)
      values.push_back(parse_double(cell, path, lineno));
    ++rows;
  }
  if (rows == 0) throw CsvError(path.string() + ": no data rows");

  Dataset ds;
  ds.X.resize(rows, p);
  ds.y.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < p; ++j) ds.X(i, j) = values[i * (p + 1) + j];
    ds.y[i] = values[i * (p + 1) + p];
  }
  ds.provenance = "csv:" + path.string();
  return ds;
}

}  // namespace sbnn
