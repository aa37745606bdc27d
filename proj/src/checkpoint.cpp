#include "sbnn/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sbnn {

namespace {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string next_line(std::istream& in, const std::string& what) {
  std::string line;
  if (!std::getline(in, line))
    throw CheckpointError("checkpoint truncated, expected " + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  ck.arch.validate();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  f << "sbnn_checkpoint v1\n";
  f << "layers";
  for (int w : ck.arch.layer_widths) f << ' ' << w;
  f << '\n';
  f << "activation " << to_string(ck.arch.activation) << '\n';
  f << "task " << to_string(ck.arch.task) << '\n';
  f << "seed " << ck.seed << '\n';

  f << "beta\n";
  const Eigen::VectorXd beta = ck.beta.flatten();
  char buf[32];
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, beta[i]);
    (void)ec;
    f.write(buf, ptr - buf);
    f.put((i + 1) % 8 == 0 || i + 1 == beta.size() ? '\n' : ' ');
  }

  f << "gamma\n";
  const Eigen::VectorXd gamma = ck.gamma.flatten();
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    f.put(gamma[i] != 0.0 ? '1' : '0');
    if ((i + 1) % 100 == 0 || i + 1 == gamma.size()) f.put('\n');
  }
  f << "end\n";
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());

  if (next_line(f, "magic") != "sbnn_checkpoint v1")
    throw CheckpointError(path.string() + ": not a sbnn_checkpoint v1 file");

  Checkpoint ck;
  {
    std::istringstream ls(next_line(f, "layers"));
    std::string tag;
    ls >> tag;
    if (tag != "layers") throw CheckpointError("expected 'layers'");
    int w;
    while (ls >> w) ck.arch.layer_widths.push_back(w);
  }
  {
    std::istringstream ls(next_line(f, "activation"));
    std::string tag, v;
    ls >> tag >> v;
    if (tag != "activation") throw CheckpointError("expected 'activation'");
    ck.arch.activation = activation_from_string(v);
  }
  {
    std::istringstream ls(next_line(f, "task"));
    std::string tag, v;
    ls >> tag >> v;
    if (tag != "task") throw CheckpointError("expected 'task'");
    ck.arch.task = task_from_string(v);
  }
  {
    std::istringstream ls(next_line(f, "seed"));
    std::string tag;
    ls >> tag >> ck.seed;
    if (tag != "seed") throw CheckpointError("expected 'seed'");
  }
  ck.arch.validate();
  const std::int64_t k = ck.arch.param_count();

  if (next_line(f, "beta header") != "beta")
    throw CheckpointError("expected 'beta'");
  Eigen::VectorXd beta(k);
  {
    std::int64_t at = 0;
    while (at < k) {
      const std::string line = next_line(f, "beta values");
      const char* p = line.data();
      const char* last = line.data() + line.size();
      while (p < last && at < k) {
        while (p < last && *p == ' ') ++p;
        if (p == last) break;
        double v;
        auto [ptr, ec] = std::from_chars(p, last, v);
        if (ec != std::errc{})
          throw CheckpointError(path.string() + ": bad beta value");
        beta[at++] = v;
        p = ptr;
      }
    }
  }
  ck.beta = ParamVector::unflatten(ck.arch, beta);

  if (next_line(f, "gamma header") != "gamma")
    throw CheckpointError("expected 'gamma'");
  Eigen::VectorXd gamma(k);
  {
    std::int64_t at = 0;
    while (at < k) {
      const std::string line = next_line(f, "gamma bits");
      for (char c : line) {
        if (at >= k) throw CheckpointError("too many gamma bits");
        if (c != '0' && c != '1')
          throw CheckpointError(path.string() + ": bad gamma bit");
        gamma[at++] = c == '1' ? 1.0 : 0.0;
      }
    }
  }
  ck.gamma = Mask::unflatten(ck.arch, gamma);

  if (next_line(f, "end marker") != "end")
    throw CheckpointError("expected 'end'");
  return ck;
}

}  // namespace sbnn
