#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sbnn {

enum class Activation { kTanh, kRelu };
enum class Task { kRegression, kBinaryClassification };

std::string to_string(Activation a);
std::string to_string(Task t);
Activation activation_from_string(const std::string& s);
Task task_from_string(const std::string& s);

// Fully-connected network skeleton: layer_widths = [p, L1, ..., L_{H-1}, 1].
// H = layer_widths.size()-1 weight layers; the output layer is linear, the
// hidden layers all use `activation`. Regression assumes unit noise variance.
struct Arch {
  std::vector<int> layer_widths;
  Activation activation = Activation::kTanh;
  Task task = Task::kRegression;

  int input_dim() const { return layer_widths.front(); }
  int depth() const { return static_cast<int>(layer_widths.size()) - 1; }

  // Total number of weights and biases.
  std::int64_t param_count() const;

  // Throws std::invalid_argument unless there is at least one hidden layer,
  // the output width is exactly 1, and all widths are >= 1.
  void validate() const;
};

bool operator==(const Arch& a, const Arch& b);

}  // namespace sbnn
