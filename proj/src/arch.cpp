#include "sbnn/arch.hpp"

#include <stdexcept>

namespace sbnn {

std::string to_string(Activation a) {
  return a == Activation::kTanh ? "tanh" : "relu";
}

std::string to_string(Task t) {
  return t == Task::kRegression ? "regression" : "classification";
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation: " + s);
}

Task task_from_string(const std::string& s) {
  if (s == "regression") return Task::kRegression;
  if (s == "classification" || s == "binary_classification")
    return Task::kBinaryClassification;
  throw std::invalid_argument("unknown task: " + s);
}

std::int64_t Arch::param_count() const {
  std::int64_t k = 0;
  for (std::size_t h = 1; h < layer_widths.size(); ++h) {
    k += static_cast<std::int64_t>(layer_widths[h - 1]) * layer_widths[h] +
         layer_widths[h];
  }
  return k;
}

void Arch::validate() const {
  if (layer_widths.size() < 3)
    throw std::invalid_argument("arch needs at least one hidden layer");
  if (layer_widths.back() != 1)
    throw std::invalid_argument("output width must be 1");
  for (int w : layer_widths)
    if (w < 1) throw std::invalid_argument("all layer widths must be >= 1");
}

bool operator==(const Arch& a, const Arch& b) {
  return a.layer_widths == b.layer_widths && a.activation == b.activation &&
         a.task == b.task;
}

}  // namespace sbnn
