#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sbnn/arch.hpp"

namespace sbnn {

// Weights and biases of a network. w[h] has shape L_{h+1} x L_h and b[h]
// length L_{h+1}, h = 0..depth-1.
//
// Canonical flat ordering (used by flatten/unflatten, checkpoints and the
// restricted-coordinate views in the evidence code): layers in order, and
// within layer h first the weight matrix in row-major order (output unit
// major, input minor), then the bias vector.
struct ParamVector {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static ParamVector zeros(const Arch& arch);

  std::int64_t size() const;

  Eigen::VectorXd flatten() const;
  static ParamVector unflatten(const Arch& arch, const Eigen::VectorXd& flat);

  void set_zero();
  // this += c * other (shapes must match).
  void add_scaled(const ParamVector& other, double c);
  // this = momentum * this + other.
  void decay_add(double momentum, const ParamVector& other);

  double max_abs() const;
  bool all_finite() const;
};

// Binary inclusion indicators, stored as 0.0/1.0 so elementwise products
// against ParamVector are exact.
struct Mask {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static Mask full(const Arch& arch);
  static Mask none(const Arch& arch);

  std::int64_t count() const;      // |gamma|
  std::int64_t size() const;       // K_n
  double sparsity() const { return static_cast<double>(count()) / size(); }

  Eigen::VectorXd flatten() const;
  static Mask unflatten(const Arch& arch, const Eigen::VectorXd& flat);
};

bool operator==(const ParamVector& a, const ParamVector& b);
bool operator==(const Mask& a, const Mask& b);

// beta ∘ gamma.
ParamVector masked(const ParamVector& beta, const Mask& gamma);
// Zeroes entries of beta (in place) where gamma is 0.
void apply_mask(ParamVector& beta, const Mask& gamma);

}  // namespace sbnn
