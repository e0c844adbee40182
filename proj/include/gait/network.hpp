#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gait/linalg.hpp"
#include "gait/rng.hpp"

namespace gait {

enum class ActivationKind { Linear, LeakyRelu };

// Strictly increasing transfer function, invertible on all of R.
// For LeakyRelu a pre-activation of exactly 0 takes the right-limit slope 1.
struct Activation {
  ActivationKind kind = ActivationKind::LeakyRelu;
  double slope = 0.01;

  static Activation linear() { return {ActivationKind::Linear, 1.0}; }
  static Activation leaky_relu(double slope = 0.01);

  double forward(double x) const noexcept {
    return kind == ActivationKind::Linear || x >= 0.0 ? x : slope * x;
  }
  double inverse(double y) const noexcept {
    return kind == ActivationKind::Linear || y >= 0.0 ? y : y / slope;
  }
  double derivative(double x) const noexcept {
    return kind == ActivationKind::Linear || x >= 0.0 ? 1.0 : slope;
  }
  // inverse(y) - inverse(y - shift), evaluated without cancellation when
  // y and y - shift lie on the same linear piece.
  double inverse_difference(double y, double shift) const noexcept;

  friend bool operator==(const Activation&, const Activation&) = default;
};

Vector act_forward(const Activation& a, std::span<const double> x);
Vector act_inverse(const Activation& a, std::span<const double> y);
Vector act_deriv(const Activation& a, std::span<const double> x);

// One invertible layer. The weight is square (total_width x total_width) and
// maps the forward units of the previous layer to all units of this layer.
// The first `forward_width` units project onward; the rest are auxiliary.
struct Layer {
  Matrix weight;
  Activation activation;
  std::size_t forward_width = 0;

  std::size_t total_width() const noexcept { return weight.rows(); }
  std::size_t aux_width() const noexcept { return total_width() - forward_width; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

class Network {
 public:
  Network() = default;
  // Validates the width chain: every weight square, forward_width <= total,
  // and forward_width of layer i equal to total_width of layer i + 1.
  explicit Network(std::vector<Layer> layers);

  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t input_width() const noexcept;
  // Forward width of the final layer (the class outputs).
  std::size_t output_width() const noexcept;

  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  // Replaces the weight of layer i; the shape must not change.
  void set_weight(std::size_t i, Matrix w);
  Matrix& mutable_weight(std::size_t i) { return layers_.at(i).weight; }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Layer> layers_;
};

enum class InitScheme { Orthogonal, Xavier, Identity };

// Widths of a network: the input width and, per layer, the forward width.
// Layer 0 has total width `input_width`; layer i > 0 has total width
// forward_widths[i - 1].
struct Architecture {
  std::size_t input_width = 0;
  std::vector<std::size_t> forward_widths;
  Activation activation;

  static Architecture fixed_width(std::size_t width, std::size_t hidden_layers,
                                  std::size_t outputs, Activation act = {});
  // Halves the forward width at every hidden layer.
  static Architecture reducing_width(std::size_t width, std::size_t hidden_layers,
                                     std::size_t outputs, Activation act = {});

  std::size_t total_width(std::size_t layer) const;
};

// Each layer draws from rng.split(layer index), so layer initializations do
// not depend on each other.
Network make_network(const Architecture& arch, InitScheme init, const Rng& rng);

// Per-layer quantities for a batch; columns are samples.
struct LayerTrace {
  Matrix pre_activation;  // h = W * (forward part of previous activation)
  Matrix activation;      // f(h), forward units first, auxiliary units after
  Matrix gain;            // f'(h)
};

struct ForwardTrace {
  Matrix input;
  std::vector<LayerTrace> layers;

  std::size_t samples() const noexcept { return input.cols(); }
  // Input to layer i: the raw input for i == 0, otherwise the forward rows
  // of layer i - 1's activation.
  Matrix layer_input(const Network& net, std::size_t i) const;
  // Forward rows of the final activation.
  Matrix output(const Network& net) const;
};

// inputs: input_width x batch.
ForwardTrace forward(const Network& net, const Matrix& inputs);
ForwardTrace forward(const Network& net, std::span<const double> input);

// W^-1 f^-1(y)
Vector inverse_layer(const Layer& layer, std::span<const double> y);
// (target_forward || trace_aux) through inverse_layer.
Vector augmented_inverse(const Layer& layer, std::span<const double> target_forward,
                         std::span<const double> trace_aux);

}  // namespace gait
