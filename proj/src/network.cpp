#include "gait/network.hpp"

#include <algorithm>
#include <string>

#include "gait/error.hpp"

namespace gait {

Activation Activation::leaky_relu(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw InvalidArgument("leaky-ReLU slope must lie in (0, 1), got " + std::to_string(slope));
  }
  return {ActivationKind::LeakyRelu, slope};
}

double Activation::inverse_difference(double y, double shift) const noexcept {
  if (kind == ActivationKind::Linear) return shift;
  const double shifted = y - shift;
  if (y >= 0.0 && shifted >= 0.0) return shift;
  if (y < 0.0 && shifted < 0.0) return shift / slope;
  return inverse(y) - inverse(shifted);
}

Vector act_forward(const Activation& a, std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a.forward(x[i]);
  return out;
}

Vector act_inverse(const Activation& a, std::span<const double> y) {
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = a.inverse(y[i]);
  return out;
}

Vector act_deriv(const Activation& a, std::span<const double> x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a.derivative(x[i]);
  return out;
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArgument("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string where = "layer " + std::to_string(i) + ": ";
    if (l.weight.empty() || !l.weight.is_square()) {
      throw DimensionMismatch(where + "weight must be square");
    }
    if (l.forward_width == 0 || l.forward_width > l.total_width()) {
      throw DimensionMismatch(where + "forward width must be in [1, total width]");
    }
    if (l.activation.kind == ActivationKind::LeakyRelu &&
        !(l.activation.slope > 0.0 && l.activation.slope < 1.0)) {
      throw InvalidArgument(where + "leaky-ReLU slope must lie in (0, 1)");
    }
    if (i + 1 < layers_.size() && l.forward_width != layers_[i + 1].total_width()) {
      throw DimensionMismatch(where + "forward width " + std::to_string(l.forward_width) +
                              " does not match next layer width " +
                              std::to_string(layers_[i + 1].total_width()));
    }
  }
}

std::size_t Network::input_width() const noexcept {
  return layers_.empty() ? 0 : layers_.front().total_width();
}

std::size_t Network::output_width() const noexcept {
  return layers_.empty() ? 0 : layers_.back().forward_width;
}

void Network::set_weight(std::size_t i, Matrix w) {
  Layer& l = layers_.at(i);
  if (w.rows() != l.weight.rows() || w.cols() != l.weight.cols()) {
    throw DimensionMismatch("set_weight: shape change on layer " + std::to_string(i));
  }
  l.weight = std::move(w);
}

Architecture Architecture::fixed_width(std::size_t width, std::size_t hidden_layers,
                                       std::size_t outputs, Activation act) {
  Architecture a;
  a.input_width = width;
  a.forward_widths.assign(hidden_layers, width);
  a.forward_widths.push_back(outputs);
  a.activation = act;
  return a;
}

Architecture Architecture::reducing_width(std::size_t width, std::size_t hidden_layers,
                                          std::size_t outputs, Activation act) {
  Architecture a;
  a.input_width = width;
  std::size_t w = width;
  for (std::size_t i = 0; i < hidden_layers; ++i) {
    w = std::max(outputs, w / 2);
    a.forward_widths.push_back(w);
  }
  a.forward_widths.push_back(outputs);
  a.activation = act;
  return a;
}

std::size_t Architecture::total_width(std::size_t layer) const {
  return layer == 0 ? input_width : forward_widths.at(layer - 1);
}

Network make_network(const Architecture& arch, InitScheme init, const Rng& rng) {
  if (arch.forward_widths.empty()) throw InvalidArgument("architecture has no layers");
  std::vector<Layer> layers;
  layers.reserve(arch.forward_widths.size());
  for (std::size_t i = 0; i < arch.forward_widths.size(); ++i) {
    const std::size_t n = arch.total_width(i);
    Rng layer_rng = rng.split(i);
    Matrix w;
    switch (init) {
      case InitScheme::Orthogonal: w = orthogonal_init(n, layer_rng); break;
      case InitScheme::Xavier: w = xavier_init(n, n, layer_rng); break;
      case InitScheme::Identity: w = Matrix::identity(n); break;
    }
    layers.push_back(Layer{std::move(w), arch.activation, arch.forward_widths[i]});
  }
  return Network(std::move(layers));
}

Matrix ForwardTrace::layer_input(const Network& net, std::size_t i) const {
  if (i == 0) return input;
  return layers.at(i - 1).activation.row_block(0, net.layer(i - 1).forward_width);
}

Matrix ForwardTrace::output(const Network& net) const {
  return layers.back().activation.row_block(0, net.output_width());
}

ForwardTrace forward(const Network& net, const Matrix& inputs) {
  if (inputs.rows() != net.input_width()) {
    throw DimensionMismatch("forward: input has " + std::to_string(inputs.rows()) +
                            " rows, network expects " + std::to_string(net.input_width()));
  }
  if (!inputs.all_finite()) throw InvalidArgument("forward: input is not finite");
  ForwardTrace trace;
  trace.input = inputs;
  trace.layers.reserve(net.depth());
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const Layer& layer = net.layer(i);
    LayerTrace lt;
    lt.pre_activation = i == 0 ? matmul(layer.weight, inputs)
                               : matmul(layer.weight, trace.layer_input(net, i));
    lt.activation = lt.pre_activation;
    lt.gain = lt.pre_activation;
    auto h = lt.pre_activation.data();
    auto y = lt.activation.data();
    auto g = lt.gain.data();
    for (std::size_t k = 0; k < h.size(); ++k) {
      y[k] = layer.activation.forward(h[k]);
      g[k] = layer.activation.derivative(h[k]);
    }
    trace.layers.push_back(std::move(lt));
  }
  return trace;
}

ForwardTrace forward(const Network& net, std::span<const double> input) {
  return forward(net, Matrix::column(input));
}

Vector inverse_layer(const Layer& layer, std::span<const double> y) {
  if (y.size() != layer.total_width()) {
    throw DimensionMismatch("inverse_layer: got " + std::to_string(y.size()) +
                            " values for a layer of width " +
                            std::to_string(layer.total_width()));
  }
  return LuFactorization(layer.weight).solve(act_inverse(layer.activation, y));
}

Vector augmented_inverse(const Layer& layer, std::span<const double> target_forward,
                         std::span<const double> trace_aux) {
  if (target_forward.size() != layer.forward_width || trace_aux.size() != layer.aux_width()) {
    throw DimensionMismatch("augmented_inverse: expected " +
                            std::to_string(layer.forward_width) + " forward and " +
                            std::to_string(layer.aux_width()) + " auxiliary values");
  }
  Vector full(target_forward.begin(), target_forward.end());
  full.insert(full.end(), trace_aux.begin(), trace_aux.end());
  return inverse_layer(layer, full);
}

}  // namespace gait
