#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing in
// here calls the learning rules; the oracles recompute quantities from the
// network weights with plain loops so a bug in the library cannot hide in
// both sides of a comparison.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gait/linalg.hpp"
#include "gait/network.hpp"
#include "gait/rng.hpp"

namespace gait::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

// Square weights I + noise; well conditioned but far from orthogonal.
inline Matrix random_invertible(std::size_t n, Rng& rng, double noise = 0.6) {
  Matrix m = Matrix::identity(n);
  const double s = noise / std::sqrt(static_cast<double>(n));
  for (double& v : m.data()) v += s * rng.normal();
  return m;
}

inline Matrix random_inputs(std::size_t width, std::size_t samples, Rng& rng) {
  return random_matrix(width, samples, rng);
}

// Network from explicit per-layer forward widths with weights from `make`.
inline Network build_network(std::size_t input_width, const std::vector<std::size_t>& forward_widths,
                             Activation act, const std::function<Matrix(std::size_t)>& make) {
  std::vector<Layer> layers;
  std::size_t total = input_width;
  for (std::size_t fw : forward_widths) {
    layers.push_back(Layer{make(total), act, fw});
    total = fw;
  }
  return Network(std::move(layers));
}

inline Network orthogonal_network(std::size_t width, std::size_t depth, Activation act, Rng& rng) {
  return build_network(width, std::vector<std::size_t>(depth, width), act,
                       [&](std::size_t n) { return orthogonal_init(n, rng); });
}

inline Network invertible_network(std::size_t width, std::size_t depth, Activation act, Rng& rng) {
  return build_network(width, std::vector<std::size_t>(depth, width), act,
                       [&](std::size_t n) { return random_invertible(n, rng); });
}

// Plain-loop forward pass of one sample: activations per level (level 0 is
// the input, level l is the full output of layer l - 1).
inline std::vector<Vector> naive_forward(const Network& net, const Vector& x) {
  std::vector<Vector> levels{x};
  Vector in = x;
  for (const Layer& l : net.layers()) {
    const std::size_t n = l.total_width();
    Vector out(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      double h = 0.0;
      for (std::size_t c = 0; c < in.size(); ++c) h += l.weight(r, c) * in[c];
      out[r] = l.activation.forward(h);
    }
    levels.push_back(out);
    in.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(l.forward_width));
  }
  return levels;
}

// 0.5 * ||y_out - t||^2 over the class outputs, via the plain-loop forward.
inline double quadratic_loss(const Network& net, const Vector& x, const Vector& t) {
  const auto levels = naive_forward(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = levels.back()[i] - t[i];
    s += 0.5 * e * e;
  }
  return s;
}

// Central-difference gradient of `loss` with respect to each weight.
inline std::vector<Matrix> finite_difference_gradient(Network net,
                                                      const std::function<double(const Network&)>& loss,
                                                      double step = 1e-6) {
  std::vector<Matrix> grads;
  for (std::size_t i = 0; i < net.depth(); ++i) {
    Matrix g(net.layer(i).weight.rows(), net.layer(i).weight.cols());
    for (std::size_t k = 0; k < g.size(); ++k) {
      double& w = net.mutable_weight(i).data()[k];
      const double saved = w;
      w = saved + step;
      const double up = loss(net);
      w = saved - step;
      const double down = loss(net);
      w = saved;
      g.data()[k] = (up - down) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

// Product W_{last} ... W_{first} of square weights (no aux units).
inline Matrix chain_product(const Network& net, std::size_t first, std::size_t last) {
  Matrix p = Matrix::identity(net.layer(first).total_width());
  for (std::size_t j = first; j <= last; ++j) p = matmul(net.layer(j).weight, p);
  return p;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double nb = frobenius_norm(b);
  return frobenius_norm(a - b) / (nb > 0 ? nb : 1.0);
}

}  // namespace gait::testing
