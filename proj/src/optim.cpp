#include "gait/optim.hpp"

#include <cmath>
#include <string>

#include "gait/error.hpp"

namespace gait {

AdamState::AdamState(const Network& net, AdamConfig cfg) : cfg_(cfg) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) || !(cfg.epsilon >= 0.0)) {
    throw InvalidArgument("invalid Adam hyperparameters");
  }
  for (const Layer& l : net.layers()) {
    m_.emplace_back(l.weight.rows(), l.weight.cols());
    v_.emplace_back(l.weight.rows(), l.weight.cols());
  }
}

void AdamState::apply(Network& net, const UpdateSet& updates) {
  if (updates.deltas.size() != net.depth() || m_.size() != net.depth()) {
    throw DimensionMismatch("adam_step: update set does not match network depth");
  }
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const Matrix& d = updates.deltas[i];
    const Matrix& w = net.layer(i).weight;
    if (d.rows() != w.rows() || d.cols() != w.cols()) {
      throw DimensionMismatch("adam_step: layer " + std::to_string(i) + " shape mismatch");
    }
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t i = 0; i < net.depth(); ++i) {
    auto w = net.mutable_weight(i).data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    const auto d = updates.deltas[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = -d[k];
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      w[k] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
}

}  // namespace gait
