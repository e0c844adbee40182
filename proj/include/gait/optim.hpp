#pragma once

#include <cstdint>
#include <vector>

#include "gait/linalg.hpp"
#include "gait/network.hpp"
#include "gait/rules.hpp"

namespace gait {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

// Adam moments for every layer of one network.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const Network& net, AdamConfig cfg);

  const AdamConfig& config() const noexcept { return cfg_; }
  std::uint64_t step() const noexcept { return step_; }
  const std::vector<Matrix>& first_moment() const noexcept { return m_; }
  const std::vector<Matrix>& second_moment() const noexcept { return v_; }

  // One bias-corrected Adam step. `updates` hold descent directions, so the
  // gradient fed to Adam is -delta.
  void apply(Network& net, const UpdateSet& updates);

 private:
  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

inline void adam_step(AdamState& state, Network& net, const UpdateSet& updates) {
  state.apply(net, updates);
}

}  // namespace gait
