#pragma once

#include <cstddef>
#include <ostream>
#include <utility>
#include <vector>

#include "gait/linalg.hpp"

namespace gait {

// Two-layer linear firing-rate circuit with weak feedback:
//
//   tau du1/ds = -u1 + x + nu W^-1 u2
//   tau du2/ds = -u2 + W u1 + t2(s)
//
// x is on from s = 0; t2 switches on at s = target_onset. Both layers start
// at rest (u1 = u2 = 0).
struct CircuitConfig {
  Matrix weight;
  double coupling = 0.25;  // nu, 0 <= nu < 1
  double tau = 1.0;
  Vector input;
  Vector target;
  double dt = 0.01;
  double duration = 200.0;
  double target_onset = 100.0;

  // Throws InvalidArgument on inconsistent sizes, nu outside [0, 1), or
  // dt >= tau / 10.
  void validate() const;
  std::size_t steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> u1;
  std::vector<Vector> u2;

  std::size_t samples() const noexcept { return times.size(); }
};

// Norm of the state above which a simulation is declared divergent.
inline constexpr double kDivergenceNorm = 1e12;

// Explicit Euler from rest; times are k * dt for k = 0..steps().
Trajectory simulate(const CircuitConfig& cfg);

struct Equilibria {
  double gamma = 0.0;     // nu / (1 - nu)
  Vector y1;              // u1 before the target: (1 + gamma) x
  Vector y1_shifted;      // u1 with the target: y1 + gamma W^-1 t2
  Vector inverted_target; // t1 = W^-1 t2
  Vector itp_blend;       // (1 - gamma) y1 + gamma t1, the incremental target
};

Equilibria equilibria(const CircuitConfig& cfg);

// Exact solution (u1, u2) at time s, from the closed-form exponential of the
// per-unit 2x2 system obtained in the coordinates p = W u1.
std::pair<Vector, Vector> analytic_state(const CircuitConfig& cfg, double s);

// header: time,u1_0,...,u1_{n-1},u2_0,...,u2_{n-1}
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace gait
