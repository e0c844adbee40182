#include "gait/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>
#include <tuple>

#include "gait/error.hpp"

namespace gait {

namespace {

double squared_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Solution at elapsed time `dt_elapsed` of z' = (A z + b) / tau for
// A = [[-1, nu], [1, -1]], starting from z0.
std::pair<double, double> exact_pair(double nu, double tau, double b1, double b2, double p0,
                                     double q0, double dt_elapsed) {
  const double inv = 1.0 / (1.0 - nu);
  const double p_star = (b1 + nu * b2) * inv;
  const double q_star = (b1 + b2) * inv;
  const double sigma = dt_elapsed / tau;
  const double root = std::sqrt(nu);
  const double ch = std::cosh(root * sigma);
  const double sh_over = root > 0.0 ? std::sinh(root * sigma) / root : sigma;
  const double decay = std::exp(-sigma);
  const double dp = p0 - p_star;
  const double dq = q0 - q_star;
  // exp(A s) = e^-s (cosh(sqrt(nu) s) I + sinh(sqrt(nu) s) / sqrt(nu) [[0, nu], [1, 0]])
  return {p_star + decay * (ch * dp + sh_over * nu * dq),
          q_star + decay * (ch * dq + sh_over * dp)};
}

}  // namespace

void CircuitConfig::validate() const {
  if (weight.empty() || !weight.is_square()) throw InvalidArgument("circuit weight must be square");
  const std::size_t n = weight.rows();
  if (input.size() != n || target.size() != n) {
    throw InvalidArgument("circuit input and target must have " + std::to_string(n) + " entries");
  }
  if (!(coupling >= 0.0 && coupling < 1.0)) {
    throw InvalidArgument("coupling nu must lie in [0, 1), got " + std::to_string(coupling));
  }
  if (!(tau > 0.0)) throw InvalidArgument("time constant must be positive");
  if (!(dt > 0.0 && dt < tau / 10.0)) throw InvalidArgument("dt must lie in (0, tau / 10)");
  if (!(duration > 0.0) || !(target_onset >= 0.0)) {
    throw InvalidArgument("duration must be positive and target onset nonnegative");
  }
}

std::size_t CircuitConfig::steps() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

Trajectory simulate(const CircuitConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.weight.rows();
  const LuFactorization lu(cfg.weight);
  const std::size_t steps = cfg.steps();
  const double rate = cfg.dt / cfg.tau;

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.u1.reserve(steps + 1);
  traj.u2.reserve(steps + 1);

  Vector u1(n, 0.0);
  Vector u2(n, 0.0);
  traj.times.push_back(0.0);
  traj.u1.push_back(u1);
  traj.u2.push_back(u2);
  for (std::size_t k = 0; k < steps; ++k) {
    const double s = static_cast<double>(k) * cfg.dt;
    const bool target_on = s >= cfg.target_onset;
    const Vector feedback = lu.solve(u2);
    const Vector drive = matvec(cfg.weight, u1);
    Vector next1(n);
    Vector next2(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d1 = -u1[i] + cfg.input[i] + cfg.coupling * feedback[i];
      const double d2 = -u2[i] + drive[i] + (target_on ? cfg.target[i] : 0.0);
      next1[i] = u1[i] + rate * d1;
      next2[i] = u2[i] + rate * d2;
    }
    u1 = std::move(next1);
    u2 = std::move(next2);
    const double norm = std::sqrt(squared_norm(u1) + squared_norm(u2));
    if (!(norm <= kDivergenceNorm)) {
      throw Divergence("circuit diverged at s = " + std::to_string(s + cfg.dt));
    }
    traj.times.push_back(static_cast<double>(k + 1) * cfg.dt);
    traj.u1.push_back(u1);
    traj.u2.push_back(u2);
  }
  return traj;
}

Equilibria equilibria(const CircuitConfig& cfg) {
  if (!(cfg.coupling >= 0.0 && cfg.coupling < 1.0)) {
    throw InvalidArgument("coupling nu must lie in [0, 1)");
  }
  if (cfg.input.size() != cfg.weight.rows() || cfg.target.size() != cfg.weight.rows()) {
    throw InvalidArgument("circuit input and target sizes must match the weight");
  }
  Equilibria eq;
  eq.gamma = cfg.coupling / (1.0 - cfg.coupling);
  eq.inverted_target = LuFactorization(cfg.weight).solve(cfg.target);
  const std::size_t n = cfg.input.size();
  eq.y1.resize(n);
  eq.y1_shifted.resize(n);
  eq.itp_blend.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    eq.y1[i] = (1.0 + eq.gamma) * cfg.input[i];
    eq.y1_shifted[i] = eq.y1[i] + eq.gamma * eq.inverted_target[i];
    eq.itp_blend[i] = (1.0 - eq.gamma) * eq.y1[i] + eq.gamma * eq.inverted_target[i];
  }
  return eq;
}

std::pair<Vector, Vector> analytic_state(const CircuitConfig& cfg, double s) {
  cfg.validate();
  const std::size_t n = cfg.weight.rows();
  const LuFactorization lu(cfg.weight);
  const Vector wx = matvec(cfg.weight, cfg.input);
  const double first = std::min(s, cfg.target_onset);

  Vector p(n), u2(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [pi, qi] = exact_pair(cfg.coupling, cfg.tau, wx[i], 0.0, 0.0, 0.0, first);
    if (s > cfg.target_onset) {
      std::tie(pi, qi) = exact_pair(cfg.coupling, cfg.tau, wx[i], cfg.target[i], pi, qi,
                                    s - cfg.target_onset);
    }
    p[i] = pi;
    u2[i] = qi;
  }
  return {lu.solve(p), u2};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t n = traj.u1.empty() ? 0 : traj.u1.front().size();
  out << "time";
  for (std::size_t i = 0; i < n; ++i) out << ",u1_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",u2_" << i;
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    out << traj.times[k];
    for (double v : traj.u1[k]) out << ',' << v;
    for (double v : traj.u2[k]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace gait
