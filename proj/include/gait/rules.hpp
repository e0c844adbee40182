#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gait/linalg.hpp"
#include "gait/network.hpp"

namespace gait {

enum class Rule { BP, TP, ITP, GAIT };

std::string_view rule_name(Rule rule) noexcept;
Rule parse_rule(std::string_view name);

enum class TargetFlavor { TP, ITP, GAIT };

// Layer-wise targets for a batch.
//
// Levels run 0..L: level 0 is the network input and level l >= 1 is the
// activation of layer l - 1. `targets[l]` covers the forward units of level
// l (all input units for level 0). `offsets[l]` holds activation - target
// over every unit of level l; auxiliary rows are exactly zero because
// auxiliary targets are copies of the forward pass.
//
// Targets are accumulated as offsets from the forward pass: each inversion
// step evaluates W^-1 (f^-1(y) - f^-1(blend)) rather than differencing two
// separately inverted vectors. Both are the same exact inverse; the offset
// form keeps the tiny incremental differences free of cancellation error.
struct TargetStack {
  TargetFlavor flavor = TargetFlavor::TP;
  std::vector<Matrix> targets;
  std::vector<Matrix> offsets;
  // Per level 1..L (index l - 1): number of (unit, sample) pairs whose
  // blended value f^-1 was evaluated on the other side of the activation
  // kink from the forward pre-activation.
  std::vector<std::size_t> kink_crossings;
  // Per sample: crossings summed over all levels.
  std::vector<std::size_t> sample_crossings;

  std::size_t depth() const noexcept { return targets.empty() ? 0 : targets.size() - 1; }
};

// Per-layer weight changes (descent direction, learning rate not applied),
// averaged over `samples` samples. deltas[i] has the shape of layer i.
struct UpdateSet {
  Rule rule = Rule::BP;
  std::size_t samples = 0;
  std::vector<Matrix> deltas;
};

// Sample-weighted mean of two update sets over the same network.
UpdateSet merge(const UpdateSet& a, const UpdateSet& b);

struct IncrementalConfig {
  double gamma = 1e-3;
  // Multiply layer l's update by gamma^-(L - l) so it is comparable to BP.
  bool scale_updates = true;
};

// t_out: output_width x batch (one column per sample of the trace).
UpdateSet bp_updates(const Network& net, const ForwardTrace& trace, const Matrix& t_out);

TargetStack tp_targets(const Network& net, const ForwardTrace& trace, const Matrix& t_out);
UpdateSet tp_updates(const ForwardTrace& trace, const TargetStack& targets);

TargetStack itp_targets(const Network& net, const ForwardTrace& trace, const Matrix& t_out,
                        const IncrementalConfig& cfg);
UpdateSet itp_updates(const ForwardTrace& trace, const TargetStack& targets,
                      const IncrementalConfig& cfg);

// Blend factor gamma * f'(h)^2 per unit. Throws InvalidArgument when
// gamma * max f'(h)^2 >= 1 on any forward unit.
TargetStack gait_targets(const Network& net, const ForwardTrace& trace, const Matrix& t_out,
                         const IncrementalConfig& cfg);
UpdateSet gait_updates(const ForwardTrace& trace, const TargetStack& targets,
                       const IncrementalConfig& cfg);

// Dispatches to the rule's targets and updates.
UpdateSet compute_updates(Rule rule, const Network& net, const ForwardTrace& trace,
                          const Matrix& t_out, const IncrementalConfig& cfg);

// y_out - dL/dy_out: the output target that turns an arbitrary loss into the
// quadratic-difference form used by every rule.
Vector loss_to_target(std::span<const double> y_out, std::span<const double> loss_gradient);
Matrix loss_to_target(const Matrix& y_out, const Matrix& loss_gradient);

// softmax(y) - onehot, column-wise.
Matrix softmax_cross_entropy_gradient(const Matrix& y_out, const Matrix& onehot);

// How (J - I) enters lambda * ||W W^T (J - I)||^2.
enum class OrthoPenaltyForm {
  // Elementwise mask: squared off-diagonal entries of W W^T.
  Mask,
  // Ordinary matrix product with J - I.
  Product,
};

double ortho_penalty(const Matrix& w, double lambda, OrthoPenaltyForm form = OrthoPenaltyForm::Mask);
// Gradient of ortho_penalty with respect to W.
Matrix ortho_reg_grad(const Matrix& w, double lambda, OrthoPenaltyForm form = OrthoPenaltyForm::Mask);

// Exact linear operators relating BP to ITP (M) and GAIT (N) updates of
// layer `layer` for one sample:
//   dW_bp = prefactor * M * dW_itp = prefactor * N * dW_gait
// whenever no unit crosses the activation kink during target propagation.
// `prefactor` is gamma^-(L - l). The chains pass through the restriction to
// forward units at every level between layer l and the output, so with
// orthogonal weights N is the identity on the forward units of layer l and
// zero on its auxiliary ones. The final layer always gets the identity: its
// auxiliary rows carry no error.
struct CorrectionMatrices {
  Matrix itp;
  Matrix gait;
  double prefactor = 1.0;
};

CorrectionMatrices correction_matrices(const Network& net, const ForwardTrace& trace,
                                       std::size_t layer, const IncrementalConfig& cfg,
                                       std::size_t sample = 0);

}  // namespace gait
