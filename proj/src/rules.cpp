#include "gait/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "gait/error.hpp"

namespace gait {

namespace {

// Per-unit blend factor applied to the offset before inversion.
enum class Blend { Full, Uniform, GainAdjusted };

void check_output_target(const Network& net, const ForwardTrace& trace, const Matrix& t_out) {
  if (trace.layers.size() != net.depth()) {
    throw DimensionMismatch("trace depth does not match the network");
  }
  if (t_out.rows() != net.output_width() || t_out.cols() != trace.samples()) {
    throw DimensionMismatch("output target must be " + std::to_string(net.output_width()) + "x" +
                            std::to_string(trace.samples()) + ", got " +
                            std::to_string(t_out.rows()) + "x" + std::to_string(t_out.cols()));
  }
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("incremental factor gamma must lie in (0, 1], got " +
                          std::to_string(gamma));
  }
}

// y_L - t_out over the forward rows, zero over auxiliary output rows.
Matrix output_error(const Network& net, const ForwardTrace& trace, const Matrix& t_out) {
  Matrix err = trace.output(net) - t_out;
  return err.zero_padded(net.layers().back().total_width());
}

TargetStack propagate(const Network& net, const ForwardTrace& trace, const Matrix& t_out,
                      TargetFlavor flavor, Blend blend, double gamma) {
  check_output_target(net, trace, t_out);
  const std::size_t depth = net.depth();
  const std::size_t batch = trace.samples();

  TargetStack stack;
  stack.flavor = flavor;
  stack.targets.resize(depth + 1);
  stack.offsets.resize(depth + 1);
  stack.kink_crossings.assign(depth, 0);
  stack.sample_crossings.assign(batch, 0);

  stack.targets[depth] = t_out;
  stack.offsets[depth] = output_error(net, trace, t_out);

  for (std::size_t i = depth; i-- > 0;) {
    const Layer& layer = net.layer(i);
    const LayerTrace& lt = trace.layers[i];
    const Matrix& offset = stack.offsets[i + 1];
    const std::size_t fwd = layer.forward_width;

    // Pre-image offset f^-1(y) - f^-1(y - shift), where
    // shift = blend * offset on forward rows and 0 on auxiliary rows.
    Matrix preimage(layer.total_width(), batch);
    for (std::size_t r = 0; r < fwd; ++r) {
      for (std::size_t c = 0; c < batch; ++c) {
        double factor = 1.0;
        if (blend == Blend::Uniform) {
          factor = gamma;
        } else if (blend == Blend::GainAdjusted) {
          const double a = lt.gain(r, c);
          factor = gamma * a * a;
          if (!(factor < 1.0)) {
            throw InvalidArgument("gamma * f'(h)^2 = " + std::to_string(factor) +
                                  " >= 1 at layer " + std::to_string(i) +
                                  "; gamma is too large for the current gains");
          }
        }
        const double y = lt.activation(r, c);
        const double shift = factor * offset(r, c);
        preimage(r, c) = layer.activation.inverse_difference(y, shift);
        if (layer.activation.kind == ActivationKind::LeakyRelu &&
            (lt.pre_activation(r, c) >= 0.0) != (y - shift >= 0.0)) {
          ++stack.kink_crossings[i];
          ++stack.sample_crossings[c];
        }
      }
    }

    const Matrix below = LuFactorization(layer.weight).solve(preimage);
    const Matrix forward_below = trace.layer_input(net, i);
    stack.targets[i] = forward_below - below;
    const std::size_t below_width = i == 0 ? net.input_width() : net.layer(i - 1).total_width();
    stack.offsets[i] = below.zero_padded(below_width);
  }
  return stack;
}

UpdateSet layerwise_updates(Rule rule, const ForwardTrace& trace, const TargetStack& targets,
                            double gamma, bool scaled) {
  const std::size_t depth = trace.layers.size();
  if (targets.depth() != depth) throw DimensionMismatch("target stack depth does not match trace");
  const std::size_t batch = trace.samples();

  UpdateSet out;
  out.rule = rule;
  out.samples = batch;
  out.deltas.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    const LayerTrace& lt = trace.layers[i];
    const Matrix delta = hadamard(lt.gain, targets.offsets[i + 1]);
    const Matrix below = i == 0 ? trace.input
                                : trace.layers[i - 1].activation.row_block(0, lt.gain.rows());
    double scale = -1.0 / static_cast<double>(batch);
    if (scaled) scale *= std::pow(gamma, -static_cast<double>(depth - 1 - i));
    out.deltas.push_back(matmul_nt(delta, below) * scale);
  }
  return out;
}

}  // namespace

std::string_view rule_name(Rule rule) noexcept {
  switch (rule) {
    case Rule::BP: return "bp";
    case Rule::TP: return "tp";
    case Rule::ITP: return "itp";
    case Rule::GAIT: return "gait";
  }
  return "unknown";
}

Rule parse_rule(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "bp") return Rule::BP;
  if (lower == "tp") return Rule::TP;
  if (lower == "itp") return Rule::ITP;
  if (lower == "gait" || lower == "gait-prop" || lower == "gaitprop") return Rule::GAIT;
  throw InvalidArgument("unknown learning rule '" + std::string(name) + "'");
}

UpdateSet merge(const UpdateSet& a, const UpdateSet& b) {
  if (a.samples == 0) return b;
  if (b.samples == 0) return a;
  if (a.deltas.size() != b.deltas.size()) throw DimensionMismatch("merge: depth mismatch");
  UpdateSet out;
  out.rule = a.rule;
  out.samples = a.samples + b.samples;
  const double wa = static_cast<double>(a.samples) / static_cast<double>(out.samples);
  const double wb = static_cast<double>(b.samples) / static_cast<double>(out.samples);
  for (std::size_t i = 0; i < a.deltas.size(); ++i) {
    out.deltas.push_back(a.deltas[i] * wa + b.deltas[i] * wb);
  }
  return out;
}

UpdateSet bp_updates(const Network& net, const ForwardTrace& trace, const Matrix& t_out) {
  check_output_target(net, trace, t_out);
  const std::size_t depth = net.depth();
  const double scale = -1.0 / static_cast<double>(trace.samples());

  UpdateSet out;
  out.rule = Rule::BP;
  out.samples = trace.samples();
  out.deltas.resize(depth);

  Matrix delta = hadamard(trace.layers.back().gain, output_error(net, trace, t_out));
  for (std::size_t i = depth; i-- > 0;) {
    out.deltas[i] = matmul_nt(delta, trace.layer_input(net, i)) * scale;
    if (i == 0) break;
    const Matrix back = matmul_tn(net.layer(i).weight, delta);
    delta = hadamard(trace.layers[i - 1].gain, back.zero_padded(net.layer(i - 1).total_width()));
  }
  return out;
}

TargetStack tp_targets(const Network& net, const ForwardTrace& trace, const Matrix& t_out) {
  return propagate(net, trace, t_out, TargetFlavor::TP, Blend::Full, 1.0);
}

UpdateSet tp_updates(const ForwardTrace& trace, const TargetStack& targets) {
  if (targets.flavor != TargetFlavor::TP) throw InvalidArgument("tp_updates needs TP targets");
  return layerwise_updates(Rule::TP, trace, targets, 1.0, false);
}

TargetStack itp_targets(const Network& net, const ForwardTrace& trace, const Matrix& t_out,
                        const IncrementalConfig& cfg) {
  check_gamma(cfg.gamma);
  return propagate(net, trace, t_out, TargetFlavor::ITP, Blend::Uniform, cfg.gamma);
}

UpdateSet itp_updates(const ForwardTrace& trace, const TargetStack& targets,
                      const IncrementalConfig& cfg) {
  if (targets.flavor != TargetFlavor::ITP) throw InvalidArgument("itp_updates needs ITP targets");
  return layerwise_updates(Rule::ITP, trace, targets, cfg.gamma, cfg.scale_updates);
}

TargetStack gait_targets(const Network& net, const ForwardTrace& trace, const Matrix& t_out,
                         const IncrementalConfig& cfg) {
  check_gamma(cfg.gamma);
  return propagate(net, trace, t_out, TargetFlavor::GAIT, Blend::GainAdjusted, cfg.gamma);
}

UpdateSet gait_updates(const ForwardTrace& trace, const TargetStack& targets,
                       const IncrementalConfig& cfg) {
  if (targets.flavor != TargetFlavor::GAIT) {
    throw InvalidArgument("gait_updates needs GAIT targets");
  }
  return layerwise_updates(Rule::GAIT, trace, targets, cfg.gamma, cfg.scale_updates);
}

UpdateSet compute_updates(Rule rule, const Network& net, const ForwardTrace& trace,
                          const Matrix& t_out, const IncrementalConfig& cfg) {
  switch (rule) {
    case Rule::BP: return bp_updates(net, trace, t_out);
    case Rule::TP: return tp_updates(trace, tp_targets(net, trace, t_out));
    case Rule::ITP: return itp_updates(trace, itp_targets(net, trace, t_out, cfg), cfg);
    case Rule::GAIT: return gait_updates(trace, gait_targets(net, trace, t_out, cfg), cfg);
  }
  throw InvalidArgument("unknown rule");
}

Vector loss_to_target(std::span<const double> y_out, std::span<const double> loss_gradient) {
  if (y_out.size() != loss_gradient.size()) {
    throw DimensionMismatch("loss_to_target: length mismatch");
  }
  Vector t(y_out.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = y_out[i] - loss_gradient[i];
  return t;
}

Matrix loss_to_target(const Matrix& y_out, const Matrix& loss_gradient) {
  return y_out - loss_gradient;
}

Matrix softmax_cross_entropy_gradient(const Matrix& y_out, const Matrix& onehot) {
  if (y_out.rows() != onehot.rows() || y_out.cols() != onehot.cols()) {
    throw DimensionMismatch("softmax_cross_entropy_gradient: shape mismatch");
  }
  Matrix grad(y_out.rows(), y_out.cols());
  for (std::size_t c = 0; c < y_out.cols(); ++c) {
    double peak = y_out(0, c);
    for (std::size_t r = 1; r < y_out.rows(); ++r) peak = std::max(peak, y_out(r, c));
    double total = 0.0;
    for (std::size_t r = 0; r < y_out.rows(); ++r) total += std::exp(y_out(r, c) - peak);
    for (std::size_t r = 0; r < y_out.rows(); ++r) {
      grad(r, c) = std::exp(y_out(r, c) - peak) / total - onehot(r, c);
    }
  }
  return grad;
}

double ortho_penalty(const Matrix& w, double lambda, OrthoPenaltyForm form) {
  if (!w.is_square()) throw DimensionMismatch("ortho_penalty needs a square matrix");
  const Matrix gram = matmul_nt(w, w);
  const std::size_t n = w.rows();
  if (form == OrthoPenaltyForm::Mask) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        if (r != c) s += gram(r, c) * gram(r, c);
      }
    }
    return lambda * s;
  }
  // (W W^T)(J - I): entry (r, c) is the row sum of gram minus gram(r, c).
  double s = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double row_sum = 0.0;
    for (double v : gram.row(r)) row_sum += v;
    for (std::size_t c = 0; c < n; ++c) {
      const double v = row_sum - gram(r, c);
      s += v * v;
    }
  }
  return lambda * s;
}

Matrix ortho_reg_grad(const Matrix& w, double lambda, OrthoPenaltyForm form) {
  if (!w.is_square()) throw DimensionMismatch("ortho_reg_grad needs a square matrix");
  const std::size_t n = w.rows();
  if (lambda == 0.0) return Matrix(n, n);
  Matrix gram = matmul_nt(w, w);
  if (form == OrthoPenaltyForm::Mask) {
    // d/dW sum_{r != c} (W W^T)_rc^2 = 4 O W with O the off-diagonal part.
    for (std::size_t i = 0; i < n; ++i) gram(i, i) = 0.0;
    return matmul(gram, w) * (4.0 * lambda);
  }
  // P = tr(S K^2 S) with S = W W^T, K = J - I. dP/dS = K^2 S + S K^2 and
  // dP/dW = 2 (K^2 S + S K^2) W. K^2 = (n - 2) J + I.
  Matrix k2(n, n, static_cast<double>(n) - 2.0);
  for (std::size_t i = 0; i < n; ++i) k2(i, i) += 1.0;
  const Matrix g = matmul(k2, gram) + matmul(gram, k2);
  return matmul(g, w) * (2.0 * lambda);
}

CorrectionMatrices correction_matrices(const Network& net, const ForwardTrace& trace,
                                       std::size_t layer, const IncrementalConfig& cfg,
                                       std::size_t sample) {
  const std::size_t depth = net.depth();
  if (layer >= depth) throw InvalidArgument("correction_matrices: layer index out of range");
  if (sample >= trace.samples()) throw InvalidArgument("correction_matrices: sample out of range");
  if (trace.layers.size() != depth) throw DimensionMismatch("trace depth does not match network");
  check_gamma(cfg.gamma);

  const auto gains = [&](std::size_t i) { return trace.layers[i].gain.col(sample); };
  const auto scaled_rows = [](Matrix m, const Vector& d, bool invert_diag) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double s = invert_diag ? 1.0 / d[r] : d[r];
      for (double& v : m.row(r)) v *= s;
    }
    return m;
  };

  const Vector a_l = gains(layer);
  // Backward chain A_l E W^T A ... W^T A_L and the two forward chains
  // (A^-1 W R ... for N, A W R ... for M), each applied to A_l^-1.
  Matrix left = Matrix::diagonal(a_l);
  Matrix right_n = scaled_rows(Matrix::identity(a_l.size()), a_l, true);
  Matrix right_m = right_n;
  for (std::size_t j = layer + 1; j < depth; ++j) {
    const Layer& lj = net.layer(j);
    const std::size_t fwd = net.layer(j - 1).forward_width;
    const Vector a_j = gains(j);

    // left * E_{j-1}: keep the leading `fwd` columns.
    Matrix trimmed(left.rows(), fwd);
    for (std::size_t r = 0; r < left.rows(); ++r) {
      for (std::size_t c = 0; c < fwd; ++c) trimmed(r, c) = left(r, c);
    }
    Matrix wt_a = lj.weight.transposed();
    for (std::size_t r = 0; r < wt_a.rows(); ++r) {
      for (std::size_t c = 0; c < wt_a.cols(); ++c) wt_a(r, c) *= a_j[c];
    }
    left = matmul(trimmed, wt_a);

    right_n = scaled_rows(matmul(lj.weight, right_n.row_block(0, fwd)), a_j, true);
    right_m = scaled_rows(matmul(lj.weight, right_m.row_block(0, fwd)), a_j, false);
  }

  CorrectionMatrices out;
  out.gait = matmul(left, right_n);
  out.itp = matmul(left, right_m);
  out.prefactor = std::pow(cfg.gamma, -static_cast<double>(depth - 1 - layer));
  return out;
}

}  // namespace gait
