#include "gait/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

#include "gait/error.hpp"

namespace gait {

double cosine_similarity(const Matrix& a, const Matrix& b) {
  const double na = frobenius_norm(a);
  const double nb = frobenius_norm(b);
  if (na <= kZeroNorm || nb <= kZeroNorm) return std::nan("");
  const double c = dot(a.data(), b.data()) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

AlignmentReport align(const UpdateSet& a, const UpdateSet& b, std::size_t subsample, Rng rng) {
  if (a.deltas.size() != b.deltas.size()) throw DimensionMismatch("align: depth mismatch");
  AlignmentReport report;
  report.layers.reserve(a.deltas.size());
  for (std::size_t i = 0; i < a.deltas.size(); ++i) {
    const Matrix& da = a.deltas[i];
    const Matrix& db = b.deltas[i];
    if (da.rows() != db.rows() || da.cols() != db.cols()) {
      throw DimensionMismatch("align: layer " + std::to_string(i) + " shape mismatch");
    }
    LayerAlignment la;
    const double na = frobenius_norm(da);
    const double nb = frobenius_norm(db);
    if (na > kZeroNorm && nb > kZeroNorm) {
      la.cosine = std::clamp(dot(da.data(), db.data()) / (na * nb), -1.0, 1.0);
      la.norm_ratio = na / nb;
    }

    const std::size_t n = da.size();
    std::vector<std::size_t> picks(n);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    const std::size_t keep = std::min(n, subsample);
    if (keep < n) {
      Rng layer_rng = rng.split(i);
      // Partial Fisher-Yates: the first `keep` slots become the sample.
      for (std::size_t k = 0; k < keep; ++k) {
        std::swap(picks[k], picks[k + layer_rng.below(n - k)]);
      }
      picks.resize(keep);
      std::sort(picks.begin(), picks.end());
    }
    la.scatter.reserve(picks.size());
    for (std::size_t k : picks) la.scatter.emplace_back(da.data()[k], db.data()[k]);
    report.layers.push_back(std::move(la));
  }
  return report;
}

std::vector<double> ortho_drift(const Network& net) {
  std::vector<double> out;
  out.reserve(net.depth());
  for (const Layer& l : net.layers()) out.push_back(orthogonality_error(l.weight));
  return out;
}

void write_alignment_csv(std::ostream& out, const AlignmentReport& report) {
  out << "layer,cosine,norm_ratio\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.layers.size(); ++i) {
    const auto& l = report.layers[i];
    out << i << ',';
    if (l.cosine) out << *l.cosine; else out << "undefined";
    out << ',';
    if (l.norm_ratio) out << *l.norm_ratio; else out << "undefined";
    out << '\n';
  }
}

void write_scatter_csv(std::ostream& out, const AlignmentReport& report) {
  out << "layer,elem_a,elem_b\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.layers.size(); ++i) {
    for (const auto& [x, y] : report.layers[i].scatter) out << i << ',' << x << ',' << y << '\n';
  }
}

}  // namespace gait
